"""Policy execution: greedy extraction from Q-diagrams, stepping and rollouts."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .diagram import Gfodd, bind_variable, normalize
from .errors import EmptyDomainError, ModelError
from .evaluate import eval_ve
from .model import DomainSpec, apply_variant, ground_actions, variant_distribution
from .planner import post_decision
from .relational import Const, Interpretation

Action = tuple[str, tuple[str, ...]]


def _sample(dist, rng: np.random.Generator):
    """Draw from ``[(item, Fraction)]`` with one uniform number."""
    u = rng.random()
    acc = 0.0
    last = None
    for item, p in dist:
        if p == 0:
            continue
        acc += float(p)
        last = item
        if u < acc:
            return item
    return last


class Policy:
    def act(self, s: Interpretation, rng: np.random.Generator) -> Action:
        raise NotImplementedError


class GreedyPolicy(Policy):
    """Greedy with respect to per-schema Q-diagrams.

    For every ground instantiation ``A(o)`` the Q-value is the schema's
    Q-diagram with its parameters (the leading MAX variables) bound to ``o``.
    The largest value wins; ties go to the earlier schema name, then to the
    lexicographically smaller binding.

    When ``after`` is given (the exogenous-expectation diagram ``W`` the Q
    map was built from), deterministic schemas are valued as
    ``R(s) + γ W(s')`` on the ground successor ``s'``. This equals the bound
    Q-diagram exactly, since regression through a deterministic variant is
    evaluation in the successor state and the reward has no MAX variables,
    but avoids evaluating the larger regressed diagram.
    """

    def __init__(self, d: DomainSpec, q: Mapping[str, Gfodd], after: Gfodd | None = None):
        missing = {s.name for s in d.schemas} - set(q)
        if missing:
            raise ModelError(f"greedy policy lacks Q-diagrams for {sorted(missing)}")
        self.domain = d
        self.q = dict(q)
        self.after = after
        self.cache: dict = {}
        self.after_cache: dict = {}

    @classmethod
    def from_plan(cls, d: DomainSpec, result, use_successor: bool = True) -> "GreedyPolicy":
        """Greedy policy of the final value function of a :class:`PlanResult`.

        Uses the Q-diagrams of the backup that produced ``V_k`` (their max is
        ``V_k``), so the successor shortcut values ``V_{k-1}``.
        """
        after = post_decision(result.values[-2], d, result.unified) if use_successor else None
        return cls(d, result.final_q(), after)

    def _after_value(self, s: Interpretation) -> Fraction:
        r = self.after_cache.get(s.facts)
        if r is None:
            r = eval_ve(self.after, s).value
            self.after_cache[s.facts] = r
        return r

    def q_value(self, s: Interpretation, name: str, args: Sequence[str]) -> Fraction:
        """Q-value of one ground action."""
        d = self.domain
        schema = d.schema(name)
        if self.after is not None and schema.is_deterministic:
            s2 = apply_variant(d, s, schema, schema.variants[0], args)
            return eval_ve(d.reward, s).value + d.discount * self._after_value(s2)
        f = self.q[name]
        g = f
        for (v, _), o in zip(f.prefix[:len(schema.params)], args):
            g = bind_variable(g, v, Const(o, v.sort))
        return eval_ve(normalize(g), s).value

    def values(self, s: Interpretation) -> list[tuple[Action, Fraction]]:
        """Q-value of every ground action, in schema-name then binding order."""
        acts = ground_actions(self.domain, s)
        return [(a, self.q_value(s, *a)) for a in acts]

    def act(self, s: Interpretation, rng=None) -> Action:
        hit = self.cache.get(s.facts)
        if hit is not None:
            return hit
        best = None
        for a, val in self.values(s):
            if best is None or val > best[1]:
                best = (a, val)
        if best is None:
            raise EmptyDomainError("no applicable action")
        self.cache[s.facts] = best[0]
        return best[0]


def greedy_action(p: GreedyPolicy, s: Interpretation) -> Action:
    return p.act(s)


class RandomPolicy(Policy):
    """Uniform over ground agent actions (using the rollout's generator)."""

    def __init__(self, d: DomainSpec):
        self.domain = d

    def act(self, s: Interpretation, rng: np.random.Generator) -> Action:
        acts = ground_actions(self.domain, s)
        if not acts:
            raise EmptyDomainError("no applicable action")
        return acts[int(rng.integers(len(acts)))]


class TabularPolicy(Policy):
    """A ground policy table, e.g. the greedy policy of exact value iteration."""

    def __init__(self, mdp, table: Sequence[int]):
        self.mdp = mdp
        self.table = list(table)

    def act(self, s: Interpretation, rng=None) -> Action:
        return self.mdp.actions[self.table[self.mdp.state_index(s)]]


class Environment:
    """Samples transitions of a domain; caches the reward of visited states."""

    def __init__(self, d: DomainSpec):
        self.domain = d
        self.rewards: dict = {}

    def reward(self, s: Interpretation) -> Fraction:
        r = self.rewards.get(s.facts)
        if r is None:
            r = eval_ve(self.domain.reward, s).value
            self.rewards[s.facts] = r
        return r

    def step(self, s: Interpretation, a: Action, rng: np.random.Generator):
        """``(next state, reward of s)``: agent variant, then each exogenous event in object order."""
        d = self.domain
        r = self.reward(s)
        name, args = a
        schema = d.schema(name)
        var = _sample(variant_distribution(schema, args, s), rng)
        s = apply_variant(d, s, schema, var, args)
        ex = d.exogenous
        if ex is not None:
            for obj in s.domain(ex.param.sort):
                var = _sample(variant_distribution(ex, (obj,), s), rng)
                s = apply_variant(d, s, ex, var, (obj,))
        return s, r


def step(d: DomainSpec, s: Interpretation, a: Action, rng: np.random.Generator):
    return Environment(d).step(s, a, rng)


def rollout(env: Environment, policy: Policy, s: Interpretation, horizon: int,
            discount, rng: np.random.Generator) -> float:
    """Discounted return ``Σ_t γ^t r_t`` over ``horizon`` steps."""
    total = 0.0
    g = 1.0
    discount = float(discount)
    for _ in range(horizon):
        a = policy.act(s, rng)
        s, r = env.step(s, a, rng)
        total += g * float(r)
        g *= discount
    return total


@dataclass
class RolloutStats:
    returns: np.ndarray  # instances x runs
    seed: int
    horizon: int
    discount: float

    @property
    def mean(self) -> float:
        return float(self.returns.mean())

    @property
    def std(self) -> float:
        return float(self.returns.std())

    @property
    def instance_means(self) -> np.ndarray:
        return self.returns.mean(axis=1)

    @property
    def instance_stds(self) -> np.ndarray:
        return self.returns.std(axis=1)


def instance_states(d: DomainSpec, n: int, instances: int, seed: int) -> list[Interpretation]:
    """Seeded initial states, uniform over consistent states."""
    return [d.random_state(n, np.random.default_rng([seed, 0, i])) for i in range(instances)]


def evaluate_policy(d: DomainSpec, policy: Policy, n: int, instances: int = 15, runs: int = 30,
                    horizon: int = 30, discount=None, seed: int = 0,
                    env: Environment | None = None) -> RolloutStats:
    """Discounted returns over seeded instances and runs (deterministic given ``seed``)."""
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    discount = d.discount if discount is None else Fraction(discount)
    env = env or Environment(d)
    starts = instance_states(d, n, instances, seed)
    out = np.zeros((instances, runs))
    for i, s0 in enumerate(starts):
        for r in range(runs):
            rng = np.random.default_rng([seed, 1, i, r])
            out[i, r] = rollout(env, policy, s0, horizon, discount, rng)
    return RolloutStats(out, seed, horizon, float(discount))


__all__ = [
    "Policy", "GreedyPolicy", "RandomPolicy", "TabularPolicy", "Environment", "greedy_action",
    "step", "rollout", "RolloutStats", "evaluate_policy", "instance_states",
]
