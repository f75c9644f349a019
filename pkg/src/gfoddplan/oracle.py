"""Exact propositional reference for small instances.

The domain is grounded at a fixed size: every consistent state, every ground
agent action, and the exact transition distribution (agent variant, then the
exogenous event of each shop in turn). Backups used in correctness checks are
exact rationals; the convergence run to ``V*`` uses floats on sparse matrices.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from .apply import scale
from .diagram import AVG, Gfodd, apply_nodes, bind_variable, normalize
from .errors import ModelError, ResourceError
from .evaluate import eval_ve
from .model import DomainSpec, apply_variant, ground_actions, variant_distribution
from .planner import regress_root
from .relational import Const, Interpretation

# largest instance size the oracle will ground, per built-in domain
SIZE_CAPS = {"ic": 6, "aic": 3}
DEFAULT_CAP = 3


def size_cap(d: DomainSpec) -> int:
    return SIZE_CAPS.get(d.name, DEFAULT_CAP)


def enumerate_states(d: DomainSpec, n: int) -> list[Interpretation]:
    """All consistent states with ``n`` objects per scaled sort, in a fixed order."""
    if n < 1:
        raise ValueError("need at least one shop")
    return d.enumerate_states(n)


def _exogenous_stage(d: DomainSpec, s: Interpretation) -> dict[Interpretation, Fraction]:
    """Distribution after the exogenous event of every scaled object, in object order."""
    ex = d.exogenous
    dist = {s: Fraction(1)}
    if ex is None:
        return dist
    for obj in s.domain(ex.param.sort):
        nxt: dict = {}
        for st, p in dist.items():
            for var, q in variant_distribution(ex, (obj,), st):
                if q == 0:
                    continue
                st2 = apply_variant(d, st, ex, var, (obj,))
                nxt[st2] = nxt.get(st2, 0) + p * q
        dist = nxt
    return dist


def ground_transition(d: DomainSpec, s: Interpretation, action: tuple[str, tuple[str, ...]],
                      _memo: dict | None = None) -> dict[Interpretation, Fraction]:
    """Exact next-state distribution of a ground agent action followed by all exogenous events."""
    name, args = action
    schema = d.schema(name)
    out: dict = {}
    for var, p in variant_distribution(schema, args, s):
        if p == 0:
            continue
        s1 = apply_variant(d, s, schema, var, args)
        if _memo is not None and s1 in _memo:
            ex = _memo[s1]
        else:
            ex = _exogenous_stage(d, s1)
            if _memo is not None:
                _memo[s1] = ex
        for s2, q in ex.items():
            out[s2] = out.get(s2, 0) + p * q
    return out


@dataclass
class GroundMdp:
    """A grounded instance: states, actions, sparse exact transitions and rewards."""
    domain: DomainSpec
    n: int
    states: list[Interpretation]
    actions: list[tuple[str, tuple[str, ...]]]
    # transitions[a][s] = ((next index, probability), ...)
    transitions: list[list[tuple[tuple[int, Fraction], ...]]]
    reward: list[Fraction]
    discount: Fraction
    index: dict = field(default_factory=dict, repr=False)
    _matrices: list | None = field(default=None, repr=False)

    @property
    def num_states(self) -> int:
        return len(self.states)

    def state_index(self, s: Interpretation) -> int:
        return self.index[s.facts]

    def matrices(self) -> list[sp.csr_matrix]:
        """Float transition matrices, one per ground action."""
        if self._matrices is None:
            mats = []
            size = self.num_states
            for rows in self.transitions:
                r, c, v = [], [], []
                for i, row in enumerate(rows):
                    for j, p in row:
                        r.append(i)
                        c.append(j)
                        v.append(float(p))
                mats.append(sp.csr_matrix((v, (r, c)), shape=(size, size)))
            self._matrices = mats
        return self._matrices


def build_ground(d: DomainSpec, n: int) -> GroundMdp:
    """Ground ``d`` with ``n`` shops; refuses sizes above the domain's cap."""
    cap = size_cap(d)
    if n > cap:
        raise ResourceError(f"ground oracle for {d.name} is capped at n = {cap} (asked for {n})")
    states = enumerate_states(d, n)
    index = {s.facts: i for i, s in enumerate(states)}
    actions = ground_actions(d, states[0])
    memo: dict = {}
    transitions = []
    for a in actions:
        rows = []
        for s in states:
            dist = ground_transition(d, s, a, memo)
            total = sum(dist.values())
            if total != 1:
                raise ModelError(f"transition of {a} does not sum to 1 ({total})")
            try:
                rows.append(tuple(sorted((index[t.facts], p) for t, p in dist.items())))
            except KeyError:
                raise ModelError(f"action {a} leads to an inconsistent state") from None
        transitions.append(rows)
    reward = tabulate(d.reward, states)
    return GroundMdp(d, n, states, actions, transitions, reward, d.discount, index)


# ---------------------------------------------------------------------------
# value tables

def tabulate(f: Gfodd, states: Sequence[Interpretation] | GroundMdp) -> list[Fraction]:
    """``eval_ve(f, s)`` for every state."""
    if isinstance(states, GroundMdp):
        states = states.states
    return [eval_ve(f, s).value for s in states]


def q_table(mdp: GroundMdp, values: Sequence) -> list[list]:
    """``R(s) + γ Σ Pr(s'|s,a) V(s')`` per action and state (exact if ``values`` are)."""
    g = mdp.discount if isinstance(values[0], Fraction) else float(mdp.discount)
    out = []
    for rows in mdp.transitions:
        out.append([mdp.reward[i] + g * sum(p * values[j] for j, p in row)
                    for i, row in enumerate(rows)])
    return out


def exact_backup(mdp: GroundMdp, values: Sequence[Fraction]) -> list[Fraction]:
    """The true Bellman operator ``T`` in exact arithmetic."""
    values = [Fraction(v) for v in values]
    q = q_table(mdp, values)
    return [max(col) for col in zip(*q)]


def exogenous_expectation(mdp: GroundMdp, values: Sequence[Fraction]) -> list[Fraction]:
    """``E[V(s')]`` where ``s'`` follows the exogenous events alone from ``s``."""
    d = mdp.domain
    out = []
    for s in mdp.states:
        dist = _exogenous_stage(d, s)
        out.append(sum(p * Fraction(values[mdp.state_index(t)]) for t, p in dist.items()))
    return out


@dataclass
class ViResult:
    values: np.ndarray
    policy: list[int]  # index into mdp.actions per state
    deltas: list[float]

    @property
    def iterations(self) -> int:
        return len(self.deltas)


def _greedy(q: np.ndarray, tie_tol: float = 1e-12) -> list[int]:
    best = q.max(axis=0)
    return [int(np.flatnonzero(q[:, i] >= best[i] - tie_tol)[0]) for i in range(q.shape[1])]


def exact_vi(mdp: GroundMdp, tolerance: float = 1e-9, max_iterations: int = 100_000) -> ViResult:
    """Value iteration from zero until the sup-norm change drops below ``tolerance``.

    The policy is greedy with respect to the final values; ties go to the
    first action in ground-action order.
    """
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    mats = mdp.matrices()
    r = np.array([float(x) for x in mdp.reward])
    g = float(mdp.discount)
    v = np.zeros(mdp.num_states)
    deltas = []
    for _ in range(max_iterations):
        q = np.vstack([r + g * (m @ v) for m in mats])
        nv = q.max(axis=0)
        delta = float(np.max(np.abs(nv - v)))
        deltas.append(delta)
        v = nv
        if delta < tolerance:
            break
    else:
        raise ResourceError(f"value iteration did not converge in {max_iterations} iterations")
    q = np.vstack([r + g * (m @ v) for m in mats])
    return ViResult(v, _greedy(q), deltas)


def policy_evaluation(mdp: GroundMdp, policy: Sequence[int]) -> np.ndarray:
    """Exact (float) value of a stationary ground policy: solve ``(I - γ P_π) V = R``."""
    mats = mdp.matrices()
    size = mdp.num_states
    rows = sp.vstack([mats[a].getrow(i) for i, a in enumerate(policy)]).tocsc()
    system = sp.identity(size, format="csc") - float(mdp.discount) * rows
    r = np.array([float(x) for x in mdp.reward])
    return np.asarray(spsolve(system, r)).reshape(-1)


# ---------------------------------------------------------------------------
# reference for the exogenous template

def sequential_exogenous(v: Gfodd, d: DomainSpec, objects: Sequence[str]) -> Gfodd:
    """Expectation of ``v`` under ``E(o_1), ..., E(o_n)`` regressed one object at a time.

    The averaged variable is grounded over ``objects`` (the value is the mean
    of the grounded copies, which share the MAX variables) and each event is regressed in turn without
    standardizing its variants apart. The result mentions the objects as
    constants and is meant for instances whose scaled objects are exactly
    ``objects``.
    """
    ex = d.exogenous
    avg = [u for u, a in v.prefix if a is AVG]
    if len(avg) != 1 or v.prefix[-1][0] != avg[0]:
        raise ModelError("sequential_exogenous needs a MAX* AVG diagram")
    y = avg[0]
    total = None
    for o in objects:
        w = bind_variable(v, y, Const(o, y.sort))
        for obj in objects:
            theta = {ex.param: Const(obj, ex.param.sort)}
            acc = None
            for var in ex.variants:
                r = regress_root(w.root, var, theta, w.key)
                p = var.prob.instantiate(theta, w.key)
                part = apply_nodes("multiply", r, p, w.key)
                acc = part if acc is None else apply_nodes("add", acc, part, w.key)
            w = normalize(Gfodd(w.prefix, acc, validate=False))
        # the grounded copies share the MAX variables, as the lifted form does
        total = w.root if total is None else apply_nodes("add", total, w.root, w.key)
    return scale(normalize(Gfodd(w.prefix, total, validate=False)), Fraction(1, len(objects)))


__all__ = [
    "GroundMdp", "ViResult", "build_ground", "enumerate_states", "ground_transition",
    "tabulate", "q_table", "exact_backup", "exogenous_expectation", "exact_vi",
    "policy_evaluation", "sequential_exogenous", "size_cap", "SIZE_CAPS",
]
