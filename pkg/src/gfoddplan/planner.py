"""Symbolic value iteration for service domains.

One backup is ``sdp1(sdp2(V))``: ``sdp2`` handles the exogenous events by
grounding the averaged variable to a Skolem constant, regressing a single
generic event without standardizing its variants apart, and lifting the
constant back; ``sdp1`` is the usual backup over the agent's action schemas.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .apply import add_shared_avg, eliminate_selectors, max_all, scale
from .diagram import (
    AVG, MAX, Gfodd, KeyFn, Leaf, apply_nodes, bind_variable, canon_atom, fresh_name,
    ite_atom, ite_diagram, lift_constant, normalize, prefix_index, rebuild,
)
from .errors import ConstructionError, FormError, ModelError, ResourceError
from .model import ActionVariant, DomainSpec, check_assumptions
from .reduce import reduce_with_report
from .relational import Atom, Const, Interpretation, Var

DEFAULT_NODE_BUDGET = 50_000


def _taken(f: Gfodd) -> set[str]:
    return {v.name for v in f.variables} | {c.name for c in f.constants()}


def regress_root(root, variant: ActionVariant, theta: dict, key: KeyFn):
    """Replace every atom that has a TVD under ``variant`` by that TVD.

    Built bottom-up with if-then-else composition so the result stays sorted
    under ``key``. ``theta`` binds the variant's parameters.
    """
    memo: dict = {}
    ite_memo: dict = {}
    tvd_memo: dict = {}

    def go(n):
        if type(n) is Leaf:
            return n
        r = memo.get(id(n))
        if r is not None:
            return r
        hi, lo = go(n.hi), go(n.lo)
        a = n.atom
        t = None if a.is_equality else variant.tvd(a.pred)
        if t is None:
            r = ite_atom(a, hi, lo, key, ite_memo)
        else:
            c = tvd_memo.get(a)
            if c is None:
                th = dict(theta)
                th.update(zip(t.targets, a.args))
                try:
                    c = t.diagram.instantiate(th, key)
                except ConstructionError as e:
                    raise ModelError(f"TVD for {t.pred} introduces a new variable: {e}") from None
                tvd_memo[a] = c
            r = ite_diagram(c, hi, lo, key, ite_memo)
        memo[id(n)] = r
        return r

    import sys
    if sys.getrecursionlimit() < 20000:
        sys.setrecursionlimit(20000)
    return go(root)


def regress(v: Gfodd, variant: ActionVariant, params: Sequence[Var], args: Sequence) -> Gfodd:
    """Regress ``v`` through one variant with its parameters bound to ``args``."""
    theta = dict(zip(params, args))
    return normalize(Gfodd(v.prefix, regress_root(v.root, variant, theta, v.key), validate=False))


def _regress_weighted(v: Gfodd, variant: ActionVariant, theta: dict):
    key = v.key
    r = regress_root(v.root, variant, theta, key)
    p = variant.prob.instantiate(theta, key)
    return apply_nodes("multiply", r, p, key)


# ---------------------------------------------------------------------------
# exogenous events

def sdp2(v: Gfodd, d: DomainSpec, strict: bool = True) -> Gfodd:
    """Expectation of ``v`` over one step of the exogenous events (lower bound).

    The averaged variable ``y`` is bound to a Skolem constant ``a``; the
    variants of ``E(a)`` are regressed, weighted and summed without
    standardizing apart; ``a`` is then lifted back to ``avg y`` at the tail.
    """
    aggs = [a for _, a in v.prefix]
    avg_pos = [i for i, a in enumerate(aggs) if a is AVG]
    if strict and (len(avg_pos) > 1 or (avg_pos and avg_pos[-1] != len(aggs) - 1)):
        raise FormError("sdp2 needs a MAX* AVG prefix")
    ex = d.exogenous
    if not avg_pos or ex is None:
        return v
    pos = avg_pos[-1]
    y = v.prefix[pos][0]
    a = Const(fresh_name("_a", _taken(v)), y.sort)
    w = bind_variable(v, y, a)
    theta = {ex.param: a}
    total = None
    for var in ex.variants:
        r = _regress_weighted(w, var, theta)
        total = r if total is None else apply_nodes("add", total, r, w.key)
    res = Gfodd(w.prefix, total, validate=False)
    if a in res.constants():
        res = lift_constant(res, a, y, AVG, position=pos)
    return normalize(res)


# ---------------------------------------------------------------------------
# agent actions

def lift_params(q: Gfodd, consts: Sequence[Const], params: Sequence[Var]) -> Gfodd:
    """Turn parameter constants into leading MAX variables (kept even if unused)."""
    taken = {v.name for v in q.variables} | {c.name for c in q.constants()} - {c.name for c in consts}
    new = []
    for p in params:
        name = fresh_name(p.name, taken)
        taken.add(name)
        new.append(Var(name, p.sort))
    prefix = tuple((v, MAX) for v in new) + q.prefix
    sub = dict(zip(consts, new))
    out = Gfodd(prefix, q.root, validate=False)

    def fn(a):
        if not any(t in sub for t in a.args):
            return a
        return Atom(a.pred, tuple(sub.get(t, t) for t in a.args))

    out.root = rebuild(q.root, fn, out.key)
    return out


def q_schema(v: Gfodd, d: DomainSpec, schema) -> Gfodd:
    """Object-maximized Q-diagram of one action schema; leading MAX variables = parameters."""
    taken = _taken(v)
    consts = []
    for p in schema.params:
        name = fresh_name("_" + p.name, taken)
        taken.add(name)
        consts.append(Const(name, p.sort))
    theta = dict(zip(schema.params, consts))
    q = None
    for var in schema.variants:
        part = normalize(Gfodd(v.prefix, _regress_weighted(v, var, theta), validate=False))
        q = part if q is None else add_shared_avg(q, part)
    q = add_shared_avg(d.reward, scale(q, d.discount))
    return lift_params(q, consts, schema.params)


def sdp1(v: Gfodd, d: DomainSpec) -> tuple[Gfodd, dict[str, Gfodd]]:
    """Backup over agent actions: per-schema Q-diagrams, then their max."""
    qmap = {s.name: q_schema(v, d, s) for s in sorted(d.schemas, key=lambda s: s.name)}
    vnew = normalize(max_all([qmap[k] for k in sorted(qmap)], d.zsort))
    return vnew, qmap


def unify_sp_args(v: Gfodd, special) -> Gfodd:
    """Rewrite every special atom ``sp(u)`` to ``sp(y)`` for the averaged variable ``y``."""
    avg = [u for u, a in v.prefix if a is AVG]
    if len(avg) > 1:
        raise FormError("unify_sp_args needs at most one AVG variable")
    if not avg:
        return v
    y = avg[0]
    special = set(special)

    def fn(a):
        if a.pred in special and a.args != (y,):
            return Atom(a.pred, (y,))
        return a

    return normalize(Gfodd(v.prefix, rebuild(v.root, fn, v.key), validate=False))


# ---------------------------------------------------------------------------
# iteration

@dataclass
class IterationStats:
    iteration: int
    nodes_before_reduction: int
    nodes_after_reduction: int
    edges_removed: int
    q_nodes: dict[str, int]
    prefix_length: int
    seconds: float = 0.0


@dataclass
class BackupResult:
    value: Gfodd
    unreduced: Gfodd
    q: dict[str, Gfodd]
    removed_edges: list = field(default_factory=list)


def post_decision(v: Gfodd, d: DomainSpec, unify: bool = False, strict: bool = True) -> Gfodd:
    """The exogenous expectation ``sdp2(v)`` that a backup regresses through the actions."""
    if unify:
        v = unify_sp_args(v, d.special)
    return sdp2(v, d, strict=strict)


def backup(v: Gfodd, d: DomainSpec, focus: Sequence[Interpretation] | None = None,
           unify: bool | None = None, strict: bool = True) -> BackupResult:
    """``reduce(sdp1(sdp2(v)))``; special atoms are unified first when A3 fails."""
    if unify is None:
        unify = not check_assumptions(d).holds("A3")
    w = post_decision(v, d, unify, strict)
    v1, qmap = sdp1(w, d)
    if focus:
        red, removed = reduce_with_report(v1, focus)
        red = eliminate_selectors(red)
    else:
        red, removed = v1, []
    return BackupResult(red, v1, qmap, removed)


@dataclass
class PlanResult:
    """``values[i]`` is ``V_i``; ``q[i]`` and ``unreduced[i]`` come from the backup that produced it.

    ``q[0]`` is empty and ``unreduced[0]`` is the reward, since ``V_0 = R``.
    """
    values: list[Gfodd]
    q: list[dict[str, Gfodd]]
    unreduced: list[Gfodd]
    stats: list[IterationStats]
    unified: bool = False

    @property
    def iterations(self) -> int:
        return len(self.values) - 1

    def final_q(self) -> dict[str, Gfodd]:
        """Q-diagrams whose max is the final value function (before reduction)."""
        return self.q[-1]


def plan(d: DomainSpec, iterations: int, focus: Sequence[Interpretation] | None = None,
         node_budget: int = DEFAULT_NODE_BUDGET, strict: bool = True) -> PlanResult:
    """``V_0 = R`` and ``V_{i+1} = backup(V_i)`` for ``i < iterations``.

    The budget caps the node count of every diagram produced in an iteration.
    """
    if iterations < 1:
        raise ValueError("iterations must be at least 1")
    unify = not check_assumptions(d).holds("A3")
    result = PlanResult([d.reward], [{}], [d.reward], [], unify)
    for i in range(iterations):
        t0 = time.perf_counter()
        b = backup(result.values[i], d, focus, unify=unify, strict=strict)
        sizes = {k: q.size for k, q in b.q.items()}
        biggest = max([b.unreduced.size, *sizes.values()])
        if biggest > node_budget:
            raise ResourceError(
                f"iteration {i + 1}: diagram with {biggest} nodes exceeds the budget of {node_budget}",
                partial=result)
        result.q.append(b.q)
        result.values.append(b.value)
        result.unreduced.append(b.unreduced)
        result.stats.append(IterationStats(
            i + 1, b.unreduced.size, b.value.size, len(b.removed_edges), sizes,
            len(b.value.prefix), time.perf_counter() - t0))
    return result
