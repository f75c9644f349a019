"""Evaluation of closed GFODDs on interpretations.

Two evaluators return identical :class:`EvalResult` values: the brute-force
block evaluator, which enumerates every substitution, and a variable-
elimination evaluator that builds per-node tables and aggregates variables
as early as the diagram structure allows.

Edge sets are encoded as integer bitmasks: edge ``(k, 'f')`` is bit ``2k``
and ``(k, 't')`` is bit ``2k + 1``, so bit order equals the edge order
(node number, then f before t). Bindings are tuples of positions in each
variable's sort domain.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .diagram import AVG, MAX, Aggregator, Gfodd, Leaf, Node
from .errors import GfoddError, VocabularyError
from .relational import Const, Interpretation, Var


# ---------------------------------------------------------------------------
# edge sets

def edge_bit(node_no: int, branch: bool) -> int:
    return 1 << (2 * node_no + (1 if branch else 0))


def mask_to_edges(mask: int) -> frozenset[tuple[int, str]]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append((i // 2, "t" if i % 2 else "f"))
        mask >>= 1
        i += 1
    return frozenset(out)


def edges_to_mask(edges) -> int:
    m = 0
    for k, b in edges:
        m |= edge_bit(k, b == "t" or b is True)
    return m


def edge_sequence(edges) -> list[tuple[int, str]]:
    """Edges in their total order (node number, then f before t)."""
    return sorted(edges, key=lambda e: (e[0], e[1] == "t"))


def mask_less(a: int, b: int) -> bool:
    """Lexicographic comparison of the sorted edge sequences of two masks."""
    if a == b:
        return False
    d = a ^ b
    low = d & -d
    if a & low:
        # a holds the first differing edge; b is smaller only if it ends there
        return (b & ~(low - 1)) != 0
    return (a & ~(low - 1)) == 0


def edgeset_less(a, b) -> bool:
    """Lexicographic order over edge sets given as ``{(node, 't'|'f')}``."""
    return mask_less(edges_to_mask(a), edges_to_mask(b))


@dataclass
class EvalResult:
    value: Fraction
    winner: dict[Var, Const]
    edge_mask: int
    rows: int = field(default=0, compare=False)

    @property
    def edges(self) -> frozenset[tuple[int, str]]:
        return mask_to_edges(self.edge_mask)

    def same_as(self, other: "EvalResult") -> bool:
        return (self.value == other.value and self.winner == other.winner
                and self.edge_mask == other.edge_mask)


def _better(v1, m1, w1, v2, m2, w2) -> bool:
    """MAX tie-break: larger value, then smaller edge set, then smaller binding."""
    if v1 != v2:
        return v1 > v2
    if m1 != m2:
        return mask_less(m1, m2)
    return w1 < w2


# ---------------------------------------------------------------------------
# per-diagram precomputation

class _Compiled:
    """Node numbering, atom grounders and above/self variable statistics."""

    def __init__(self, f: Gfodd):
        self.f = f
        self.nodes = f.nodes
        self.num = {id(n): i for i, n in enumerate(self.nodes, start=1)}
        index = f.index
        self.nvars = len(f.prefix)
        self.aggs = [a for _, a in f.prefix]
        self.vars = [v for v, _ in f.prefix]
        # leading MAX variables
        lead = 0
        for a in self.aggs:
            if a is MAX:
                lead += 1
            else:
                break
        self.lead = lead
        avg = [i for i, a in enumerate(self.aggs, start=1) if a is AVG]
        self.ve_ok = len(avg) <= 1 and (not avg or avg[0] == self.nvars)
        self.y = avg[0] if avg else None
        # atom grounders: tuple of ('c', name) / ('v', var index)
        self.ground = {}
        self.selfv = {}
        for n in self.nodes:
            if type(n) is Node:
                spec = []
                for t in n.atom.args:
                    if isinstance(t, Var):
                        spec.append((True, index[t]))
                    else:
                        spec.append((False, t.name))
                self.ground[id(n)] = (n.atom.pred, n.atom.is_equality, tuple(spec))
                self.selfv[id(n)] = tuple(sorted({index[t] for t in n.atom.args if isinstance(t, Var)}))
        above = {id(self.nodes[0]): frozenset()}
        for n in self.nodes:
            if type(n) is Node:
                a = above[id(n)] | frozenset(self.selfv[id(n)])
                for c in (n.hi, n.lo):
                    above[id(c)] = above.get(id(c), frozenset()) | a
        self.above = above

    def stats(self, n) -> dict:
        """above/self/maxabove/maxself/maxvar for a node (1-based variable indices)."""
        ab = self.above[id(n)]
        sf = self.selfv.get(id(n), ())
        ma = max(ab, default=0)
        ms = max(sf, default=0)
        return {"above": set(ab), "self": set(sf), "maxabove": ma, "maxself": ms,
                "maxvar": max(ma, ms)}


@lru_cache(maxsize=256)
def _compile(f: Gfodd) -> _Compiled:
    return _Compiled(f)


def node_stats(f: Gfodd) -> dict[int, dict]:
    """Variable statistics keyed by node number."""
    c = _compile(f)
    return {c.num[id(n)]: c.stats(n) for n in c.nodes if type(n) is Node}


def _domains(f: Gfodd, interp: Interpretation):
    return [interp.domain(v.sort) for v in f.variables]


def _truth(comp: _Compiled, n, binding, doms, interp: Interpretation) -> bool:
    """Truth of node n's atom; ``binding`` maps var index -> domain position."""
    pred, is_eq, spec = comp.ground[id(n)]
    names = []
    for is_var, x in spec:
        if is_var:
            names.append(doms[x - 1][binding[x]])
        else:
            if x not in interp.order:
                raise VocabularyError(f"constant {x!r} is not an object of the interpretation")
            names.append(x)
    if is_eq:
        return names[0] == names[1]
    return (pred, *names) in interp.facts


def count_substitutions(f: Gfodd, interp: Interpretation) -> int:
    """Number of substitutions brute-force evaluation enumerates."""
    total = 1
    for d in _domains(f, interp):
        total *= len(d)
    return total


# ---------------------------------------------------------------------------
# brute force

def eval_brute(f: Gfodd, interp: Interpretation) -> EvalResult:
    """Enumerate all substitutions and aggregate blocks from the last variable."""
    comp = _compile(f)
    doms = _domains(f, interp)
    nv = comp.nvars
    aggs = comp.aggs
    lead = comp.lead
    root = comp.nodes[0]
    binding = [0] * (nv + 1)
    truth_cache: dict = {}
    rows = 0

    def path():
        n = root
        mask = 0
        while type(n) is Node:
            _, _, spec = comp.ground[id(n)]
            key = (id(n), tuple(binding[x] for is_var, x in spec if is_var))
            t = truth_cache.get(key)
            if t is None:
                t = truth_cache[key] = _truth(comp, n, binding, doms, interp)
            k = comp.num[id(n)]
            mask |= edge_bit(k, t)
            n = n.hi if t else n.lo
        return n.value, mask

    def agg(k):
        nonlocal rows
        if k > nv:
            rows += 1
            v, m = path()
            return v, m, ()
        results = []
        for pos in range(len(doms[k - 1])):
            binding[k] = pos
            results.append((pos, agg(k + 1)))
        if aggs[k - 1] is AVG:
            total = sum(r[0] for _, r in results)
            mask = 0
            for _, r in results:
                mask |= r[1]
            return total / len(results), mask, ()
        best = None
        for pos, (v, m, w) in results:
            w = (pos,) + w if k <= lead else ()
            if best is None or _better(v, m, w, *best):
                best = (v, m, w)
        return best

    value, mask, win = agg(1)
    value = Fraction(value)
    win = tuple(win) + (0,) * (lead - len(win))
    winner = {comp.vars[i]: Const(doms[i][p], comp.vars[i].sort) for i, p in enumerate(win)}
    return EvalResult(value, winner, mask, rows)


# ---------------------------------------------------------------------------
# variable elimination

class _Table:
    __slots__ = ("cols", "rows")

    def __init__(self, cols, rows):
        self.cols = cols  # sorted tuple of var indices
        self.rows = rows  # dict: binding tuple -> (value, mask, win)


class _VE:
    def __init__(self, f: Gfodd, interp: Interpretation):
        self.comp = _compile(f)
        self.interp = interp
        self.doms = _domains(f, interp)
        self.sizes = [len(d) for d in self.doms]
        self.memo = {}
        self.rows = 0
        self.lead = self.comp.lead
        self.y = self.comp.y

    # -- table operations ----------------------------------------------------
    def expand(self, t: _Table, cols) -> _Table:
        missing = [v for v in cols if v not in t.cols]
        if not missing:
            return t
        pos_old = {v: i for i, v in enumerate(t.cols)}
        rows = {}
        ranges = [range(self.sizes[v - 1]) for v in missing]
        mpos = {v: i for i, v in enumerate(missing)}
        for key, entry in t.rows.items():
            for combo in itertools.product(*ranges):
                nk = tuple(key[pos_old[v]] if v in pos_old else combo[mpos[v]] for v in cols)
                rows[nk] = entry
        self.rows += len(rows)
        return _Table(tuple(cols), rows)

    def aggregate(self, t: _Table, targets) -> _Table:
        targets = [v for v in t.cols if v in targets]
        if not targets:
            return t
        if self.y is not None and self.y in targets:
            t = self._agg_avg(t, self.y)
            targets.remove(self.y)
        if targets:
            t = self._agg_max(t, targets)
        return t

    def _agg_avg(self, t: _Table, v: int) -> _Table:
        i = t.cols.index(v)
        keep = t.cols[:i] + t.cols[i + 1:]
        groups: dict = {}
        for key, (val, mask, win) in t.rows.items():
            k = key[:i] + key[i + 1:]
            g = groups.get(k)
            if g is None:
                groups[k] = [val, mask, win, 1]
            else:
                g[0] += val
                g[1] |= mask
                g[3] += 1
        n = self.sizes[v - 1]
        rows = {}
        for k, (total, mask, win, cnt) in groups.items():
            if cnt != n:
                raise GfoddError("internal consistency error: incomplete AVG group")
            rows[k] = (Fraction(total) / n, mask, win)
        return _Table(keep, rows)

    def _agg_max(self, t: _Table, targets) -> _Table:
        lead = self.lead
        tpos = [(t.cols.index(v), v) for v in targets]
        for _, v in tpos:
            if v > lead:
                raise GfoddError("internal consistency error: MAX aggregation outside leading block")
        keep_idx = [i for i, v in enumerate(t.cols) if v not in targets]
        keep = tuple(t.cols[i] for i in keep_idx)
        best: dict = {}
        for key, (val, mask, win) in t.rows.items():
            w = list(win)
            for i, v in tpos:
                w[v - 1] = key[i]
            w = tuple(w)
            k = tuple(key[i] for i in keep_idx)
            b = best.get(k)
            if b is None or _better(val, mask, w, *b):
                best[k] = (val, mask, w)
        return _Table(keep, best)

    def join(self, n, branch: bool, child: _Table) -> _Table:
        comp = self.comp
        S = comp.selfv[id(n)]
        bit = edge_bit(comp.num[id(n)], branch)
        # bindings of the node's own variables on this branch
        bl = [b for b in self.bindings(n) if b[1] is branch]
        cols = tuple(sorted(set(S) | set(child.cols)))
        spos = {v: i for i, v in enumerate(S)}
        cpos = {v: i for i, v in enumerate(child.cols)}
        common = [v for v in S if v in cpos]
        index: dict = {}
        for b, _ in bl:
            index.setdefault(tuple(b[spos[v]] for v in common), []).append(b)
        src = [(True, spos[v]) if v in spos else (False, cpos[v]) for v in cols]
        rows = {}
        for ckey, (val, mask, win) in child.rows.items():
            proj = tuple(ckey[cpos[v]] for v in common)
            for b in index.get(proj, ()):
                nk = tuple(b[i] if from_s else ckey[i] for from_s, i in src)
                rows[nk] = (val, mask | bit, win)
        self.rows += len(rows)
        return _Table(cols, rows)

    def bindings(self, n):
        cache = self.memo.get(("bl", id(n)))
        if cache is not None:
            return cache
        comp = self.comp
        S = comp.selfv[id(n)]
        out = []
        binding = [0] * (comp.nvars + 1)
        for combo in itertools.product(*[range(self.sizes[v - 1]) for v in S]):
            for v, p in zip(S, combo):
                binding[v] = p
            out.append((combo, _truth(comp, n, binding, self.doms, self.interp)))
        self.memo[("bl", id(n))] = out
        return out

    def i3_targets(self, t: _Table, above, exclude=()):
        """Once the AVG variable is gone, MAX variables not above n can go."""
        if self.y is not None and (self.y in t.cols or self.y in above):
            return set()
        return {v for v in t.cols if v not in above and v not in exclude}

    # -- recursion -------------------------------------------------------------
    def eval(self, n) -> _Table:
        r = self.memo.get(id(n))
        if r is not None:
            return r
        comp = self.comp
        above = comp.above[id(n)]
        maxabove = max(above, default=0)
        if type(n) is Leaf:
            self.rows += 1
            r = _Table((), {(): (n.value, 0, (0,) * self.lead)})
        else:
            S = set(comp.selfv[id(n)])
            maxvar = max(maxabove, max(S, default=0))
            sides = []
            for branch, child in ((True, n.hi), (False, n.lo)):
                m = self.join(n, branch, self.eval(child))
                m = self.aggregate(m, {v for v in m.cols if v > maxvar})
                m = self.aggregate(m, self.i3_targets(m, above, S))
                sides.append(m)
            cols = tuple(sorted(set(sides[0].cols) | set(sides[1].cols)))
            mt, mf = (self.expand(s, cols) for s in sides)
            rows = dict(mt.rows)
            rows.update(mf.rows)
            r = _Table(cols, rows)
            r = self.aggregate(r, {v for v in cols if v > maxabove})
            r = self.aggregate(r, self.i3_targets(r, above))
        self.memo[id(n)] = r
        return r


def eval_ve(f: Gfodd, interp: Interpretation) -> EvalResult:
    """Variable-elimination evaluation; identical result to :func:`eval_brute`.

    Prefixes other than ``MAX* AVG?`` are delegated to brute force.
    """
    comp = _compile(f)
    if not comp.ve_ok:
        return eval_brute(f, interp)
    ve = _VE(f, interp)
    t = ve.eval(comp.nodes[0])
    t = ve.aggregate(t, set(t.cols))
    (value, mask, win), = t.rows.values()
    doms = ve.doms
    winner = {comp.vars[i]: Const(doms[i][p], comp.vars[i].sort) for i, p in enumerate(win)}
    return EvalResult(Fraction(value), winner, mask, ve.rows)


def evaluate(f: Gfodd, interp: Interpretation, method: str = "ve") -> EvalResult:
    if method == "ve":
        return eval_ve(f, interp)
    if method == "brute":
        return eval_brute(f, interp)
    raise ValueError(f"unknown evaluation method {method!r}")


def value(f: Gfodd, interp: Interpretation) -> Fraction:
    return eval_ve(f, interp).value


# ---------------------------------------------------------------------------
# explicit table helper (used in tests and documentation)

def aggregate_out(rows: Sequence[tuple[dict, Fraction, frozenset]], v: Var, agg: Aggregator,
                  order: Sequence[str] | None = None):
    """Aggregate variable ``v`` out of an explicit table.

    ``rows`` are ``(binding, value, edges)`` with bindings mapping variables to
    object names and edges given as ``{(node, 't'|'f')}``. Returns the table
    over the remaining variables. MAX keeps the winning row's edges (ties: the
    lexicographically smaller edge set, then the smaller binding in ``order``).
    """
    agg = Aggregator(agg)
    rank = {o: i for i, o in enumerate(order)} if order else None
    groups: dict = {}
    for binding, val, edges in rows:
        rest = tuple(sorted(((u.name, o) for u, o in binding.items() if u != v)))
        groups.setdefault(rest, []).append((binding, Fraction(val), frozenset(edges)))
    out = []
    for rest, members in groups.items():
        if agg is AVG:
            total = sum(m[1] for m in members)
            edges = frozenset().union(*(m[2] for m in members))
            out.append(({u: o for u, o in members[0][0].items() if u != v},
                        total / len(members), edges))
        else:
            def sort_key(m):
                o = m[0].get(v)
                return rank[o] if rank and o in rank else (o or "")
            best = None
            for m in members:
                if best is None:
                    best = m
                    continue
                mm, bm = edges_to_mask(m[2]), edges_to_mask(best[2])
                if m[1] > best[1] or (m[1] == best[1] and (
                        mask_less(mm, bm) or (mm == bm and sort_key(m) < sort_key(best)))):
                    best = m
            out.append(({u: o for u, o in best[0].items() if u != v}, best[1], best[2]))
    return out
