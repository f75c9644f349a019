"""Binary operations on closed diagrams.

``apply_open`` combines the DAG portions of two diagrams whose prefixes the
caller has already arranged. ``add_shared_avg`` and ``max_expr`` implement
the two combinations the planner needs for ``MAX* AVG`` diagrams: addition
that shares the averaged variable, and maximisation through an equality
node on two fresh variables.
"""
from __future__ import annotations

from fractions import Fraction

from .diagram import (
    AVG, MAX, Aggregator, Gfodd, KeyFn, Leaf, a4_split, apply_nodes, as_fraction, constant,
    fresh_name, ite_atom, is_sorted, map_leaves, normalize, prefix_index, rebuild, rename,
)
from .errors import FormError
from .relational import Var, eq

OPS = ("add", "multiply", "max", "min")


def _merge_prefix(f: Gfodd, g: Gfodd):
    names = {v.name: v for v in f.variables}
    out = list(f.prefix)
    for v, a in g.prefix:
        if v.name in names:
            if names[v.name] != v:
                raise FormError(f"variable {v.name} has different sorts in the two operands")
            if f.aggregator(v) is not a:
                raise FormError(f"shared variable {v.name} has different aggregators")
            continue
        out.append((v, a))
    return tuple(out)


def resort(root, key: KeyFn):
    """Re-sort ``root`` under ``key`` if needed."""
    return root if is_sorted(root, key) else rebuild(root, lambda a: a, key)


def apply_open(op: str, f: Gfodd, g: Gfodd) -> Gfodd:
    """Pointwise ``op`` of the two DAGs; the prefix is f's followed by g's unshared variables.

    Variables with the same name are treated as the same variable.
    """
    if op not in OPS:
        raise ValueError(f"unknown operation {op!r}")
    prefix = _merge_prefix(f, g)
    key = KeyFn(prefix_index(prefix))
    fr, gr = resort(f.root, key), resort(g.root, key)
    root = apply_nodes(op, fr, gr, key)
    return normalize(Gfodd(prefix, root, validate=False))


def scale(f: Gfodd, c) -> Gfodd:
    c = as_fraction(c)
    if c < 0:
        raise ValueError(f"scale factor must be nonnegative, got {c}")
    if c == 1:
        return f
    return normalize(Gfodd(f.prefix, map_leaves(f.root, lambda v: v * c), validate=False))


def _taken_names(*fs) -> set[str]:
    out = set()
    for f in fs:
        out |= {v.name for v in f.variables}
        out |= {c.name for c in f.constants()}
    return out


def add_shared_avg(f: Gfodd, g: Gfodd) -> Gfodd:
    """``f ⊕ g`` for ``max_x avg_y`` diagrams: MAX parts apart, AVG variable shared.

    Either argument may lack the AVG variable (a ``MAX*`` diagram).
    """
    fx, fy = a4_split(f)
    gx, gy = a4_split(g)
    taken = _taken_names(f, g)
    mapping = {}
    if fy is not None and gy is not None:
        if fy.sort != gy.sort:
            raise FormError(f"averaged variables range over different sorts: {fy.sort}, {gy.sort}")
        mapping[gy] = fy
    fnames = {v.name for v in f.variables}
    for v in gx:
        if v.name in fnames:
            new = Var(fresh_name(v.name, taken), v.sort)
            taken.add(new.name)
            mapping[v] = new
    if fy is None and gy is not None and gy.name in fnames:
        new = Var(fresh_name(gy.name, taken), gy.sort)
        taken.add(new.name)
        mapping[gy] = new
    g2 = rename(g, mapping)
    g2x, g2y = a4_split(g2)
    y = fy if fy is not None else g2y
    prefix = tuple((v, MAX) for v in fx) + tuple((v, MAX) for v in g2x)
    if y is not None:
        prefix += ((y, AVG),)
    key = KeyFn(prefix_index(prefix))
    root = apply_nodes("add", resort(f.root, key), resort(g2.root, key), key)
    return normalize(Gfodd(prefix, root, validate=False))


def _min_max_leaf(f: Gfodd):
    vals = f.leaf_values()
    return vals[0], vals[-1]


def max_expr(f: Gfodd, g: Gfodd, zsort: str | None = None) -> Gfodd:
    """``max(f, g)`` for ``max_x avg_y`` diagrams via an equality node ``z1 = z2``.

    The result is correct on interpretations with at least two objects of the
    ``z`` sort (``zsort``, defaulting to the sort of the averaged variable).
    Before building the equality node, the cheap cases are settled directly:
    ``g`` identically zero, equal operands, or leaf ranges that make one
    operand dominate everywhere.
    """
    fx, fy = a4_split(f)
    gx, gy = a4_split(g)
    if f == g:
        return f
    fmin, fmax = _min_max_leaf(f)
    gmin, gmax = _min_max_leaf(g)
    if fmin >= gmax:
        return f
    if gmin >= fmax:
        return g
    if fy is not None and gy is not None and fy.sort != gy.sort:
        raise FormError(f"averaged variables range over different sorts: {fy.sort}, {gy.sort}")
    if zsort is None:
        ys = fy or gy
        if ys is None:
            raise FormError("max_expr needs a sort for the fresh z variables")
        zsort = ys.sort
    taken = _taken_names(f, g)
    # share g's MAX variables with f's where name and sort agree (the branches
    # of the equality node are exclusive, so sharing is sound), then the AVG variable
    mapping = {}
    free = {u.name: u for u in fx}
    used_names = {v.name for v in f.variables}
    for v in gx:
        match = free.pop(v.name, None)
        if match is not None and match.sort == v.sort:
            mapping[v] = match
        else:
            new = Var(fresh_name(v.name, taken | used_names), v.sort)
            taken.add(new.name)
            used_names.add(new.name)
            mapping[v] = new
    y = fy
    if gy is not None:
        if fy is not None:
            mapping[gy] = fy
        elif gy.name in used_names:
            y = Var(fresh_name(gy.name, taken | used_names), gy.sort)
            mapping[gy] = y
        else:
            y = gy
    g2 = _rename_simultaneous(g, mapping)
    z1 = Var(fresh_name("z1", taken | used_names), zsort)
    z2 = Var(fresh_name("z2", taken | used_names | {z1.name}), zsort)
    xs = list(fx) + [mapping[v] for v in gx if mapping[v] not in fx]
    prefix = ((z1, MAX), (z2, MAX)) + tuple((v, MAX) for v in xs)
    if y is not None:
        prefix += ((y, AVG),)
    key = KeyFn(prefix_index(prefix))
    fr, gr = resort(f.root, key), resort(g2.root, key)
    # pointwise dominance under the alignment settles the max without z1, z2
    top = apply_nodes("max", fr, gr, key)
    if top is fr:
        return f
    if top is gr:
        return normalize(Gfodd(prefix[2:], gr, validate=False))
    root = ite_atom(eq(z1, z2), fr, gr, key, {})
    return normalize(Gfodd(prefix, root, validate=False))


def _leading_max(f: Gfodd) -> list[Var]:
    out = []
    for v, a in f.prefix:
        if a is not MAX:
            break
        out.append(v)
    return out


def eliminate_selectors(f: Gfodd) -> Gfodd:
    """Drop ``z1 = z2`` selector tests whose branches are pointwise ordered.

    A pair of leading MAX variables that occurs only in the atom ``z1 = z2``
    makes the diagram the max of its two restrictions. When one restriction
    dominates the other pointwise, that restriction alone has the same value
    (on interpretations with at least two objects of the pair's sort).
    """
    while True:
        lead = set(_leading_max(f))
        uses: dict = {}
        for a in f.atoms():
            for t in set(a.args):
                if isinstance(t, Var):
                    uses.setdefault(t, set()).add(a)
        changed = False
        for a in f.atoms():
            if not a.is_equality:
                continue
            z1, z2 = a.args
            if not (isinstance(z1, Var) and isinstance(z2, Var)) or z1 == z2:
                continue
            if z1 not in lead or z2 not in lead or uses[z1] != {a} or uses[z2] != {a}:
                continue
            key = f.key
            hi = rebuild(f.root, lambda b: True if b == a else b, key)
            lo = rebuild(f.root, lambda b: False if b == a else b, key)
            top = apply_nodes("max", hi, lo, key)
            if top is hi or top is lo:
                f = normalize(Gfodd(f.prefix, top, validate=False))
                changed = True
                break
        if not changed:
            return f


def _rename_simultaneous(g: Gfodd, mapping) -> Gfodd:
    """Rename with a mapping that may permute names (applied in one pass)."""
    if not mapping:
        return g
    prefix = tuple((mapping.get(v, v), a) for v, a in g.prefix)
    out = Gfodd(prefix, g.root, validate=False)
    out.root = rebuild(g.root, lambda a: a.substitute(mapping), out.key)
    return out


def max_all(diagrams, zsort: str | None = None) -> Gfodd:
    """Left fold of :func:`max_expr`."""
    it = iter(diagrams)
    acc = next(it)
    for d in it:
        acc = max_expr(acc, d, zsort)
    return acc


__all__ = ["apply_open", "add_shared_avg", "scale", "max_expr", "max_all", "eliminate_selectors",
           "resort", "constant"]
