"""GFODD data structure: aggregation prefix plus an ordered, hash-consed DAG.

Nodes are interned: two structurally identical sub-diagrams are the same
Python object, so isomorphic subgraphs are always shared and ``hi is lo``
tests are never materialised. The node store is independent of any atom
order; a :class:`Gfodd` pairs a root with a prefix, and the prefix fixes the
order (variables are compared by prefix position).
"""
from __future__ import annotations

import enum
import weakref
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from .errors import ConstructionError, FormError
from .relational import EQ, Atom, Const, Term, Var


class Aggregator(enum.Enum):
    MAX = "max"
    AVG = "avg"

    def __str__(self):
        return self.value


MAX = Aggregator.MAX
AVG = Aggregator.AVG


class Leaf:
    __slots__ = ("value", "__weakref__")

    def __repr__(self):
        return f"Leaf({self.value})"


class Node:
    __slots__ = ("atom", "hi", "lo", "__weakref__")

    def __repr__(self):
        return f"Node({self.atom})"


_leaves: "weakref.WeakValueDictionary[Fraction, Leaf]" = weakref.WeakValueDictionary()
_nodes: "weakref.WeakValueDictionary[tuple, Node]" = weakref.WeakValueDictionary()


def as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(value).limit_denominator(10**9)
    return Fraction(value)


def leaf(value) -> Leaf:
    v = as_fraction(value)
    if v < 0:
        raise ValueError(f"leaf values must be nonnegative, got {v}")
    n = _leaves.get(v)
    if n is None:
        n = Leaf()
        n.value = v
        _leaves[v] = n
    return n


def mk(a: Atom, hi, lo):
    """Interned internal node; collapses redundant tests."""
    if hi is lo:
        return hi
    key = (a, hi, lo)
    n = _nodes.get(key)
    if n is None:
        n = Node()
        n.atom, n.hi, n.lo = a, hi, lo
        _nodes[key] = n
    return n


ZERO = leaf(0)
ONE = leaf(1)


# ---------------------------------------------------------------------------
# atom order

def term_key(t: Term, index: Mapping[Var, int]):
    if isinstance(t, Const):
        return (0, t.name)
    try:
        return (1, index[t])
    except KeyError:
        raise ConstructionError(f"variable {t} is not in the aggregation prefix") from None


def atom_key(a: Atom, index: Mapping[Var, int]):
    """Total order on atoms: equality atoms first, then predicate name, then
    arguments (constants by name before variables by prefix position)."""
    return (0 if a.is_equality else 1, a.pred, tuple(term_key(t, index) for t in a.args))


def atom_order(a: Atom, b: Atom, prefix) -> int:
    index = prefix_index(prefix)
    ka, kb = atom_key(a, index), atom_key(b, index)
    return (ka > kb) - (ka < kb)


def prefix_index(prefix) -> dict[Var, int]:
    return {v: i for i, (v, _) in enumerate(prefix, start=1)}


class KeyFn:
    """Memoised atom key for one prefix."""

    __slots__ = ("index", "cache")

    def __init__(self, index):
        self.index = index
        self.cache = {}

    def __call__(self, a: Atom):
        k = self.cache.get(a)
        if k is None:
            k = self.cache[a] = atom_key(a, self.index)
        return k


# ---------------------------------------------------------------------------
# node algorithms (order given by a key function)

def _cof(n, top):
    if type(n) is Node and n.atom == top:
        return n.hi, n.lo
    return n, n


def canon_atom(a: Atom, key: KeyFn):
    """Orient equality atoms; decide trivial equalities (returns True/Atom)."""
    if a.is_equality:
        l, r = a.args
        if l == r:
            return True
        if key(Atom(EQ, (r, l))) < key(a):
            return Atom(EQ, (r, l))
    return a


def ite_atom(a: Atom, h, l, key: KeyFn, memo: dict):
    """Diagram for ``if a then h else l`` with h, l sorted under ``key``."""
    if h is l:
        return h
    mkey = (a, id(h), id(l))
    r = memo.get(mkey)
    if r is not None:
        return r
    top, ktop = a, key(a)
    if type(h) is Node:
        kh = key(h.atom)
        if kh < ktop:
            top, ktop = h.atom, kh
    if type(l) is Node:
        kl = key(l.atom)
        if kl < ktop:
            top, ktop = l.atom, kl
    if top == a:
        hi = h.hi if type(h) is Node and h.atom == a else h
        lo = l.lo if type(l) is Node and l.atom == a else l
        r = mk(a, hi, lo)
    else:
        hT, hF = _cof(h, top)
        lT, lF = _cof(l, top)
        r = mk(top, ite_atom(a, hT, lT, key, memo), ite_atom(a, hF, lF, key, memo))
    memo[mkey] = r
    return r


def ite_diagram(c, h, l, key: KeyFn, memo: dict):
    """``if c then h else l`` where ``c`` has 0/1 leaves; all sorted under ``key``."""
    if type(c) is Leaf:
        return h if c.value else l
    if h is l:
        return h
    mkey = (id(c), id(h), id(l))
    r = memo.get(mkey)
    if r is not None:
        return r
    top, ktop = c.atom, key(c.atom)
    for n in (h, l):
        if type(n) is Node:
            k = key(n.atom)
            if k < ktop:
                top, ktop = n.atom, k
    cT, cF = _cof(c, top)
    hT, hF = _cof(h, top)
    lT, lF = _cof(l, top)
    r = mk(top, ite_diagram(cT, hT, lT, key, memo), ite_diagram(cF, hF, lF, key, memo))
    memo[mkey] = r
    return r


def rebuild(root, atom_fn: Callable[[Atom], object], key: KeyFn):
    """Map every atom through ``atom_fn`` and re-sort under ``key``.

    ``atom_fn`` may return an Atom or a bool (the test is then decided).
    """
    memo: dict = {}
    ite_memo: dict = {}

    def go(n):
        if type(n) is Leaf:
            return n
        r = memo.get(id(n))
        if r is not None:
            return r
        hi, lo = go(n.hi), go(n.lo)
        a = atom_fn(n.atom)
        if a is not True and a is not False:
            a = canon_atom(a, key)
        if a is True:
            r = hi
        elif a is False:
            r = lo
        else:
            r = ite_atom(a, hi, lo, key, ite_memo)
        memo[id(n)] = r
        return r

    return _run_deep(go, root)


def apply_nodes(op: str, f, g, key: KeyFn, memo: dict | None = None):
    """Pairwise descent over two diagrams sorted under ``key``."""
    memo = {} if memo is None else memo
    opf = _OPS[op]

    def go(f, g):
        tf, tg = type(f) is Leaf, type(g) is Leaf
        if tf and tg:
            return leaf(opf(f.value, g.value))
        if op == "multiply":
            if (tf and f.value == 0) or (tg and g.value == 0):
                return ZERO
            if tf and f.value == 1:
                return g
            if tg and g.value == 1:
                return f
        elif op == "add":
            if tf and f.value == 0:
                return g
            if tg and g.value == 0:
                return f
        elif op == "max" and f is g:
            return f
        mkey = (id(f), id(g))
        r = memo.get(mkey)
        if r is not None:
            return r
        if tf:
            top = g.atom
        elif tg:
            top = f.atom
        else:
            top = f.atom if key(f.atom) <= key(g.atom) else g.atom
        fT, fF = _cof(f, top)
        gT, gF = _cof(g, top)
        r = mk(top, go(fT, gT), go(fF, gF))
        memo[mkey] = r
        return r

    return _run_deep(go, f, g)


def map_leaves(root, fn):
    memo: dict = {}

    def go(n):
        if type(n) is Leaf:
            return leaf(fn(n.value))
        r = memo.get(id(n))
        if r is None:
            r = memo[id(n)] = mk(n.atom, go(n.hi), go(n.lo))
        return r

    return go(root)


_OPS = {
    "add": lambda a, b: a + b,
    "multiply": lambda a, b: a * b,
    "max": max,
    "min": min,
}


def _run_deep(fn, *args):
    import sys
    limit = sys.getrecursionlimit()
    if limit < 20000:
        sys.setrecursionlimit(20000)
    return fn(*args)


def iter_nodes(root):
    """Distinct nodes reachable from root (any order)."""
    seen = {}
    stack = [root]
    while stack:
        n = stack.pop()
        if id(n) in seen:
            continue
        seen[id(n)] = n
        if type(n) is Node:
            stack.append(n.hi)
            stack.append(n.lo)
    return list(seen.values())


def topological(root) -> list:
    """Reverse DFS postorder (true child explored last, hence numbered first)."""
    post, seen = [], set()
    stack = [(root, False)]
    while stack:
        n, done = stack.pop()
        if done:
            post.append(n)
            continue
        if id(n) in seen:
            continue
        seen.add(id(n))
        stack.append((n, True))
        if type(n) is Node:
            # popped in order lo, then hi
            stack.append((n.hi, False))
            stack.append((n.lo, False))
    post.reverse()
    return post


def is_sorted(root, key: KeyFn) -> bool:
    for n in iter_nodes(root):
        if type(n) is Node:
            k = key(n.atom)
            for c in (n.hi, n.lo):
                if type(c) is Node and not k < key(c.atom):
                    return False
    return True


# ---------------------------------------------------------------------------
# Gfodd

Prefix = tuple  # tuple[tuple[Var, Aggregator], ...]


class Gfodd:
    """Closed expression ``agg_x1 ... agg_xn  f(x)`` with f given as a DAG.

    Immutable. Construct through :func:`make` (re-sorts) or :func:`build`
    (strict). The plain constructor validates and raises on order violations.
    """

    __slots__ = ("prefix", "root", "_key", "_numbering", "_hash")

    def __init__(self, prefix: Iterable, root, *, validate: bool = True):
        self.prefix = tuple((v, Aggregator(a)) for v, a in prefix)
        self.root = root
        self._key = None
        self._numbering = None
        self._hash = None
        if validate:
            self._validate()

    # -- structure ----------------------------------------------------------
    @property
    def variables(self) -> tuple[Var, ...]:
        return tuple(v for v, _ in self.prefix)

    @property
    def index(self) -> dict[Var, int]:
        return self.key.index

    @property
    def key(self) -> KeyFn:
        if self._key is None:
            self._key = KeyFn(prefix_index(self.prefix))
        return self._key

    def _validate(self):
        names = [v.name for v, _ in self.prefix]
        if len(set(names)) != len(names):
            raise ConstructionError(f"duplicate prefix variables: {names}")
        key = self.key
        for n in iter_nodes(self.root):
            if type(n) is Node:
                for t in n.atom.args:
                    if isinstance(t, Var) and t not in key.index:
                        raise ConstructionError(f"variable {t} in {n.atom} is not in the prefix")
        if not is_sorted(self.root, key):
            raise ConstructionError("atom order violated along a path")

    @property
    def nodes(self) -> list:
        """Nodes in topological order; node id = position + 1 (root is 1)."""
        return self._numbered()[0]

    @property
    def node_ids(self) -> dict[int, int]:
        """Map ``id(node) -> node number``."""
        return self._numbered()[1]

    def _numbered(self):
        if self._numbering is None:
            order = topological(self.root)
            self._numbering = (order, {id(n): i for i, n in enumerate(order, start=1)})
        return self._numbering

    @property
    def size(self) -> int:
        return len(self.nodes)

    @property
    def internal_count(self) -> int:
        return sum(1 for n in self.nodes if type(n) is Node)

    def atoms(self) -> list[Atom]:
        out = []
        for n in self.nodes:
            if type(n) is Node and n.atom not in out:
                out.append(n.atom)
        return out

    def used_variables(self) -> set[Var]:
        return {t for a in self.atoms() for t in a.args if isinstance(t, Var)}

    def constants(self) -> list[Const]:
        out = []
        for a in self.atoms():
            for c in a.constants():
                if c not in out:
                    out.append(c)
        return out

    def leaf_values(self) -> list[Fraction]:
        return sorted({n.value for n in self.nodes if type(n) is Leaf})

    def edges(self) -> list[tuple[int, str]]:
        out = []
        for i, n in enumerate(self.nodes, start=1):
            if type(n) is Node:
                out.append((i, "f"))
                out.append((i, "t"))
        return out

    def aggregator(self, v: Var) -> Aggregator:
        for u, a in self.prefix:
            if u == v:
                return a
        raise KeyError(v)

    @property
    def is_constant(self) -> bool:
        return type(self.root) is Leaf

    def __eq__(self, other):
        return isinstance(other, Gfodd) and self.prefix == other.prefix and self.root is other.root

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.prefix, id(self.root)))
        return self._hash

    def __repr__(self):
        from .serialize import to_text
        return to_text(self)


def make(prefix, root) -> Gfodd:
    """Gfodd from a possibly unsorted root; re-sorts under the prefix order."""
    prefix = tuple((v, Aggregator(a)) for v, a in prefix)
    g = Gfodd(prefix, root, validate=False)
    key = g.key
    for n in iter_nodes(root):
        if type(n) is Node:
            for t in n.atom.args:
                if isinstance(t, Var) and t not in key.index:
                    raise ConstructionError(f"variable {t} in {n.atom} is not in the prefix")
    if not is_sorted(root, key):
        g.root = rebuild(root, lambda a: a, key)
    names = [v.name for v, _ in prefix]
    if len(set(names)) != len(names):
        raise ConstructionError(f"duplicate prefix variables: {names}")
    return g


def constant(value) -> Gfodd:
    return Gfodd((), leaf(value))


# ---------------------------------------------------------------------------
# expression building

def build(prefix, expr, *, sort: bool = False) -> Gfodd:
    """Build a Gfodd from nested ``(atom, then, else)`` tuples and leaf numbers.

    With ``sort=False`` the expression must already respect the atom order
    (otherwise :class:`ConstructionError`); ``sort=True`` re-sorts it.
    """
    prefix = tuple((v, Aggregator(a)) for v, a in prefix)
    key = KeyFn(prefix_index(prefix))
    memo: dict = {}

    def go(e):
        if isinstance(e, (Leaf, Node)):
            return e
        if isinstance(e, (int, Fraction, str, float)):
            return leaf(as_fraction(e))
        if not (isinstance(e, tuple) and len(e) == 3 and isinstance(e[0], Atom)):
            raise ConstructionError(f"bad expression: {e!r}")
        a, t, f = e
        for v in a.variables():
            if v not in key.index:
                raise ConstructionError(f"variable {v} in {a} is not in the prefix")
        hi, lo = go(t), go(f)
        ca = canon_atom(a, key)
        if ca is True:
            return hi
        if sort:
            return ite_atom(ca, hi, lo, key, memo)
        for c in (hi, lo):
            if type(c) is Node and not key(ca) < key(c.atom):
                raise ConstructionError(f"atom order violated: {ca} above {c.atom}")
        return mk(ca, hi, lo)

    root = _run_deep(go, expr)
    return Gfodd(prefix, root)


def If(a: Atom, then, other):
    """Expression helper: ``If(atom, then, else)``."""
    return (a, then, other)


# ---------------------------------------------------------------------------
# canonicalisation and variable manipulation

def normalize(f: Gfodd) -> Gfodd:
    """Re-sort, share, and drop prefix variables that no atom mentions."""
    root = f.root
    if not is_sorted(root, f.key):
        root = rebuild(root, lambda a: a, f.key)
    used = {t for n in iter_nodes(root) if type(n) is Node for t in n.atom.args if isinstance(t, Var)}
    prefix = tuple((v, a) for v, a in f.prefix if v in used)
    if prefix == f.prefix and root is f.root:
        return f
    return Gfodd(prefix, root, validate=False)


def fresh_name(base: str, taken) -> str:
    if base not in taken:
        return base
    stem = base.split("_")[0] if "_" in base and base.rsplit("_", 1)[1].isdigit() else base
    k = 1
    while f"{stem}_{k}" in taken:
        k += 1
    return f"{stem}_{k}"


def rename(f: Gfodd, mapping: Mapping[Var, Var]) -> Gfodd:
    """Rename prefix variables (positions unchanged)."""
    if not mapping:
        return f
    prefix = tuple((mapping.get(v, v), a) for v, a in f.prefix)
    g = Gfodd(prefix, f.root, validate=False)
    g.root = rebuild(f.root, lambda a: a.substitute(mapping), g.key)
    return g


def standardize_apart(f: Gfodd, g: Gfodd, keep: Iterable[Var] = ()) -> tuple[Gfodd, Gfodd]:
    """Rename ``g``'s prefix variables so they are disjoint from ``f``'s.

    Variables listed in ``keep`` are left shared.
    """
    keep = set(keep)
    taken = {v.name for v in f.variables} | {v.name for v in g.variables}
    taken |= {c.name for c in f.constants()} | {c.name for c in g.constants()}
    fnames = {v.name for v in f.variables}
    mapping = {}
    for v in g.variables:
        if v in keep or v.name not in fnames:
            continue
        new = fresh_name(v.name, taken)
        taken.add(new)
        mapping[v] = Var(new, v.sort)
    return f, rename(g, mapping)


def bind_variable(f: Gfodd, v: Var, c: Const) -> Gfodd:
    """Remove ``v`` from the prefix and replace it by constant ``c``."""
    if v not in f.variables:
        raise ValueError(f"{v} is not in the prefix")
    if c.sort is not None and c.sort != v.sort:
        raise ValueError(f"sort mismatch binding {v}:{v.sort} to {c}:{c.sort}")
    prefix = tuple((u, a) for u, a in f.prefix if u != v)
    g = Gfodd(prefix, f.root, validate=False)
    g.root = rebuild(f.root, lambda a: a.substitute({v: c}), g.key)
    return g


def lift_constant(f: Gfodd, c: Const, v: Var, agg: Aggregator, position: int | None = None) -> Gfodd:
    """Replace constant ``c`` by a new variable ``v`` aggregated with ``agg``.

    ``position`` is a 0-based prefix slot (``None`` appends at the tail).
    """
    if any(u.name == v.name for u in f.variables):
        raise ValueError(f"variable {v} is already used")
    if c not in f.constants():
        raise ValueError(f"constant {c} does not occur in the diagram")
    prefix = list(f.prefix)
    prefix.insert(len(prefix) if position is None else position, (v, Aggregator(agg)))
    g = Gfodd(tuple(prefix), f.root, validate=False)
    g.root = rebuild(f.root, lambda a: a.replace_const(c, v), g.key)
    return g


def substitute_root(f: Gfodd, theta: Mapping[Var, Term]):
    return rebuild(f.root, lambda a: a.substitute(theta), f.key)


# ---------------------------------------------------------------------------
# prefix shape helpers

def a4_split(f: Gfodd) -> tuple[list[Var], Var | None]:
    """Split a ``MAX* AVG?`` prefix into (max variables, avg variable)."""
    xs, y = [], None
    for v, a in f.prefix:
        if a is MAX:
            if y is not None:
                raise FormError("MAX variable after the AVG variable")
            xs.append(v)
        else:
            if y is not None:
                raise FormError("more than one AVG variable")
            y = v
    return xs, y


def is_a4(f: Gfodd) -> bool:
    try:
        a4_split(f)
    except FormError:
        return False
    return True


# ---------------------------------------------------------------------------
# open expressions (TVDs, probability diagrams)

class OpenDiagram:
    """An aggregation-free expression over declared free variables."""

    __slots__ = ("variables", "root")

    def __init__(self, variables: Sequence[Var], root):
        self.variables = tuple(variables)
        self.root = root
        for n in iter_nodes(root):
            if type(n) is Node:
                for t in n.atom.args:
                    if isinstance(t, Var) and t not in self.variables:
                        raise ConstructionError(f"open diagram mentions undeclared variable {t}")

    @classmethod
    def from_expr(cls, variables, expr):
        g = build(tuple((v, MAX) for v in variables), expr, sort=True)
        return cls(variables, g.root)

    @property
    def key(self) -> KeyFn:
        return KeyFn(prefix_index([(v, MAX) for v in self.variables]))

    def leaf_values(self):
        return sorted({n.value for n in iter_nodes(self.root) if type(n) is Leaf})

    def atoms(self):
        out = []
        for n in topological(self.root):
            if type(n) is Node and n.atom not in out:
                out.append(n.atom)
        return out

    def instantiate(self, theta: Mapping[Var, Term], key: KeyFn):
        """Substitute free variables and re-sort under ``key``."""
        return rebuild(self.root, lambda a: a.substitute(theta), key)

    def __eq__(self, other):
        return (isinstance(other, OpenDiagram) and self.variables == other.variables
                and self.root is other.root)

    def __hash__(self):
        return hash((self.variables, id(self.root)))
