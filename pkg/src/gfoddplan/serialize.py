"""Text formats: s-expressions, diagrams, states, and DOT export.

Diagram text::

    (gfodd (agg (max t truck) (avg s shop))
      (if (empty s) (if (tin t s) 1/10 0) 1))

Shared sub-diagrams may be named once and referenced with ``@k``::

    (gfodd (agg (avg y shop)) (shared (@3 (if (empty y) 0 1))) (if (p y) @3 @3))

Symbols bound in ``agg`` are variables; every other symbol is a constant.
"""
from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable

from .diagram import Aggregator, Gfodd, Leaf, Node, OpenDiagram, build, iter_nodes, leaf, mk, topological
from .errors import ConstructionError, ParseError
from .relational import EQ, Atom, Const, Interpretation, Var, Vocabulary


class Symbol(str):
    """Token with source position."""

    line: int = 0
    column: int = 0


class SList(list):
    line: int = 0
    column: int = 0


_TOKEN = re.compile(r"\s+|;[^\n]*|\(|\)|[^\s()]+")


def parse_sexprs(text: str) -> list:
    """Parse all top-level s-expressions. Atoms are :class:`Symbol` strings."""
    stack = [SList()]
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        tok = m.group(0)
        if tok == "(":
            lst = SList()
            lst.line, lst.column = line, col
            stack.append(lst)
        elif tok == ")":
            if len(stack) == 1:
                raise ParseError("unbalanced ')'", line, col)
            done = stack.pop()
            stack[-1].append(done)
        elif not tok[0].isspace() and tok[0] != ";":
            s = Symbol(tok)
            s.line, s.column = line, col
            stack[-1].append(s)
        nl = tok.count("\n")
        if nl:
            line += nl
            col = len(tok) - tok.rfind("\n")
        else:
            col += len(tok)
        pos = m.end()
    if len(stack) != 1:
        lst = stack[-1]
        raise ParseError("unclosed '('", lst.line, lst.column)
    return list(stack[0])


def parse_one(text: str):
    exprs = parse_sexprs(text)
    if len(exprs) != 1:
        raise ParseError(f"expected one expression, found {len(exprs)}", 1, 1)
    return exprs[0]


def where(x):
    return getattr(x, "line", None), getattr(x, "column", None)


def fail(msg, x):
    raise ParseError(msg, *where(x))


def expect_head(x, head):
    if not isinstance(x, list) or not x or x[0] != head:
        fail(f"expected ({head} ...)", x)


def parse_number(x) -> Fraction:
    try:
        return Fraction(str(x))
    except (ValueError, ZeroDivisionError):
        fail(f"expected a rational number, got {x!r}", x)


def is_number(x) -> bool:
    return isinstance(x, str) and re.fullmatch(r"-?\d+(/\d+)?|-?\d*\.\d+", x) is not None


# ---------------------------------------------------------------------------
# terms, atoms, expressions

def parse_atom(x, variables: dict, vocab: Vocabulary | None = None, strict_consts=False) -> Atom:
    if not isinstance(x, list) or not x or isinstance(x[0], list):
        fail("expected an atom", x)
    pred = str(x[0])
    sorts = None
    if vocab is not None and pred != EQ:
        try:
            p = vocab.predicate(pred)
        except Exception as e:
            fail(str(e), x)
        if len(x) - 1 != p.arity:
            fail(f"{pred} expects {p.arity} arguments", x)
        sorts = p.arg_sorts
    if pred == EQ and len(x) != 3:
        fail("equality takes two arguments", x)
    args = []
    for i, t in enumerate(x[1:]):
        if isinstance(t, list):
            fail("function terms are not supported", t)
        if t in variables:
            args.append(variables[t])
        else:
            if strict_consts:
                fail(f"unknown symbol {t!r} (not a declared variable)", t)
            args.append(Const(str(t), sorts[i] if sorts else None))
    if pred == EQ:
        # give constants the sort of the other side
        l, r = args
        if isinstance(l, Const) and l.sort is None and r.sort:
            args[0] = Const(l.name, r.sort)
        if isinstance(r, Const) and r.sort is None and l.sort:
            args[1] = Const(r.name, l.sort)
    a = Atom(pred, args)
    if vocab is not None:
        try:
            vocab.check_atom(a)
        except Exception as e:
            fail(str(e), x)
    return a


def parse_expr(x, variables, vocab=None, shared=None, strict_consts=False, bool_atoms=False):
    """Nested if-expression to ``(atom, then, else)`` tuples.

    With ``bool_atoms`` a bare atom in value position means ``(if atom 1 0)``.
    """
    shared = shared or {}
    if isinstance(x, str):
        if x.startswith("@"):
            if x not in shared:
                fail(f"undefined shared node {x}", x)
            return shared[x]
        if not is_number(x):
            fail(f"expected a number or (if ...), got {x!r}", x)
        v = parse_number(x)
        if v < 0:
            fail("leaf values must be nonnegative", x)
        return v
    if not x:
        fail("empty expression", x)
    if x[0] == "if":
        if len(x) != 4:
            fail("(if ATOM THEN ELSE) expected", x)
        a = parse_atom(x[1], variables, vocab, strict_consts)
        return (a,
                parse_expr(x[2], variables, vocab, shared, strict_consts, bool_atoms),
                parse_expr(x[3], variables, vocab, shared, strict_consts, bool_atoms))
    if bool_atoms:
        return (parse_atom(x, variables, vocab, strict_consts), Fraction(1), Fraction(0))
    fail(f"unexpected form {x[0]!r}", x)


def parse_var_decl(x, head=None) -> Var:
    if not isinstance(x, list) or len(x) != 2 or any(isinstance(e, list) for e in x):
        fail("expected (name sort)", x)
    return Var(str(x[0]), str(x[1]))


def gfodd_from_sexpr(x, vocab: Vocabulary | None = None, *, sort: bool = False) -> Gfodd:
    expect_head(x, "gfodd")
    if len(x) < 3:
        fail("(gfodd (agg ...) BODY) expected", x)
    agg = x[1]
    expect_head(agg, "agg")
    prefix = []
    variables = {}
    for d in agg[1:]:
        if not isinstance(d, list) or len(d) != 3:
            fail("aggregation entry must be (max|avg NAME SORT)", d)
        kw = str(d[0])
        if kw not in ("max", "avg"):
            fail(f"unknown aggregator {kw!r}", d[0])
        if vocab is not None and not vocab.has_sort(str(d[2])):
            fail(f"undeclared sort {d[2]!r}", d[2])
        v = Var(str(d[1]), str(d[2]))
        if v.name in variables:
            fail(f"duplicate variable {v.name}", d[1])
        variables[v.name] = v
        prefix.append((v, Aggregator(kw)))
    rest = list(x[2:])
    shared = {}
    pfx = tuple(prefix)
    if len(rest) == 2:
        expect_head(rest[0], "shared")
        for d in rest[0][1:]:
            if not isinstance(d, list) or len(d) != 2 or not str(d[0]).startswith("@"):
                fail("shared entry must be (@k EXPR)", d)
            e = parse_expr(d[1], variables, vocab, shared)
            shared[str(d[0])] = _root_of(pfx, e, sort, d)
        rest = rest[1:]
    if len(rest) != 1:
        fail("(gfodd (agg ...) [(shared ...)] BODY) expected", x)
    e = parse_expr(rest[0], variables, vocab, shared)
    try:
        return build(pfx, e, sort=sort)
    except ConstructionError as err:
        fail(str(err), rest[0])


def _root_of(prefix, e, sort, where_):
    try:
        return build(prefix, e, sort=sort).root
    except ConstructionError as err:
        fail(str(err), where_)


def from_text(text: str, vocab: Vocabulary | None = None, *, sort: bool = False) -> Gfodd:
    return gfodd_from_sexpr(parse_one(text), vocab, sort=sort)


def _body_text(root, names: dict, top=False) -> str:
    if type(root) is Leaf:
        return str(root.value)
    if not top and id(root) in names:
        return names[id(root)]
    a = atom_text(root.atom)
    return f"(if {a} {_body_text(root.hi, names)} {_body_text(root.lo, names)})"


def atom_text(a: Atom) -> str:
    return "(" + " ".join([a.pred] + [t.name for t in a.args]) + ")"


def to_text(f: Gfodd) -> str:
    agg = " ".join(f"({a.value} {v.name} {v.sort})" for v, a in f.prefix)
    order = topological(f.root)
    number = {id(n): i for i, n in enumerate(order, start=1)}
    indeg: dict = {}
    for n in order:
        if type(n) is Node:
            for c in (n.hi, n.lo):
                indeg[id(c)] = indeg.get(id(c), 0) + 1
    names = {id(n): f"@{number[id(n)]}" for n in order
             if type(n) is Node and indeg.get(id(n), 0) > 1}
    head = f"(gfodd (agg{(' ' + agg) if agg else ''})"
    if not names:
        return f"{head}\n  {_body_text(f.root, names)})"
    defs = [f"    ({names[id(n)]} {_body_text(n, names, top=True)})"
            for n in reversed(order) if id(n) in names]
    return f"{head}\n  (shared\n" + "\n".join(defs) + f")\n  {_body_text(f.root, names)})"


def open_to_text(d: OpenDiagram) -> str:
    return _body_text(d.root, {})


# ---------------------------------------------------------------------------
# DOT

def to_dot(f: Gfodd, name: str = "gfodd") -> str:
    """Graphviz export; the true branch is drawn on the left (solid edge)."""
    agg = ", ".join(f"{a.value} {v.name}" for v, a in f.prefix) or "(no aggregation)"
    lines = [f"digraph {name} {{", "  ordering=out;", f'  label="{agg}";', "  labelloc=t;"]
    nodes = f.nodes
    num = {id(n): i for i, n in enumerate(nodes, start=1)}
    for i, n in enumerate(nodes, start=1):
        if type(n) is Leaf:
            lines.append(f'  n{i} [shape=box, label="{n.value}"];')
        else:
            lines.append(f'  n{i} [shape=ellipse, label="{i}: {n.atom}"];')
    for i, n in enumerate(nodes, start=1):
        if type(n) is Node:
            lines.append(f'  n{i} -> n{num[id(n.hi)]} [label="t"];')
            lines.append(f'  n{i} -> n{num[id(n.lo)]} [label="f", style=dashed];')
    lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# states and focus sets

def state_from_sexpr(x, vocab: Vocabulary | None = None) -> Interpretation:
    expect_head(x, "state")
    objects, facts = {}, []
    for part in x[1:]:
        if isinstance(part, list) and part and part[0] == "objects":
            for d in part[1:]:
                if not isinstance(d, list) or not d:
                    fail("(SORT obj ...) expected", d)
                objects[str(d[0])] = [str(o) for o in d[1:]]
        elif isinstance(part, list) and part and part[0] == "facts":
            for f in part[1:]:
                if not isinstance(f, list) or not f or any(isinstance(e, list) for e in f):
                    fail("ground atom expected", f)
                facts.append(tuple(str(e) for e in f))
        else:
            fail("expected (objects ...) or (facts ...)", part)
    try:
        if vocab is not None:
            return Interpretation.from_vocabulary(vocab, objects, facts)
        return Interpretation(objects, facts)
    except Exception as e:
        fail(str(e), x)


def state_to_text(s: Interpretation, sorts: Iterable[str] | None = None) -> str:
    sorts = list(sorts) if sorts is not None else list(s.objects)
    objs = " ".join("(" + " ".join([srt, *s.objects[srt]]) + ")" for srt in sorts if s.objects.get(srt))
    facts = " ".join("(" + " ".join(f) + ")" for f in sorted(s.facts, key=lambda f: (f[0], [s.order[o] for o in f[1:]])))
    return f"(state (objects {objs}) (facts {facts}))"


def focus_from_text(text: str, vocab: Vocabulary | None = None) -> list[Interpretation]:
    exprs = parse_sexprs(text)
    if len(exprs) == 1 and isinstance(exprs[0], list) and exprs[0] and exprs[0][0] == "focus":
        exprs = exprs[0][1:]
    return [state_from_sexpr(e, vocab) for e in exprs]


def focus_to_text(states, sorts=None) -> str:
    return "(focus\n" + "\n".join("  " + state_to_text(s, sorts) for s in states) + ")\n"


def state_from_text(text: str, vocab: Vocabulary | None = None) -> Interpretation:
    return state_from_sexpr(parse_one(text), vocab)


__all__ = [
    "parse_sexprs", "parse_one", "from_text", "to_text", "to_dot", "state_from_text",
    "state_to_text", "focus_from_text", "focus_to_text", "gfodd_from_sexpr", "parse_expr",
    "parse_atom", "atom_text", "open_to_text", "leaf", "mk", "iter_nodes",
]
