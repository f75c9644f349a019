"""Sorted, function-free first-order vocabulary and finite interpretations."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import EmptyDomainError, VocabularyError

EQ = "="


@dataclass(frozen=True, slots=True)
class Var:
    name: str
    sort: str

    def __str__(self):
        return self.name


@dataclass(frozen=True, slots=True)
class Const:
    """A constant: a domain object or a temporary Skolem/parameter constant.

    Constants are identified by name; the sort is informative only.
    """
    name: str
    sort: str | None = field(default=None, compare=False)

    def __str__(self):
        return self.name


Term = Var | Const


@dataclass(frozen=True, slots=True)
class Sort:
    name: str
    parent: str | None = None


@dataclass(frozen=True, slots=True)
class Predicate:
    name: str
    arg_sorts: tuple[str, ...]
    special: bool = False

    @property
    def arity(self):
        return len(self.arg_sorts)


class Atom:
    """A predicate applied to terms, or an equality test (``pred == "="``)."""

    __slots__ = ("pred", "args", "_hash")

    def __init__(self, pred: str, args: Sequence[Term]):
        self.pred = pred
        self.args = tuple(args)
        self._hash = hash((pred, self.args))

    @property
    def is_equality(self):
        return self.pred == EQ

    def variables(self) -> tuple[Var, ...]:
        seen = []
        for a in self.args:
            if isinstance(a, Var) and a not in seen:
                seen.append(a)
        return tuple(seen)

    def constants(self) -> tuple[Const, ...]:
        return tuple(a for a in self.args if isinstance(a, Const))

    @property
    def is_ground(self):
        return all(isinstance(a, Const) for a in self.args)

    def substitute(self, theta: Mapping[Var, Term]) -> "Atom":
        if not theta:
            return self
        args = tuple(theta.get(a, a) if isinstance(a, Var) else a for a in self.args)
        if args == self.args:
            return self
        return Atom(self.pred, args)

    def replace_const(self, c: Const, t: Term) -> "Atom":
        args = tuple(t if a == c else a for a in self.args)
        return Atom(self.pred, args) if args != self.args else self

    def __eq__(self, other):
        return (isinstance(other, Atom) and self._hash == other._hash
                and self.pred == other.pred and self.args == other.args)

    def __hash__(self):
        return self._hash

    def __str__(self):
        if self.is_equality:
            return f"({self.args[0]} = {self.args[1]})"
        return f"{self.pred}({', '.join(map(str, self.args))})"

    __repr__ = __str__


def atom(pred: str, *args: Term) -> Atom:
    return Atom(pred, args)


def eq(left: Term, right: Term) -> Atom:
    return Atom(EQ, (left, right))


class Vocabulary:
    """Sorts (with single-parent subsorting) and predicate declarations."""

    def __init__(self, sorts: Iterable[Sort], predicates: Iterable[Predicate]):
        self.sorts = tuple(sorts)
        self.predicates = tuple(predicates)
        self._sorts = {}
        for s in self.sorts:
            if s.name in self._sorts:
                raise VocabularyError(f"duplicate sort {s.name!r}")
            self._sorts[s.name] = s
        for s in self.sorts:
            if s.parent is not None and s.parent not in self._sorts:
                raise VocabularyError(f"sort {s.name!r} has undeclared parent {s.parent!r}")
        self._preds = {}
        for p in self.predicates:
            if p.name in self._preds or p.name == EQ:
                raise VocabularyError(f"duplicate or reserved predicate {p.name!r}")
            for s in p.arg_sorts:
                if s not in self._sorts:
                    raise VocabularyError(f"predicate {p.name!r} uses undeclared sort {s!r}")
            if p.special and p.arity != 1:
                raise VocabularyError(f"special predicate {p.name!r} must be unary")
            self._preds[p.name] = p

    def predicate(self, name: str) -> Predicate:
        try:
            return self._preds[name]
        except KeyError:
            raise VocabularyError(f"undeclared predicate {name!r}") from None

    def has_sort(self, name):
        return name in self._sorts

    def is_subsort(self, sub: str, sup: str) -> bool:
        s = sub
        while s is not None:
            if s == sup:
                return True
            s = self._sorts[s].parent if s in self._sorts else None
        return False

    def compatible(self, a: str | None, b: str | None) -> bool:
        """True when objects of sort ``a`` and ``b`` may coincide."""
        if a is None or b is None or a == b:
            return True
        return self.is_subsort(a, b) or self.is_subsort(b, a)

    def check_atom(self, a: Atom):
        if a.is_equality:
            if len(a.args) != 2:
                raise VocabularyError(f"equality needs two arguments: {a}")
            l, r = (t.sort for t in a.args)
            if not self.compatible(l, r):
                raise VocabularyError(f"equality between incompatible sorts: {a}")
            return
        p = self.predicate(a.pred)
        if len(a.args) != p.arity:
            raise VocabularyError(f"{a.pred} expects {p.arity} arguments, got {len(a.args)}")
        for t, s in zip(a.args, p.arg_sorts):
            if t.sort is not None and not self.is_subsort(t.sort, s):
                raise VocabularyError(f"argument {t} of sort {t.sort} does not fit {a.pred}/{s}")

    def __eq__(self, other):
        return (isinstance(other, Vocabulary) and self.sorts == other.sorts
                and self.predicates == other.predicates)


class Interpretation:
    """A finite state: objects per sort plus the set of true ground atoms.

    ``objects`` maps each sort (including supersorts) to its ordered objects.
    Facts are stored as tuples ``(pred, obj, ...)``. The global object order is
    the order of first appearance across ``objects``.
    """

    __slots__ = ("objects", "facts", "order", "predicates", "_hash")

    def __init__(self, objects: Mapping[str, Sequence[str]], facts: Iterable = (),
                 predicates: Iterable[str] | None = None):
        self.objects = {s: tuple(objs) for s, objs in objects.items()}
        order = {}
        for objs in self.objects.values():
            for o in objs:
                order.setdefault(o, len(order))
        self.order = order
        self.predicates = frozenset(predicates) if predicates is not None else None
        fs = set()
        for f in facts:
            if isinstance(f, Atom):
                if f.is_equality:
                    raise VocabularyError("equality atoms are not stored as facts")
                f = (f.pred,) + tuple(a.name for a in f.args)
            else:
                f = tuple(f)
            for o in f[1:]:
                if o not in order:
                    raise VocabularyError(f"fact {f} mentions undeclared object {o!r}")
            if self.predicates is not None and f[0] not in self.predicates:
                raise VocabularyError(f"undeclared predicate {f[0]!r}")
            fs.add(f)
        self.facts = frozenset(fs)
        self._hash = hash((tuple(sorted(self.objects.items())), self.facts))

    @classmethod
    def from_vocabulary(cls, vocab: Vocabulary, base_objects: Mapping[str, Sequence[str]],
                        facts: Iterable = ()):
        """Fill in supersort object lists from per-sort objects, in sort declaration order."""
        objects = {s.name: [] for s in vocab.sorts}
        for s in vocab.sorts:
            for o in base_objects.get(s.name, ()):
                sort = s.name
                while sort is not None:
                    if o not in objects[sort]:
                        objects[sort].append(o)
                    sort = vocab._sorts[sort].parent
        return cls(objects, facts, predicates=[p.name for p in vocab.predicates])

    def with_facts(self, facts) -> "Interpretation":
        new = Interpretation.__new__(Interpretation)
        new.objects = self.objects
        new.order = self.order
        new.predicates = self.predicates
        new.facts = frozenset(facts)
        new._hash = hash((tuple(sorted(self.objects.items())), new.facts))
        return new

    def domain(self, sort: str) -> tuple[str, ...]:
        objs = self.objects.get(sort, ())
        if not objs:
            raise EmptyDomainError(f"sort {sort!r} has no objects")
        return objs

    def _obj(self, t) -> str:
        name = t.name if isinstance(t, Const) else t
        if isinstance(t, Var):
            raise VocabularyError(f"atom is not ground: variable {t}")
        if name not in self.order:
            raise VocabularyError(f"undeclared object {name!r}")
        return name

    def holds(self, a: Atom) -> bool:
        if a.is_equality:
            return self._obj(a.args[0]) == self._obj(a.args[1])
        if self.predicates is not None and a.pred not in self.predicates:
            raise VocabularyError(f"undeclared predicate {a.pred!r}")
        return (a.pred,) + tuple(self._obj(t) for t in a.args) in self.facts

    def __eq__(self, other):
        return (isinstance(other, Interpretation) and self._hash == other._hash
                and self.facts == other.facts and self.objects == other.objects)

    def __hash__(self):
        return self._hash

    def __repr__(self):
        facts = " ".join("(" + " ".join(f) + ")" for f in sorted(self.facts))
        return f"Interpretation({facts})"


def holds(interp: Interpretation, a: Atom) -> bool:
    return interp.holds(a)


def enumerate_bindings(variables: Sequence[Var], interp: Interpretation) -> list[dict[Var, Const]]:
    """All substitutions of ``variables`` to objects, lexicographic in object order."""
    domains = [interp.domain(v.sort) for v in variables]
    return [{v: Const(o, v.sort) for v, o in zip(variables, combo)}
            for combo in itertools.product(*domains)]


def apply_substitution(a: Atom, theta: Mapping[Var, Term], vocab: Vocabulary | None = None) -> Atom:
    for v, t in theta.items():
        ok = vocab.compatible(t.sort, v.sort) if vocab else (t.sort is None or t.sort == v.sort)
        if not ok:
            raise VocabularyError(f"cannot substitute {t} ({t.sort}) for {v} ({v.sort})")
    return a.substitute(theta)
