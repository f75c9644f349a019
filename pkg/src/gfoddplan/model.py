"""Relational MDP domains: action schemas, exogenous events, reward, state factors.

A domain file is one s-expression::

    (domain NAME
      (sorts (location) (shop location) ...)         ; (sort [parent])
      (objects (shop s) (truck t 1) ...)             ; naming prefix, fixed count or scaled
      (predicates (empty shop special) ...)
      (state (bool (s shop) (empty s)) ...)          ; consistent state factors
      (action NAME (params (t truck) ...)
        (variant NAME (prob EXPR) (tvd (pred u ...) EXPR) ...))
      (exogenous (param i shop) (variant ...) ...)
      (reward (gfodd ...))
      (discount 9/10))

Sorts without a count scale with the instance size ``n``. A predicate with no
TVD under a variant keeps its value (frame rule).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .diagram import AVG, Gfodd, KeyFn, Leaf, Node, OpenDiagram, a4_split, is_a4, iter_nodes, leaf, mk, rebuild
from .errors import ConstructionError, GfoddError, ModelError, ParseError
from .relational import Atom, Const, Interpretation, Predicate, Sort, Var, Vocabulary
from .serialize import (
    atom_text, expect_head, fail, gfodd_from_sexpr, open_to_text, parse_expr, parse_number,
    parse_one, parse_var_decl, to_text,
)


@dataclass(frozen=True)
class Tvd:
    """Next-state truth value of ``pred(targets)`` as a 0/1 open diagram."""
    pred: str
    targets: tuple[Var, ...]
    diagram: OpenDiagram


@dataclass(frozen=True)
class ActionVariant:
    name: str
    prob: OpenDiagram
    tvds: tuple[Tvd, ...] = ()

    def tvd(self, pred: str) -> Tvd | None:
        for t in self.tvds:
            if t.pred == pred:
                return t
        return None


@dataclass(frozen=True)
class ActionSchema:
    name: str
    params: tuple[Var, ...]
    variants: tuple[ActionVariant, ...]

    @property
    def is_deterministic(self) -> bool:
        return len(self.variants) == 1 and self.variants[0].prob.root is leaf(1)


@dataclass(frozen=True)
class ExogenousSchema:
    param: Var
    variants: tuple[ActionVariant, ...]

    @property
    def params(self):
        return (self.param,)


@dataclass(frozen=True)
class StateFactor:
    """One independent component of a consistent state.

    ``bool``: each grounding of ``atoms[0]`` is true or false.
    ``oneof``: for each grounding of ``over`` exactly one of ``atoms`` holds.
    ``func``: ``atoms[0] = p(x, l)``; for each ``x`` exactly one ``l``.
    """
    kind: str
    over: tuple[Var, ...]
    atoms: tuple[Atom, ...]


@dataclass(frozen=True)
class ObjectNaming:
    sort: str
    prefix: str
    count: int | None = None  # None: scales with the instance size


@dataclass
class DomainSpec:
    name: str
    vocab: Vocabulary
    objects: tuple[ObjectNaming, ...]
    factors: tuple[StateFactor, ...]
    schemas: tuple[ActionSchema, ...]
    exogenous: ExogenousSchema | None
    reward: Gfodd
    discount: Fraction = Fraction(9, 10)

    # -- vocabulary helpers -------------------------------------------------
    @property
    def special(self) -> set[str]:
        return {p.name for p in self.vocab.predicates if p.special}

    @property
    def static(self) -> set[str]:
        """Predicates no variant of any action or event changes."""
        changed = set()
        for v in self.all_variants():
            changed |= {t.pred for t in v.tvds}
        return {p.name for p in self.vocab.predicates} - changed

    def all_variants(self):
        for s in self.schemas:
            yield from s.variants
        if self.exogenous is not None:
            yield from self.exogenous.variants

    def schema(self, name: str) -> ActionSchema:
        for s in self.schemas:
            if s.name == name:
                return s
        raise ModelError(f"unknown action {name!r}")

    @property
    def zsort(self) -> str:
        """Sort used for the fresh variables of the max construction."""
        _, y = a4_split(self.reward) if is_a4(self.reward) else (None, None)
        if y is not None:
            return y.sort
        if self.exogenous is not None:
            return self.exogenous.param.sort
        raise ModelError("domain has no averaged sort for the max construction")

    @property
    def scaled_sorts(self) -> list[str]:
        return [o.sort for o in self.objects if o.count is None]

    # -- instances ------------------------------------------------------------
    def base_objects(self, n: int) -> dict[str, list[str]]:
        out = {}
        for o in self.objects:
            k = n if o.count is None else o.count
            out[o.sort] = [f"{o.prefix}{i + 1}" for i in range(k)]
        return out

    def interpretation(self, n: int, facts: Iterable = ()) -> Interpretation:
        return Interpretation.from_vocabulary(self.vocab, self.base_objects(n), facts)

    def _factor_choices(self, empty: Interpretation):
        """Per grounding, the list of alternative fact-sets."""
        choices = []
        for fac in self.factors:
            doms = [empty.domain(v.sort) for v in fac.over]
            for combo in itertools.product(*doms):
                theta = {v: o for v, o in zip(fac.over, combo)}
                if fac.kind == "bool":
                    a = fac.atoms[0]
                    choices.append([(), (_ground(a, theta),)])
                elif fac.kind == "oneof":
                    choices.append([(_ground(a, theta),) for a in fac.atoms])
                elif fac.kind == "func":
                    a = fac.atoms[0]
                    rng_var = a.args[-1]
                    choices.append([(_ground(a, {**theta, rng_var: o}),)
                                    for o in empty.domain(rng_var.sort)])
        return choices

    def enumerate_states(self, n: int) -> list[Interpretation]:
        """All consistent states with ``n`` objects of each scaled sort."""
        empty = self.interpretation(n)
        choices = self._factor_choices(empty)
        out = []
        for pick in itertools.product(*choices):
            out.append(empty.with_facts(f for part in pick for f in part))
        return out

    def count_states(self, n: int) -> int:
        total = 1
        for c in self._factor_choices(self.interpretation(n)):
            total *= len(c)
        return total

    def random_state(self, n: int, rng) -> Interpretation:
        """Uniform sample over consistent states (factors drawn independently)."""
        empty = self.interpretation(n)
        facts = []
        for c in self._factor_choices(empty):
            facts.extend(c[int(rng.integers(len(c)))])
        return empty.with_facts(facts)

    def is_consistent(self, s: Interpretation) -> bool:
        """Every factor grounding has exactly one of its alternatives."""
        empty = self.interpretation_like(s)
        covered = set()
        for c in self._factor_choices(empty):
            hits = [alt for alt in c if all(f in s.facts for f in alt)
                    and all(f not in s.facts for other in c if other != alt for f in other)]
            if len(hits) != 1:
                return False
            for alt in c:
                covered |= set(alt)
        return all(f in covered for f in s.facts)

    def canonical_state(self, s: Interpretation) -> Interpretation:
        """A representative of ``s`` under renaming of the scaled objects.

        Objects of each scaled sort are reordered by the facts they occur in
        and renamed in that order. Renaming objects preserves every value
        and evaluation cost, so isomorphic states can share one evaluation.
        """
        rename = {}
        for sort in self.scaled_sorts:
            objs = list(s.objects.get(sort, ()))
            sig = {o: tuple(sorted(tuple("*" if x == o else x for x in f)
                                   for f in s.facts if o in f[1:])) for o in objs}
            for new, old in zip(objs, sorted(objs, key=lambda o: sig[o])):
                rename[old] = new
        facts = [(f[0], *(rename.get(x, x) for x in f[1:])) for f in s.facts]
        return s.with_facts(facts)

    @staticmethod
    def interpretation_like(s: Interpretation) -> Interpretation:
        return s.with_facts(())

    def validate(self) -> "DomainSpec":
        """Semantic checks shared by the loader and the built-in domains."""
        names = [s.name for s in self.schemas]
        if len(set(names)) != len(names):
            raise ModelError("duplicate action names")
        if not 0 < self.discount < 1:
            raise ModelError("discount must lie in (0, 1)")
        for schema in list(self.schemas) + ([self.exogenous] if self.exogenous else []):
            if not schema.variants:
                raise ModelError("an action needs at least one variant")
            for v in schema.variants:
                for x in v.prob.leaf_values():
                    if x > 1:
                        raise ModelError(f"probability leaves must lie in [0, 1] (variant {v.name})")
                for t in v.tvds:
                    if any(x not in (0, 1) for x in t.diagram.leaf_values()):
                        raise ModelError("TVD leaves must be 0 or 1")
                    p = self.vocab.predicate(t.pred)
                    if len(t.targets) != p.arity:
                        raise ModelError(f"TVD for {t.pred} has wrong arity")
                    clash = {u.name for u in t.targets} & {x.name for x in schema.params}
                    if clash:
                        raise ModelError(f"TVD target variables clash with parameters: {sorted(clash)}")
        return self


def _ground(a: Atom, theta: Mapping[Var, str]) -> tuple:
    return (a.pred,) + tuple(theta[t] if isinstance(t, Var) else t.name for t in a.args)


# ---------------------------------------------------------------------------
# ground semantics

def eval_open(d: OpenDiagram, theta: Mapping[Var, str], s: Interpretation) -> Fraction:
    """Value of an open diagram with its free variables bound to objects."""
    n = d.root
    while type(n) is Node:
        a = n.atom
        names = [theta[t] if isinstance(t, Var) else t.name for t in a.args]
        if a.is_equality:
            t = names[0] == names[1]
        else:
            t = (a.pred, *names) in s.facts
        n = n.hi if t else n.lo
    return n.value


def apply_variant(d: DomainSpec, s: Interpretation, schema, variant: ActionVariant,
                  args: Sequence[str]) -> Interpretation:
    """Successor state under one variant; TVDs read the current state."""
    theta = dict(zip(schema.params, args))
    if not variant.tvds:
        return s
    changed = {t.pred for t in variant.tvds}
    facts = {f for f in s.facts if f[0] not in changed}
    for t in variant.tvds:
        p = d.vocab.predicate(t.pred)
        doms = [s.domain(srt) for srt in p.arg_sorts]
        for combo in itertools.product(*doms):
            th = dict(theta)
            th.update(zip(t.targets, combo))
            if eval_open(t.diagram, th, s):
                facts.add((t.pred, *combo))
    return s.with_facts(facts)


def variant_distribution(schema, args: Sequence[str], s: Interpretation):
    """``[(variant, probability)]`` for a ground action in state ``s``."""
    theta = dict(zip(schema.params, args))
    out = [(v, eval_open(v.prob, theta, s)) for v in schema.variants]
    total = sum(p for _, p in out)
    if total != 1:
        raise ModelError(f"variant probabilities of {getattr(schema, 'name', 'exogenous')} sum to {total}")
    return out


def ground_actions(d: DomainSpec, s: Interpretation) -> list[tuple[str, tuple[str, ...]]]:
    """All ground agent actions, schemas in name order, bindings lexicographic."""
    out = []
    for schema in sorted(d.schemas, key=lambda x: x.name):
        doms = [s.domain(p.sort) for p in schema.params]
        for combo in itertools.product(*doms):
            out.append((schema.name, tuple(combo)))
    return out


# ---------------------------------------------------------------------------
# assumption checking

ASSUMPTIONS = ("A1", "A2", "A3", "A4")


@dataclass
class AssumptionReport:
    status: dict[str, bool]
    problems: dict[str, list[str]] = field(default_factory=dict)

    def holds(self, name: str) -> bool:
        return self.status[name]

    @property
    def all_hold(self) -> bool:
        return all(self.status.values())

    def lines(self) -> list[str]:
        out = []
        for a in ASSUMPTIONS:
            word = "holds" if self.status[a] else "violated"
            extra = "; ".join(self.problems.get(a, []))
            out.append(f"{a}: {word}" + (f" ({extra})" if extra else ""))
        return out

    def __str__(self):
        return "\n".join(self.lines())


def _atoms_of(d: OpenDiagram):
    return [n.atom for n in iter_nodes(d.root) if type(n) is Node]


def check_assumptions(d: DomainSpec) -> AssumptionReport:
    problems = {a: [] for a in ASSUMPTIONS}
    sp = d.special
    static = d.static
    ex = d.exogenous
    # A1: object-centred exogenous events
    if ex is None:
        problems["A1"].append("no exogenous event schema")
    # A2: events touch only unary special predicates of their own object
    if ex is not None:
        i = ex.param
        for v in ex.variants:
            for a in _atoms_of(v.prob):
                if a.is_equality or (a.pred not in sp and a.pred not in static) or a.args != (i,):
                    problems["A2"].append(f"probability of {v.name} tests {a}")
            for t in v.tvds:
                if t.pred not in sp:
                    problems["A2"].append(f"{v.name} changes non-special predicate {t.pred}")
                    continue
                if not _frame_off_object(t, i):
                    problems["A2"].append(f"{v.name} changes {t.pred} of objects other than {i}")
                allowed = {i, *t.targets}
                for a in _atoms_of(t.diagram):
                    if a.is_equality:
                        continue
                    if (a.pred not in sp and a.pred not in static) or not set(a.args) <= allowed:
                        problems["A2"].append(f"{v.name} TVD for {t.pred} reads {a}")
    # A3: special predicates never gate agent actions
    for s in d.schemas:
        for v in s.variants:
            for a in _atoms_of(v.prob):
                if a.pred in sp:
                    problems["A3"].append(f"{s.name}/{v.name} probability tests {a}")
            for t in v.tvds:
                for a in _atoms_of(t.diagram):
                    if a.pred in sp and not (a.pred == t.pred and a.args == t.targets):
                        problems["A3"].append(f"{s.name}/{v.name} TVD for {t.pred} tests {a}")
    # A4: reward is max_x avg_y with special predicates only on y
    r = d.reward
    if not is_a4(r):
        problems["A4"].append("reward prefix is not MAX* AVG")
    else:
        _, y = a4_split(r)
        if y is None:
            problems["A4"].append("reward has no averaged variable")
        for a in r.atoms():
            if a.pred in sp and a.args != (y,):
                problems["A4"].append(f"reward tests {a}")
    return AssumptionReport({a: not problems[a] for a in ASSUMPTIONS},
                            {a: list(dict.fromkeys(p)) for a, p in problems.items() if p})


def _frame_off_object(t: Tvd, i: Var) -> bool:
    """On objects other than ``i`` the TVD must reduce to the frame value."""
    ci, ct = Const("#i", i.sort), [Const(f"#u{k}", u.sort) for k, u in enumerate(t.targets)]
    theta = {i: ci, **dict(zip(t.targets, ct))}
    key = KeyFn({})

    def fn(a):
        a = a.substitute(theta)
        if a.is_equality and a.is_ground:
            return a.args[0] == a.args[1]
        return a

    root = rebuild(t.diagram.root, fn, key)
    return root is mk(Atom(t.pred, ct), leaf(1), leaf(0))


# ---------------------------------------------------------------------------
# text format

def load_domain(text: str) -> DomainSpec:
    x = parse_one(text)
    try:
        return _domain_from_sexpr(x).validate()
    except (ConstructionError, ValueError) as e:
        if isinstance(e, ParseError):
            raise
        raise ModelError(str(e)) from None


def _section(x, head):
    return [p for p in x[2:] if isinstance(p, list) and p and p[0] == head]


def _domain_from_sexpr(x) -> DomainSpec:
    expect_head(x, "domain")
    if len(x) < 2 or isinstance(x[1], list):
        fail("(domain NAME ...) expected", x)
    known = {"sorts", "objects", "predicates", "state", "action", "exogenous", "reward", "discount"}
    for p in x[2:]:
        if not isinstance(p, list) or not p or p[0] not in known:
            fail("unknown domain section", p)
    # sorts
    sorts = []
    for sec in _section(x, "sorts"):
        for d in sec[1:]:
            if not isinstance(d, list) or not 1 <= len(d) <= 2:
                fail("sort declaration (NAME [PARENT]) expected", d)
            sorts.append(Sort(str(d[0]), str(d[1]) if len(d) == 2 else None))
    preds = []
    for sec in _section(x, "predicates"):
        for d in sec[1:]:
            if not isinstance(d, list) or not d:
                fail("predicate declaration expected", d)
            special = d[-1] == "special"
            args = d[1:-1] if special else d[1:]
            preds.append(Predicate(str(d[0]), tuple(str(a) for a in args), special))
    try:
        vocab = Vocabulary(sorts, preds)
    except GfoddError as e:
        fail(str(e), x)

    def sort_of(name, where_):
        if not vocab.has_sort(str(name)):
            fail(f"undeclared sort {name!r}", where_)
        return str(name)

    objects = []
    for sec in _section(x, "objects"):
        for d in sec[1:]:
            if not isinstance(d, list) or len(d) not in (2, 3):
                fail("object naming (SORT PREFIX [COUNT]) expected", d)
            count = int(parse_number(d[2])) if len(d) == 3 else None
            objects.append(ObjectNaming(sort_of(d[0], d), str(d[1]), count))

    def var_decls(ds):
        out = []
        for d in ds:
            v = parse_var_decl(d)
            sort_of(v.sort, d)
            out.append(v)
        return out

    factors = []
    for sec in _section(x, "state"):
        for d in sec[1:]:
            if not isinstance(d, list) or not d or d[0] not in ("bool", "oneof", "func"):
                fail("state factor (bool|oneof|func ...) expected", d)
            kind = str(d[0])
            if kind == "func":
                dv, rv = var_decls(d[1:3])
                a = _parse_atom_strict(d[3], {dv.name: dv, rv.name: rv}, vocab)
                factors.append(StateFactor(kind, (dv,), (a,)))
            else:
                decl = var_decls(d[1:2])
                env = {v.name: v for v in decl}
                atoms = tuple(_parse_atom_strict(a, env, vocab) for a in d[2:])
                if kind == "bool" and len(atoms) != 1:
                    fail("bool factor takes one atom", d)
                factors.append(StateFactor(kind, tuple(decl), atoms))

    def variants(block, params, owner):
        out = []
        for vd in block:
            if not (isinstance(vd, list) and vd and vd[0] == "variant"):
                fail("(variant NAME (prob EXPR) (tvd ...) ...) expected", vd)
            if len(vd) < 3:
                fail("variant needs a name and a probability", vd)
            name = str(vd[1])
            prob = None
            tvds = []
            env = {p.name: p for p in params}
            for part in vd[2:]:
                if isinstance(part, list) and part and part[0] == "prob":
                    e = parse_expr(part[1], env, vocab, strict_consts=True, bool_atoms=True)
                    prob = OpenDiagram.from_expr(params, e)
                elif isinstance(part, list) and part and part[0] == "tvd":
                    if len(part) != 3 or not isinstance(part[1], list):
                        fail("(tvd (PRED VAR ...) EXPR) expected", part)
                    pname = str(part[1][0])
                    try:
                        p = vocab.predicate(pname)
                    except GfoddError as err:
                        fail(str(err), part[1])
                    if len(part[1]) - 1 != p.arity:
                        fail(f"{pname} expects {p.arity} arguments", part[1])
                    targets = tuple(Var(str(u), s) for u, s in zip(part[1][1:], p.arg_sorts))
                    tenv = dict(env)
                    for u in targets:
                        if u.name in tenv:
                            raise ModelError(f"TVD target variable {u.name} clashes with a parameter")
                        tenv[u.name] = u
                    e = parse_expr(part[2], tenv, vocab, strict_consts=True, bool_atoms=True)
                    try:
                        diagram = OpenDiagram.from_expr(targets + tuple(params), e)
                    except ConstructionError as err:
                        fail(str(err), part)
                    if any(t.pred == pname for t in tvds):
                        fail(f"duplicate TVD for {pname}", part)
                    tvds.append(Tvd(pname, targets, diagram))
                else:
                    fail("expected (prob ...) or (tvd ...)", part)
            if prob is None:
                fail(f"variant {name} of {owner} has no probability", vd)
            out.append(ActionVariant(name, prob, tuple(tvds)))
        return tuple(out)

    schemas = []
    for sec in _section(x, "action"):
        if len(sec) < 3 or isinstance(sec[1], list):
            fail("(action NAME (params ...) (variant ...) ...) expected", sec)
        expect_head(sec[2], "params")
        params = tuple(var_decls(sec[2][1:]))
        schemas.append(ActionSchema(str(sec[1]), params, variants(sec[3:], params, sec[1])))
    exo = None
    exs = _section(x, "exogenous")
    if len(exs) > 1:
        fail("at most one exogenous block", exs[1])
    if exs:
        sec = exs[0]
        if len(sec) < 2 or not isinstance(sec[1], list) or sec[1][0] != "param" or len(sec[1]) != 3:
            fail("(exogenous (param NAME SORT) (variant ...) ...) expected", sec)
        (param,) = var_decls([sec[1][1:]])
        exo = ExogenousSchema(param, variants(sec[2:], (param,), "exogenous"))
    rs = _section(x, "reward")
    if len(rs) != 1 or len(rs[0]) != 2:
        fail("exactly one (reward (gfodd ...)) section expected", x)
    reward = gfodd_from_sexpr(rs[0][1], vocab, sort=True)
    discount = Fraction(9, 10)
    for sec in _section(x, "discount"):
        if len(sec) != 2:
            fail("(discount RATIONAL) expected", sec)
        discount = parse_number(sec[1])
    return DomainSpec(str(x[1]), vocab, tuple(objects), tuple(factors), tuple(schemas), exo,
                      reward, discount)


def _parse_atom_strict(x, env, vocab):
    from .serialize import parse_atom
    return parse_atom(x, env, vocab, strict_consts=True)


def _decl(v: Var) -> str:
    return f"({v.name} {v.sort})"


def _variant_text(v: ActionVariant, indent: str) -> str:
    lines = [f"{indent}(variant {v.name} (prob {open_to_text(v.prob)})"]
    for t in v.tvds:
        head = atom_text(Atom(t.pred, t.targets))
        lines.append(f"{indent}  (tvd {head} {open_to_text(t.diagram)})")
    lines[-1] += ")"
    return "\n".join(lines)


def save_domain(d: DomainSpec) -> str:
    out = [f"(domain {d.name}"]
    out.append("  (sorts " + " ".join(
        f"({s.name}{' ' + s.parent if s.parent else ''})" for s in d.vocab.sorts) + ")")
    out.append("  (objects " + " ".join(
        f"({o.sort} {o.prefix}{'' if o.count is None else ' ' + str(o.count)})" for o in d.objects) + ")")
    out.append("  (predicates " + " ".join(
        "(" + " ".join([p.name, *p.arg_sorts] + (["special"] if p.special else [])) + ")"
        for p in d.vocab.predicates) + ")")
    facs = []
    for f in d.factors:
        if f.kind == "func":
            a = f.atoms[0]
            facs.append(f"(func {_decl(f.over[0])} {_decl(a.args[-1])} {atom_text(a)})")
        else:
            facs.append(f"({f.kind} {_decl(f.over[0])} " + " ".join(atom_text(a) for a in f.atoms) + ")")
    out.append("  (state " + "\n         ".join(facs) + ")")
    for s in d.schemas:
        out.append(f"  (action {s.name} (params {' '.join(_decl(p) for p in s.params)})")
        out.append("\n".join(_variant_text(v, "    ") for v in s.variants) + ")")
    if d.exogenous is not None:
        out.append(f"  (exogenous (param {d.exogenous.param.name} {d.exogenous.param.sort})")
        out.append("\n".join(_variant_text(v, "    ") for v in d.exogenous.variants) + ")")
    reward = to_text(d.reward).replace("\n", "\n    ")
    out.append(f"  (reward {reward})")
    out.append(f"  (discount {d.discount}))")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# built-in domains

IC_TEXT = """\
; Inventory control: binary shop inventory, one truck, one depot.
(domain ic
  (sorts (location) (shop location) (depot location) (truck))
  (objects (shop s) (depot d 1) (truck t 1))
  (predicates (empty shop special) (tin truck location) (loaded truck))
  (state (bool (s shop) (empty s))
         (func (t truck) (l location) (tin t l))
         (bool (t truck) (loaded t)))
  (action unload (params (t truck) (s shop))
    (variant unload (prob 1)
      (tvd (empty u) (if (= u s) (if (loaded t) (if (tin t s) 0 (empty u)) (empty u)) (empty u)))
      (tvd (loaded u) (if (= u t) (if (tin t s) 0 (loaded u)) (loaded u)))))
  (action load (params (t truck) (d depot))
    (variant load (prob 1)
      (tvd (loaded u) (if (= u t) (if (tin t d) 1 (loaded u)) (loaded u)))))
  (action drive (params (t truck) (l location))
    (variant drive (prob 1)
      (tvd (tin v w) (if (= v t) (if (= w l) 1 0) (tin v w)))))
  (exogenous (param i shop)
    (variant succ (prob 2/5) (tvd (empty j) (if (= i j) 1 (empty j))))
    (variant fail (prob 3/5)))
  (reward (gfodd (agg (avg y shop)) (if (empty y) 0 1)))
  (discount 9/10))
"""

AIC_TEXT = """\
; Inventory control with three stock levels and per-shop consumption rates.
; Unloading raises a shop's level by one unless it is already full; a
; customer lowers it by one. The reward averages level/2 over shops.
(domain aic
  (sorts (location) (shop location) (depot location) (truck))
  (objects (shop s) (depot d 1) (truck t 1))
  (predicates (level0 shop special) (level1 shop special) (level2 shop special)
              (rate3 shop) (rate4 shop) (tin truck location) (loaded truck))
  (state (oneof (s shop) (level0 s) (level1 s) (level2 s))
         (func (t truck) (l location) (tin t l))
         (bool (t truck) (loaded t))
         (oneof (s shop) (rate3 s) (rate4 s)))
  (action unload (params (t truck) (s shop))
    (variant unload (prob 1)
      (tvd (level0 u)
        (if (= u s) (if (loaded t) (if (tin t s) (if (level2 s) (level0 u) 0) (level0 u)) (level0 u)) (level0 u)))
      (tvd (level1 u)
        (if (= u s) (if (loaded t) (if (tin t s) (if (level2 s) (level1 u) (level0 u)) (level1 u)) (level1 u)) (level1 u)))
      (tvd (level2 u)
        (if (= u s) (if (loaded t) (if (tin t s) (if (level2 s) (level2 u) (level1 u)) (level2 u)) (level2 u)) (level2 u)))
      (tvd (loaded u) (if (= u t) (if (tin t s) (if (level2 s) (loaded u) 0) (loaded u)) (loaded u)))))
  (action load (params (t truck) (d depot))
    (variant load (prob 1)
      (tvd (loaded u) (if (= u t) (if (tin t d) 1 (loaded u)) (loaded u)))))
  (action drive (params (t truck) (l location))
    (variant drive (prob 1)
      (tvd (tin v w) (if (= v t) (if (= w l) 1 0) (tin v w)))))
  (exogenous (param i shop)
    (variant arrive (prob (if (rate3 i) 3/10 2/5))
      (tvd (level0 j) (if (= i j) (if (level0 j) 1 (level1 j)) (level0 j)))
      (tvd (level1 j) (if (= i j) (level2 j) (level1 j)))
      (tvd (level2 j) (if (= i j) 0 (level2 j))))
    (variant none (prob (if (rate3 i) 7/10 3/5))))
  (reward (gfodd (agg (avg y shop)) (if (level1 y) 1/2 (if (level2 y) 1 0))))
  (discount 9/10))
"""

BUILTIN = {"ic": IC_TEXT, "aic": AIC_TEXT}


def builtin(name: str, discount=None) -> DomainSpec:
    try:
        text = BUILTIN[name]
    except KeyError:
        raise ValueError(f"unknown built-in domain {name!r} (choose from {sorted(BUILTIN)})") from None
    d = load_domain(text)
    if discount is not None:
        d.discount = Fraction(discount)
        d.validate()
    return d


def resolve_domain(spec: str) -> DomainSpec:
    """A built-in name or a path to a domain file."""
    if spec in BUILTIN:
        return builtin(spec)
    try:
        with open(spec, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise ModelError(f"{spec!r} is neither a built-in domain {sorted(BUILTIN)} "
                         f"nor a readable file ({e.strerror})") from None
    return load_domain(text)
