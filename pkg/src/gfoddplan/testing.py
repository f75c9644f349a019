"""Seeded generators of random diagrams and interpretations.

Used by the property tests and the acceptance suite; kept in the package so
demo scripts can reuse them.
"""
from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np

from .diagram import AVG, MAX, Gfodd, build
from .relational import Atom, Interpretation, Predicate, Sort, Var, Vocabulary, eq

VOCAB = Vocabulary(
    [Sort("a"), Sort("b")],
    [Predicate("p", ("a",)), Predicate("q", ("a", "b")), Predicate("r", ("b",)),
     Predicate("s", ("a", "a"))],
)

LEAVES = [Fraction(0), Fraction(1, 2), Fraction(1), Fraction(2), Fraction(3), Fraction(1, 3)]


def random_prefix(rng: np.random.Generator, max_vars: int = 2, avg: bool = True,
                  avg_sort: str | None = None):
    n = int(rng.integers(0, max_vars + 1))
    prefix = [(Var(f"x{i + 1}", str(rng.choice(["a", "b"]))), MAX) for i in range(n)]
    if avg:
        prefix.append((Var("y", avg_sort or str(rng.choice(["a", "b"]))), AVG))
    return prefix


def random_atom(rng: np.random.Generator, variables, vocab: Vocabulary = VOCAB) -> Atom:
    by_sort = {}
    for v in variables:
        by_sort.setdefault(v.sort, []).append(v)
    options = []
    for p in vocab.predicates:
        if all(s in by_sort for s in p.arg_sorts):
            options.append(p)
    eq_sorts = [s for s, vs in by_sort.items() if len(vs) >= 2]
    if eq_sorts and (not options or rng.random() < 0.2):
        s = str(rng.choice(eq_sorts))
        i, j = rng.choice(len(by_sort[s]), size=2, replace=False)
        return eq(by_sort[s][int(i)], by_sort[s][int(j)])
    p = options[int(rng.integers(len(options)))]
    args = [by_sort[s][int(rng.integers(len(by_sort[s])))] for s in p.arg_sorts]
    return Atom(p.name, args)


def random_gfodd(rng: np.random.Generator, max_nodes: int = 6, max_vars: int = 2,
                 avg: bool = True, leaves=LEAVES, avg_sort: str | None = None) -> Gfodd:
    """A random ``MAX* AVG`` diagram with at most ``max_nodes`` internal nodes."""
    while True:
        prefix = random_prefix(rng, max_vars, avg, avg_sort)
        variables = [v for v, _ in prefix]
        if not variables:
            return build(prefix, leaves[int(rng.integers(len(leaves)))])
        budget = [int(rng.integers(1, max_nodes + 1))]

        def expr(depth):
            if budget[0] <= 0 or (depth > 0 and rng.random() < 0.3):
                return leaves[int(rng.integers(len(leaves)))]
            budget[0] -= 1
            a = random_atom(rng, variables)
            return (a, expr(depth + 1), expr(depth + 1))

        g = build(prefix, expr(0), sort=True)
        if g.internal_count <= max_nodes:
            return g


def random_interpretation(rng: np.random.Generator, max_objects: int = 4,
                          vocab: Vocabulary = VOCAB, density: float = 0.5,
                          min_objects: int = 1) -> Interpretation:
    objects = {}
    for s in vocab.sorts:
        k = int(rng.integers(min_objects, max_objects + 1))
        objects[s.name] = [f"{s.name}{i + 1}" for i in range(k)]
    facts = []
    for p in vocab.predicates:
        for combo in itertools.product(*[objects[s] for s in p.arg_sorts]):
            if rng.random() < density:
                facts.append((p.name, *combo))
    return Interpretation(objects, facts, predicates=[p.name for p in vocab.predicates])
