from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gfoddplan import AVG, MAX, Const, If, Interpretation, Var, atom, build, eval_brute, eval_ve, evaluate, make
from gfoddplan.errors import EmptyDomainError
from gfoddplan.evaluate import aggregate_out, count_substitutions, edges_to_mask, mask_less, mask_to_edges
from gfoddplan.testing import random_gfodd, random_interpretation


class TestSpecExamples:
    def test_f_r(self, f_r, i2):
        for ev in (eval_brute, eval_ve):
            r = ev(f_r, i2)
            assert r.value == Fraction(1, 2)
            assert r.edges == {(1, "t"), (1, "f")}
            assert r.winner == {}

    def test_f_rex(self, f_rex, i2):
        b, v = eval_brute(f_rex, i2), eval_ve(f_rex, i2)
        assert b.value == Fraction(1, 2)
        assert b.winner == {Var("t", "truck"): Const("t1", "truck")}
        assert v.same_as(b)

    def test_twenty_seven_substitutions(self):
        interp = Interpretation({"a": ["a1", "a2", "a3"]}, [("p", "a1")], predicates=["p", "s"])
        x1, x2, y = Var("x1", "a"), Var("x2", "a"), Var("y", "a")
        f = build([(x1, MAX), (x2, MAX), (y, AVG)],
                  If(atom("p", y), 3, If(atom("s", x1, x2), 1, 2)))
        assert count_substitutions(f, interp) == 27
        # every (x1, x2) block averages the values 3, 2, 2
        r = eval_brute(f, interp)
        assert r.value == Fraction(7, 3)
        assert eval_ve(f, interp).same_as(r)

    def test_method_switch(self, f_rex, i2):
        assert evaluate(f_rex, i2, "brute").same_as(evaluate(f_rex, i2, "ve"))
        with pytest.raises(ValueError):
            evaluate(f_rex, i2, "sample")


class TestAggregateOut:
    y = Var("y", "shop")

    def test_average(self):
        rows = [({self.y: "s1"}, 0, {(1, "t")}), ({self.y: "s2"}, 1, {(1, "f")})]
        [(binding, val, edges)] = aggregate_out(rows, self.y, AVG)
        assert binding == {} and val == Fraction(1, 2) and edges == {(1, "t"), (1, "f")}

    def test_block_average(self):
        rows = [({self.y: f"s{i}"}, v, set()) for i, v in enumerate([3, 2, 2])]
        assert aggregate_out(rows, self.y, AVG)[0][1] == Fraction(7, 3)

    def test_max_tie_takes_smaller_edge_set(self):
        long = {(1, "t"), (2, "f"), (3, "t"), (3, "f")}
        short = {(1, "f"), (3, "t"), (3, "f")}
        rows = [({self.y: "s1"}, 2, long), ({self.y: "s2"}, 2, short)]
        [(_, val, edges)] = aggregate_out(rows, self.y, MAX)
        assert val == 2 and edges == short

    def test_max_tie_on_binding(self):
        rows = [({self.y: "s2"}, 1, {(1, "t")}), ({self.y: "s1"}, 1, {(1, "t")})]
        assert aggregate_out(rows, self.y, MAX, order=["s1", "s2"])[0][0] == {}

    @pytest.mark.parametrize("agg", [AVG, MAX])
    def test_single_row(self, agg):
        rows = [({self.y: "s1"}, Fraction(3, 4), {(2, "t")})]
        assert aggregate_out(rows, self.y, agg) == [({}, Fraction(3, 4), frozenset({(2, "t")}))]

    def test_groups_by_other_columns(self):
        x = Var("x", "truck")
        rows = [({x: "t1", self.y: "s1"}, 0, set()), ({x: "t1", self.y: "s2"}, 1, set()),
                ({x: "t2", self.y: "s1"}, 1, set()), ({x: "t2", self.y: "s2"}, 1, set())]
        out = {b[x]: v for b, v, _ in aggregate_out(rows, self.y, AVG)}
        assert out == {"t1": Fraction(1, 2), "t2": 1}


class TestEdgeMasks:
    def test_roundtrip(self):
        edges = {(1, "t"), (3, "f"), (4, "t")}
        assert mask_to_edges(edges_to_mask(edges)) == edges

    def test_lexicographic(self):
        a = edges_to_mask({(1, "f"), (3, "t"), (3, "f")})
        b = edges_to_mask({(1, "t"), (2, "f"), (3, "t"), (3, "f")})
        assert mask_less(a, b) and not mask_less(b, a)


class TestErrorsAndPurity:
    def test_empty_sort(self, f_r):
        interp = Interpretation({"shop": [], "truck": ["t1"]}, predicates=["empty"])
        for ev in (eval_brute, eval_ve):
            with pytest.raises(EmptyDomainError):
                ev(f_r, interp)

    def test_no_mutation(self, f_rex, i2):
        facts, root = i2.facts, f_rex.root
        eval_ve(f_rex, i2)
        eval_brute(f_rex, i2)
        assert i2.facts == facts and f_rex.root is root

    def test_constant(self, i2):
        f = build([], Fraction(5, 2))
        assert eval_ve(f, i2).value == Fraction(5, 2)
        assert eval_ve(f, i2).edges == frozenset()

    def test_ve_counts_fewer_rows(self):
        # x1 and x2 are independent given y, so VE never tabulates them jointly
        interp = Interpretation({"a": [f"a{i}" for i in range(6)]}, [("p", "a1"), ("s", "a2", "a3")],
                                predicates=["p", "s"])
        x1, x2, y = Var("x1", "a"), Var("x2", "a"), Var("y", "a")
        f = build([(x1, MAX), (x2, MAX), (y, AVG)],
                  If(atom("p", x1), If(atom("p", y), 2, 1), If(atom("s", x2, y), 1, 0)))
        r = eval_ve(f, interp)
        assert r.same_as(eval_brute(f, interp))
        assert r.rows < count_substitutions(f, interp)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_ve_matches_brute(seed):
    rng = np.random.default_rng(seed)
    f = random_gfodd(rng)
    interp = random_interpretation(rng)
    b, v = eval_brute(f, interp), eval_ve(f, interp)
    assert (v.value, v.winner, v.edge_mask) == (b.value, b.winner, b.edge_mask)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_non_a4_prefix_routes_to_brute(seed):
    rng = np.random.default_rng(seed)
    f = random_gfodd(rng)
    # move the averaged variable to the front
    if f.prefix and f.prefix[-1][1] is AVG and len(f.prefix) > 1:
        f = make((f.prefix[-1],) + f.prefix[:-1], f.root)
    interp = random_interpretation(rng)
    assert eval_ve(f, interp).same_as(eval_brute(f, interp))
