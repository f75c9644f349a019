from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gfoddplan import constant
from gfoddplan.errors import ResourceError
from gfoddplan.model import apply_variant, variant_distribution
from gfoddplan.oracle import (
    build_ground, enumerate_states, exact_backup, exact_vi, ground_transition, policy_evaluation,
    q_table, size_cap, tabulate,
)
from gfoddplan.reduce import all_focus_states


def _exogenous_reversed(d, s):
    """Exogenous composition with the objects processed in reverse order."""
    ex = d.exogenous
    dist = {s: Fraction(1)}
    for obj in reversed(s.domain(ex.param.sort)):
        nxt = {}
        for st_, p in dist.items():
            for var, q in variant_distribution(ex, (obj,), st_):
                s2 = apply_variant(d, st_, ex, var, (obj,))
                nxt[s2] = nxt.get(s2, 0) + p * q
        dist = nxt
    return dist


class TestStates:
    def test_counts(self, ic, aic):
        assert len(enumerate_states(ic, 2)) == 24
        assert len(enumerate_states(ic, 3)) == 64
        assert len(enumerate_states(aic, 2)) == len(all_focus_states(aic, 2))

    def test_order_fixed(self, ic):
        assert [s.facts for s in enumerate_states(ic, 2)] == [s.facts for s in enumerate_states(ic, 2)]

    def test_no_shops(self, ic):
        with pytest.raises(ValueError):
            enumerate_states(ic, 0)


class TestTransitions:
    def test_both_stay_full(self, ic):
        s = ic.interpretation(2, [("tin", "t1", "d1")])
        dist = ground_transition(ic, s, ("drive", ("t1", "s1")))
        after = ic.interpretation(2, [("tin", "t1", "s1")])
        assert dist[after] == Fraction(9, 25)
        assert sum(dist.values()) == 1
        assert len(dist) == 4

    def test_rows_sum_to_one(self, ic_mdp2):
        for rows in ic_mdp2.transitions:
            for row in rows:
                assert sum(p for _, p in row) == 1

    def test_reward_matches_diagram(self, ic, ic_mdp2):
        assert ic_mdp2.reward == tabulate(ic.reward, ic_mdp2.states)

    @pytest.mark.parametrize("name, n", [("ic", 2), ("ic", 3), ("aic", 2)])
    def test_exogenous_order_irrelevant(self, name, n, request):
        from gfoddplan.oracle import _exogenous_stage
        d = request.getfixturevalue(name)
        for s in enumerate_states(d, n):
            assert _exogenous_stage(d, s) == _exogenous_reversed(d, s)

    def test_caps(self, ic, aic):
        assert size_cap(ic) == 6 and size_cap(aic) == 3
        with pytest.raises(ResourceError):
            build_ground(ic, 7)
        with pytest.raises(ResourceError):
            build_ground(aic, 4)


class TestBackup:
    def test_zero_gives_reward(self, ic_mdp2):
        assert exact_backup(ic_mdp2, [0] * ic_mdp2.num_states) == ic_mdp2.reward

    def test_q_table_shape(self, ic_mdp2):
        q = q_table(ic_mdp2, [Fraction(0)] * ic_mdp2.num_states)
        assert len(q) == len(ic_mdp2.actions)
        assert all(len(row) == ic_mdp2.num_states for row in q)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_monotone(self, ic_mdp2, seed):
        rng = np.random.default_rng(seed)
        v = [Fraction(int(x), 7) for x in rng.integers(0, 50, ic_mdp2.num_states)]
        w = [a + Fraction(int(x), 5) for a, x in zip(v, rng.integers(0, 5, ic_mdp2.num_states))]
        tv, tw = exact_backup(ic_mdp2, v), exact_backup(ic_mdp2, w)
        assert all(a <= b for a, b in zip(tv, tw))

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_contraction(self, ic_mdp2, seed):
        rng = np.random.default_rng(seed)
        v = [Fraction(int(x), 3) for x in rng.integers(0, 30, ic_mdp2.num_states)]
        w = [Fraction(int(x), 3) for x in rng.integers(0, 30, ic_mdp2.num_states)]
        tv, tw = exact_backup(ic_mdp2, v), exact_backup(ic_mdp2, w)
        gap = max(abs(a - b) for a, b in zip(v, w))
        assert max(abs(a - b) for a, b in zip(tv, tw)) <= ic_mdp2.discount * gap


class TestValueIteration:
    def test_bounds(self, ic_mdp2):
        r = exact_vi(ic_mdp2)
        assert r.deltas[-1] < 1e-9
        assert np.all(r.values >= 0) and np.all(r.values <= 10)

    def test_policy_evaluation_agrees(self, ic_mdp2):
        r = exact_vi(ic_mdp2)
        assert np.allclose(policy_evaluation(ic_mdp2, r.policy), r.values, atol=1e-7)

    def test_unloads_at_empty_shop(self, ic, ic_mdp2):
        s = ic.interpretation(2, [("empty", "s1"), ("tin", "t1", "s1"), ("loaded", "t1")])
        r = exact_vi(ic_mdp2)
        assert ic_mdp2.actions[r.policy[ic_mdp2.state_index(s)]] == ("unload", ("t1", "s1"))

    def test_bad_tolerance(self, ic_mdp2):
        with pytest.raises(ValueError):
            exact_vi(ic_mdp2, tolerance=0)


class TestTabulate:
    def test_reward_extremes(self, ic, f_r):
        full = ic.interpretation(2, [("tin", "t1", "d1")])
        empty = ic.interpretation(2, [("empty", "s1"), ("empty", "s2"), ("tin", "t1", "d1")])
        assert tabulate(f_r, [full, empty]) == [1, 0]

    def test_constant(self, ic_mdp2):
        assert tabulate(constant(Fraction(2, 3)), ic_mdp2) == [Fraction(2, 3)] * 24
