"""End-to-end acceptance checks, one per criterion.

Each test records a one-line verdict; the lines are printed together at the
end of the pytest run (and immediately with ``-s``). Run this file directly
to execute just the suite.
"""
import inspect
import time
from fractions import Fraction

import numpy as np
import pytest

from conftest import ACCEPTANCE
from gfoddplan import AVG, If, Interpretation, Var, atom, build, constant, eval_brute, eval_ve, from_text, to_text
from gfoddplan.apply import apply_open, max_expr
from gfoddplan.evaluate import count_substitutions
from gfoddplan.model import check_assumptions
from gfoddplan.oracle import (
    build_ground, exact_backup, exact_vi, exogenous_expectation, policy_evaluation,
    sequential_exogenous, tabulate,
)
from gfoddplan.planner import plan, sdp2
from gfoddplan.reduce import all_focus_states, reduce_on
from gfoddplan.simulate import GreedyPolicy, RandomPolicy, TabularPolicy, evaluate_policy
from gfoddplan.testing import random_gfodd, random_interpretation


def record(k, title, ok, detail):
    ACCEPTANCE[k] = (title, bool(ok), detail)
    print(f"\n[{'PASS' if ok else 'FAIL'}] {k:2d}. {title}: {detail}")
    assert ok, detail


def pointwise_le(a, b, tol=0):
    return all(x <= y + tol for x, y in zip(a, b))


@pytest.fixture(scope="module")
def chain(ic):
    """IC at two shops: the plan, its tables, and the converged optimum (with timings)."""
    t0 = time.perf_counter()
    mdp = build_ground(ic, 2)
    result = plan(ic, 4, mdp.states)
    tables = [tabulate(v, mdp) for v in result.values]
    vi = exact_vi(mdp, 1e-9)
    return mdp, result, tables, vi, time.perf_counter() - t0


def test_01_evaluator_equivalence():
    t0 = time.perf_counter()
    mismatches = 0
    for seed in range(500):
        rng = np.random.default_rng([1, seed])
        f = random_gfodd(rng, max_nodes=6, max_vars=2)
        interp = random_interpretation(rng, max_objects=4)
        b, v = eval_brute(f, interp), eval_ve(f, interp)
        if (b.value, b.winner, b.edge_mask) != (v.value, v.winner, v.edge_mask):
            mismatches += 1
    dt = time.perf_counter() - t0
    record(1, "evaluator equivalence", mismatches == 0 and dt < 60,
           f"{mismatches} mismatches in 500 random cases, {dt:.1f}s (limit 60s)")


def test_02_lower_bound_chain(chain):
    mdp, result, tables, vi, dt = chain
    problems = []
    for i in range(4):
        if not pointwise_le(tables[i], tables[i + 1]):
            problems.append(f"V_{i} > V_{i + 1}")
        if not pointwise_le(tables[i + 1], exact_backup(mdp, tables[i])):
            problems.append(f"V_{i + 1} > T[V_{i}]")
    gap = max(float(x) - y for x, y in zip(tables[4], vi.values))
    if gap > 1e-6:
        problems.append(f"V_4 exceeds V* by {gap:.2e}")
    record(2, "lower-bound chain", not problems and dt < 120,
           f"{'; '.join(problems) or 'V_i <= V_i+1 <= T[V_i] for i = 0..3 on 24 states'}, "
           f"max(V_4 - V*) = {gap:.3f}, {dt:.1f}s (limit 120s)")


def test_03_exogenous_step_exact_at_start(ic, ic_mdp2):
    lifted = tabulate(sdp2(ic.reward, ic), ic_mdp2)
    truth = exogenous_expectation(ic_mdp2, ic_mdp2.reward)
    dev = sum(a != b for a, b in zip(lifted, truth))
    record(3, "exogenous step exact on the reward", dev == 0, f"{dev} of 24 states deviate")


def test_04_sequential_form(chain, ic):
    mdp, result, _, _, _ = chain
    bad = []
    for i, v in enumerate(result.values):
        lifted = tabulate(sdp2(v, ic), mdp)
        sequential = tabulate(sequential_exogenous(v, ic, ["s1", "s2"]), mdp)
        if lifted != sequential:
            bad.append(i)
    record(4, "sequential per-shop regression", not bad,
           f"lifted and sequential forms agree exactly on 24 states for V_0..V_4"
           if not bad else f"disagree for V_i with i in {bad}")


def test_05_reduction_exactness(chain, ic):
    mdp, result, _, _, _ = chain
    rng = np.random.default_rng(5)
    others = [ic.random_state(int(rng.integers(3, 5)), rng) for _ in range(100)]
    focus_bad = lower_bad = 0
    for i in range(1, 5):
        full = result.unreduced[i]
        reduced = reduce_on(full, mdp.states)
        focus_bad += sum(eval_ve(reduced, s).value != eval_ve(full, s).value for s in mdp.states)
        lower_bad += sum(eval_ve(reduced, s).value > eval_ve(full, s).value for s in others)
    record(5, "reduction exactness", focus_bad == 0 and lower_bad == 0,
           f"{focus_bad} focus-state changes, {lower_bad} increases on 100 random 3-4 shop states")


def test_06_max_with_average():
    y = Var("y", "a")
    interp = Interpretation({"a": ["a1", "a2", "a3"]}, [("p", "a1"), ("s", "a2", "a2")], predicates=["p", "s"])
    avg123 = build([(y, AVG)], If(atom("p", y), 1, If(atom("s", y, y), 2, 3)))
    added = eval_brute(apply_open("add", constant(2), avg123), interp).value
    maxed = eval_brute(max_expr(constant(2), avg123, "a"), interp).value
    record(6, "max with average", added == 4 and maxed == 2, f"2 + avg{{1,2,3}} = {added}, max = {maxed}")


def test_07_policy_quality(ic):
    t0 = time.perf_counter()
    result = plan(ic, 4, all_focus_states(ic, 2))
    mdp = build_ground(ic, 4)
    optimal = TabularPolicy(mdp, exact_vi(mdp, 1e-9).policy)
    kw = dict(instances=15, runs=30, horizon=30, discount=Fraction(9, 10), seed=0)
    g = evaluate_policy(ic, GreedyPolicy.from_plan(ic, result), 4, **kw).mean
    o = evaluate_policy(ic, optimal, 4, **kw).mean
    r = evaluate_policy(ic, RandomPolicy(ic), 4, **kw).mean
    dt = time.perf_counter() - t0
    record(7, "policy quality", g >= 0.9 * o and g >= 1.5 * r and dt < 300,
           f"greedy {g:.4f}, optimal {o:.4f} (ratio {g / o:.3f}), random {r:.4f} "
           f"(ratio {g / r:.3f}), {dt:.1f}s (limit 300s)")


def test_08_greedy_value_bound(chain, ic):
    mdp, result, tables, _, _ = chain
    greedy = GreedyPolicy.from_plan(ic, result)
    policy = [mdp.actions.index(greedy.act(s)) for s in mdp.states]
    value = policy_evaluation(mdp, policy)
    margin = min(x - float(v) for x, v in zip(value, tables[4]))
    record(8, "greedy value bound", margin >= -1e-6,
           f"min over 24 states of value(greedy) - V_4 = {margin:.4f}")


def test_09_size_independence(ic):
    params = set(inspect.signature(plan).parameters)
    sized = params & {"n", "shops", "size", "n_shops", "objects"}
    result = plan(ic, 4, all_focus_states(ic, 2))
    text = to_text(result.values[4])
    v4 = from_text(text, ic.vocab)
    rng = np.random.default_rng(9)
    values = []
    for n in range(2, 11):
        s = ic.random_state(n, rng)
        values.append(eval_ve(v4, s).value)
    ok = not sized and to_text(v4) == text and all(0 <= x <= 10 for x in values)
    record(9, "size independence", ok,
           f"plan takes {sorted(params)}; V_4 evaluated on 2..10 shops "
           f"({', '.join(f'{float(x):.3f}' for x in values)}); text unchanged")


def test_10_assumption_violating_domain(aic):
    a3 = check_assumptions(aic).holds("A3")
    result = plan(aic, 4, all_focus_states(aic, 2))
    kw = dict(instances=15, runs=30, horizon=30, seed=0)
    g = evaluate_policy(aic, GreedyPolicy.from_plan(aic, result), 4, **kw).mean
    r = evaluate_policy(aic, RandomPolicy(aic), 4, **kw).mean
    record(10, "AIC extension", not a3 and result.unified and result.iterations == 4 and g > r,
           f"A3 {'holds' if a3 else 'violated'}, planned 4 iterations with unification, "
           f"greedy {g:.4f} vs random {r:.4f}")


def test_11_ve_efficiency(ic):
    v4 = plan(ic, 4, all_focus_states(ic, 2)).values[4]
    states = ic.enumerate_states(8)
    orbits = {}
    for s in states:
        orbits.setdefault(ic.canonical_state(s).facts, []).append(s)
    # evaluation cost and value are invariant under renaming objects, so one
    # evaluation per orbit stands for all its members (spot-checked below)
    t0 = time.perf_counter()
    rows, seconds = {}, {}
    for key, members in orbits.items():
        t = time.perf_counter()
        r = eval_ve(v4, members[0])
        seconds[key] = time.perf_counter() - t
        rows[key] = (r.rows, r.value)
    ve_reps = time.perf_counter() - t0
    rng = np.random.default_rng(11)
    spot = [states[int(i)] for i in rng.choice(len(states), 8, replace=False)]
    invariant = all((eval_ve(v4, s).rows, eval_ve(v4, s).value) == rows[ic.canonical_state(s).facts]
                    for s in spot)
    brute_counts = {k: count_substitutions(v4, m[0]) for k, m in orbits.items()}
    fewer = sum(len(m) for k, m in orbits.items() if rows[k][0] < brute_counts[k])
    share = fewer / len(states)
    # brute-force cost per substitution, measured on a two-shop state
    small = ic.enumerate_states(2)[5]
    t = time.perf_counter()
    eval_brute(v4, small)
    per_sub = (time.perf_counter() - t) / count_substitutions(v4, small)
    ve_batch = sum(len(m) * seconds[k] for k, m in orbits.items())
    brute_batch = per_sub * sum(len(m) * brute_counts[k] for k, m in orbits.items())
    record(11, "VE efficiency", share >= 0.99 and invariant,
           f"VE rows < brute substitutions on {100 * share:.1f}% of {len(states)} states "
           f"({len(orbits)} orbits, max VE rows {max(r for r, _ in rows.values())}, "
           f"brute {min(brute_counts.values()):.3g} each); batch time VE {ve_batch:.0f}s "
           f"(extrapolated from {ve_reps:.1f}s on orbit representatives) vs brute estimated "
           f"{brute_batch:.3g}s")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v", "-s"]))
