import itertools
from fractions import Fraction

import pytest

from gfoddplan import AVG, MAX, Const, If, Var, atom, build, constant, eval_ve
from gfoddplan.apply import add_shared_avg, apply_open
from gfoddplan.diagram import is_a4
from gfoddplan.errors import FormError, ResourceError
from gfoddplan.model import apply_variant
from gfoddplan.oracle import exact_backup, exogenous_expectation, tabulate
from gfoddplan.planner import backup, plan, regress, sdp1, sdp2, unify_sp_args
from gfoddplan.reduce import all_focus_states

y = Var("y", "shop")


def ground_args(schema, s):
    return itertools.product(*[s.domain(p.sort) for p in schema.params])


class TestRegress:
    def test_leaf(self, ic):
        unload = ic.schema("unload")
        c = constant(Fraction(2, 3))
        assert regress(c, unload.variants[0], unload.params, [Const("t1", "truck"), Const("s1", "shop")]) == c

    @pytest.mark.parametrize("name", ["ic", "aic"])
    def test_matches_successor_state(self, name, request):
        d = request.getfixturevalue(name)
        v = d.reward
        for schema in d.schemas:
            variant = schema.variants[0]
            for s in d.enumerate_states(2)[::7]:
                for args in ground_args(schema, s):
                    consts = [Const(o, p.sort) for o, p in zip(args, schema.params)]
                    r = regress(v, variant, schema.params, consts)
                    s2 = apply_variant(d, s, schema, variant, args)
                    assert eval_ve(r, s).value == eval_ve(v, s2).value

    def test_untouched_atoms_kept(self, ic, f_rex):
        # unload changes emptiness and the load, never the truck location
        unload = ic.schema("unload")
        consts = [Const("t1", "truck"), Const("s1", "shop")]
        r = regress(f_rex, unload.variants[0], unload.params, consts)
        tin = [a for a in r.atoms() if a.pred == "tin"]
        assert atom("tin", Var("t", "truck"), Var("s", "shop")) in tin
        assert r.prefix == f_rex.prefix


class TestSdp2:
    def test_reward(self, ic):
        w = sdp2(ic.reward, ic)
        for s in ic.enumerate_states(2):
            full = sum(("empty", o) not in s.facts for o in s.domain("shop"))
            assert eval_ve(w, s).value == Fraction(3, 5) * Fraction(full, 2)

    def test_constant(self, ic):
        c = build([(y, AVG)], Fraction(7, 4))
        assert sdp2(c, ic) == constant(Fraction(7, 4))
        assert sdp2(constant(1), ic) == constant(1)

    def test_exact_at_first_iteration(self, ic, ic_mdp2):
        w = tabulate(sdp2(ic.reward, ic), ic_mdp2)
        assert w == exogenous_expectation(ic_mdp2, ic_mdp2.reward)

    def test_form_preserved(self, ic, ic_plan):
        for v in ic_plan.values:
            w = sdp2(v, ic)
            assert is_a4(w)
            maxes = [u for u, a in v.prefix if a is MAX]
            assert [u for u, a in w.prefix if a is MAX] == [u for u in maxes if u in w.variables]

    def test_not_a4(self, ic):
        bad = build([(y, AVG), (Var("t", "truck"), MAX)],
                    If(atom("empty", y), If(atom("loaded", Var("t", "truck")), 1, 0), 0))
        with pytest.raises(FormError):
            sdp2(bad, ic)
        sdp2(bad, ic, strict=False)


class TestSdp1:
    def test_zero_gives_reward(self, ic):
        v, q = sdp1(constant(0), ic)
        assert v == ic.reward
        assert set(q) == {"drive", "load", "unload"}

    def test_q_parameters_lead(self, ic):
        _, q = sdp1(ic.reward, ic)
        for schema in ic.schemas:
            lead = [u for u, a in q[schema.name].prefix[:len(schema.params)]]
            assert [u.sort for u in lead] == [p.sort for p in schema.params]
            assert all(a is MAX for _, a in q[schema.name].prefix[:len(schema.params)])

    def test_first_backup_below_true_backup(self, ic, ic_mdp2):
        v1 = backup(ic.reward, ic).value
        bound = exact_backup(ic_mdp2, ic_mdp2.reward)
        assert all(a <= b for a, b in zip(tabulate(v1, ic_mdp2), bound))

    def test_q_max_is_value(self, ic, ic_plan):
        q = ic_plan.final_q()
        v = ic_plan.unreduced[-1]
        for s in ic.enumerate_states(2)[::3]:
            assert eval_ve(v, s).value == max(eval_ve(f, s).value for f in q.values())


class TestUnify:
    def test_rewrite(self):
        x = Var("x", "shop")
        v = build([(x, MAX), (y, AVG)], If(atom("level0", y), 0, If(atom("level1", x), 1, 0)))
        u = unify_sp_args(v, {"level0", "level1", "level2"})
        assert atom("level1", y) in u.atoms()
        assert u.variables == (y,)

    def test_fixpoint(self, aic):
        assert unify_sp_args(aic.reward, aic.special) == aic.reward

    def test_two_averages(self):
        z = Var("z", "shop")
        v = build([(z, AVG), (y, AVG)], If(atom("empty", z), If(atom("empty", y), 1, 0), 0))
        with pytest.raises(FormError):
            unify_sp_args(v, {"empty"})

    def test_restores_sdp2_precondition(self, aic, aic_plan):
        u = unify_sp_args(aic_plan.values[2], aic.special)
        yy = [v for v, a in u.prefix if a is AVG][0]
        for a in u.atoms():
            if a.pred in aic.special:
                assert a.args == (yy,)
        assert is_a4(sdp2(u, aic))


class TestPlan:
    def test_one_iteration_is_backup(self, ic):
        focus = all_focus_states(ic, 2)
        assert plan(ic, 1, focus).values[1] == backup(ic.reward, ic, focus).value

    def test_shape(self, ic_plan, ic):
        assert ic_plan.iterations == 4
        assert ic_plan.values[0] == ic.reward
        assert ic_plan.q[0] == {}
        assert [st.iteration for st in ic_plan.stats] == [1, 2, 3, 4]
        assert not ic_plan.unified

    def test_aic_unifies(self, aic_plan):
        assert aic_plan.unified and aic_plan.iterations == 4

    def test_deterministic(self, ic, ic_plan):
        again = plan(ic, 4, all_focus_states(ic, 2))
        assert again.values == ic_plan.values

    def test_budget(self, ic):
        with pytest.raises(ResourceError) as e:
            plan(ic, 3, all_focus_states(ic, 2), node_budget=20)
        assert e.value.partial.values[0] == ic.reward

    def test_iterations_positive(self, ic):
        with pytest.raises(ValueError):
            plan(ic, 0)

    def test_focus_exactness(self, ic, ic_plan):
        for i in range(1, 5):
            for s in all_focus_states(ic, 2):
                assert eval_ve(ic_plan.values[i], s).value == eval_ve(ic_plan.unreduced[i], s).value

    def test_nondecreasing_on_focus(self, ic, ic_plan):
        states = all_focus_states(ic, 2)
        tables = [tabulate(v, states) for v in ic_plan.values]
        for a, b in zip(tables, tables[1:]):
            assert all(x <= y for x, y in zip(a, b))

    def test_backup_monotone_in_input(self, ic, ic_plan):
        # a pointwise larger input never gives a pointwise smaller output
        focus = all_focus_states(ic, 2)
        for v in ic_plan.values[:3]:
            bigger = [apply_open("add", v, constant(Fraction(1, 3))), add_shared_avg(v, ic.reward)]
            base = tabulate(backup(v, ic, focus).value, focus)
            for w in bigger:
                assert all(a <= b for a, b in zip(base, tabulate(backup(w, ic, focus).value, focus)))
