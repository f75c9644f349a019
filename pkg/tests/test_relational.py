import pytest

from gfoddplan import Const, Interpretation, Var, atom, eq
from gfoddplan.errors import EmptyDomainError, VocabularyError
from gfoddplan.relational import apply_substitution, enumerate_bindings, holds


class TestHolds:
    def test_fact_present(self, i2):
        assert holds(i2, atom("empty", Const("s1")))

    def test_fact_absent(self, i2):
        assert not holds(i2, atom("tin", Const("t1"), Const("s1")))

    def test_equality_is_structural(self, i2):
        assert holds(i2, eq(Const("s1"), Const("s1")))
        assert not holds(i2, eq(Const("s1"), Const("s2")))

    def test_undeclared_object(self, i2):
        with pytest.raises(VocabularyError):
            holds(i2, atom("empty", Const("s9")))

    def test_undeclared_predicate(self, i2):
        with pytest.raises(VocabularyError):
            i2.with_facts([]).__class__(i2.objects, [("full", "s1")], predicates=["empty"])

    def test_does_not_mutate(self, i2):
        before = i2.facts
        holds(i2, atom("loaded", Const("t1")))
        assert i2.facts == before


class TestBindings:
    def test_three_cubed(self):
        interp = Interpretation({"o": ["a", "b", "c"]})
        xs = [Var(f"x{i}", "o") for i in range(3)]
        assert len(enumerate_bindings(xs, interp)) == 27

    def test_single_sort_order(self, i2):
        y = Var("y", "shop")
        assert [b[y].name for b in enumerate_bindings([y], i2)] == ["s1", "s2"]

    def test_no_variables(self, i2):
        assert enumerate_bindings([], i2) == [{}]

    def test_lexicographic_and_stable(self, i2):
        t, s = Var("t", "truck"), Var("s", "shop")
        first = enumerate_bindings([s, t], i2)
        assert [(b[s].name, b[t].name) for b in first] == [("s1", "t1"), ("s2", "t1")]
        assert enumerate_bindings([s, t], i2) == first

    def test_empty_sort(self):
        interp = Interpretation({"shop": []})
        with pytest.raises(EmptyDomainError):
            enumerate_bindings([Var("y", "shop")], interp)


class TestSubstitution:
    def test_full(self):
        y = Var("y", "shop")
        assert apply_substitution(atom("empty", y), {y: Const("s1", "shop")}) == atom("empty", Const("s1", "shop"))

    def test_partial(self):
        t, s = Var("t", "truck"), Var("s", "shop")
        out = apply_substitution(atom("tin", t, s), {s: Const("s2", "shop")})
        assert out == atom("tin", t, Const("s2", "shop"))

    def test_equality(self):
        y = Var("y", "shop")
        a = Const("a", "shop")
        assert apply_substitution(eq(y, a), {y: Const("s1", "shop")}) == eq(Const("s1", "shop"), a)

    def test_sort_mismatch(self):
        y = Var("y", "shop")
        with pytest.raises(VocabularyError):
            apply_substitution(atom("empty", y), {y: Const("t1", "truck")})
