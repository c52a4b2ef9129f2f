import pytest
from hypothesis import given, strategies as st

from ppreflect.fincat import ProductCone, opposite, yoneda
from ppreflect.msa import find_violation, satisfies
from ppreflect.samples import (
    delta, delta_op, delta_op_cones, eq_nonpreserving_functor, eq_preserving_functor,
    equalizer_category, sample_presheaves,
)
from ppreflect.theories import (
    InvalidCone, NotAModel, algebra_to_functor, functor_to_algebra, listing, preserves_cones,
    theory_of_category, theory_of_functor, theory_with_cones,
)


def tables(F):
    return ({a: tuple(F.carriers[a]) for a in F.category.objects},
            {m: dict(t) for m, t in F.action.items()})


def test_category_theory_counts():
    W = delta_op()
    th = theory_of_category(W)
    assert len(th.signature.symbols) == len(W.morphisms)
    assert len(th.equations) == len(W.objects) + sum(1 for _ in W.composable())


def test_cone_theory_adds_three_equations_per_binary_cone():
    W = delta_op()
    base = theory_of_category(W)
    ct = theory_with_cones(W, delta_op_cones())
    assert len(ct.equations) == len(base.equations) + 3 + 1
    assert {s.name for s in ct.cone_symbols.values()} == {"pair", "unit"}


def test_invalid_cone_rejected():
    with pytest.raises(InvalidCone):
        theory_with_cones(delta_op(), [ProductCone("bad", "2", "1", "1", "inl", "inl")])


FUNCTOR_SAMPLES = [*sample_presheaves(), eq_preserving_functor(), eq_nonpreserving_functor()]


@pytest.mark.parametrize("F", FUNCTOR_SAMPLES, ids=lambda F: F.name)
def test_functor_algebra_round_trip(F):
    th = theory_of_category(F.category)
    alg = functor_to_algebra(F, th)
    assert alg.problems() == []
    assert all(satisfies(alg, e) for e in th.equations)
    assert tables(algebra_to_functor(alg, th, F.name)) == tables(F)


@pytest.mark.parametrize("F", sample_presheaves()[1:], ids=lambda F: F.name)
def test_cone_preserving_round_trip(F):
    th = theory_of_functor(F.category, delta_op_cones(), F)
    alg = functor_to_algebra(F, th)
    assert all(satisfies(alg, e) for e in th.equations)
    assert tables(algebra_to_functor(alg, th, F.name)) == tables(F)


def test_non_preserving_functor_fails_pair_equations():
    S = sample_presheaves()[0]
    cones = delta_op_cones()
    ok, w = preserves_cones(S, cones)
    assert not ok and w[0] == "plus"
    th = theory_with_cones(S.category, cones)
    alg = functor_to_algebra(S, th)
    failing = [(e.label, find_violation(alg, e)) for e in th.equations if not satisfies(alg, e)]
    assert failing
    assert {lab for lab, _ in failing} <= {"fst", "snd", "pair", "unit"}
    assert "fst" in {lab for lab, _ in failing}
    assert all(rho for _, rho in failing)


def test_broken_algebra_is_not_a_functor():
    F = sample_presheaves()[1]
    th = theory_of_category(F.category)
    alg = functor_to_algebra(F, th)
    s = th.mor("codiag")
    alg.ops[s] = {k: F.carriers["1"][0] for k in alg.ops[s]}
    alg.ops[s][next(iter(alg.ops[s]))] = "junk"
    with pytest.raises(NotAModel):
        algebra_to_functor(alg, th)


@given(st.sampled_from(["0", "1", "2"]))
def test_representables_preserve_cones(a):
    assert preserves_cones(yoneda(delta_op(), a), delta_op_cones()) == (True, None)


def test_functor_theory_constants_and_listing():
    F = sample_presheaves()[1]
    th = theory_of_functor(F.category, delta_op_cones(), F)
    assert len(th.constants) == sum(len(F.carriers[a]) for a in F.category.objects)
    text = listing(th)
    assert text.startswith("sorts:") and "[const]" in text
    assert listing(th) == text


def test_equalizer_category_theory():
    th = theory_of_category(equalizer_category())
    assert len(th.equations) == 3 + sum(1 for _ in equalizer_category().composable())
