import pytest
from hypothesis import given, strategies as st

from ppreflect.completion import (
    CoherenceError, Distinct, Equal, GammaHat, NoCanonicalForm, NotConePreserving, PairV, UnitV,
    act_morphism, check_universal_property, classify, cross_validate, equal, eta_unit,
    find_separator, map_L, normalize, readback, reflect,
)
from ppreflect.deduction import Budget, UniverseOracle
from ppreflect.fincat import (
    ConeCollection, FinFunctor, ProductCone, enumerate_nat_trans, identity_nat, yoneda,
)
from ppreflect.msa import IllSorted, SortMismatch, enumerate_terms, render
from ppreflect.samples import delta_op, delta_op_cones, sample_presheaves


@pytest.fixture(scope="module")
def pool(R):
    return [t for a in R.category.objects for t in enumerate_terms(R.theory.signature, a, 5)]


@pytest.fixture(scope="module")
def models(W):
    T = sample_presheaves()[2]
    return [yoneda(W, "2"), T]


def test_normal_form_counts_match_y2(R, pool):
    # L(y(1) + y(1)) is y(2), whose carriers have sizes 1, 2, 4
    by_sort = {}
    for t in pool:
        by_sort.setdefault(t.sort, set()).add(normalize(R, t))
    assert {a: len(v) for a, v in by_sort.items()} == {"0": 1, "1": 2, "2": 4}


def test_values_are_eta_long(R, pool):
    for t in pool:
        v = normalize(R, t)
        if t.sort == "2":
            assert isinstance(v, PairV)
        if t.sort == "0":
            assert isinstance(v, UnitV)


def test_nbe_never_separates_oracle_equal_terms(R):
    rep = cross_validate(R, Budget(size=5, iterations=50_000))
    assert rep.passed, rep.text()
    assert R.engine() == "nbe"


@given(st.data())
def test_readback_is_a_fixpoint(R, pool, data):
    t = data.draw(st.sampled_from(pool))
    v = normalize(R, t)
    nf = readback(R, v)
    assert normalize(R, nf) == v
    assert isinstance(equal(R, t, nf), Equal)


@given(st.data())
def test_extensions_respect_equality(R, pool, models, data):
    s = data.draw(st.sampled_from(pool))
    t = data.draw(st.sampled_from([u for u in pool if u.sort == s.sort]))
    res = equal(R, s, t)
    for G in models:
        for gamma in enumerate_nat_trans(R.functor, G):
            h = GammaHat(R.theory, G, gamma)
            if isinstance(res, Equal):
                assert h(s) == h(t)
    if isinstance(res, Distinct):
        sep = res.separator
        h = GammaHat(R.theory, sep.model, sep.gamma)
        assert (h(s), h(t)) == sep.values and h(s) != h(t)


def test_example_pair_is_equal(R):
    th = R.theory
    inl_s = th.const("1", (0, "id_1"))
    t = act_morphism(R, "inl", act_morphism(R, "codiag", inl_s))
    res = equal(R, t, inl_s)
    assert isinstance(res, Equal)
    assert res.record()["result"] == "equal"


def test_distinct_constants_get_separator(R):
    th = R.theory
    a, b = th.const("1", (0, "id_1")), th.const("1", (1, "id_1"))
    res = equal(R, a, b)
    assert isinstance(res, Distinct)
    rec = res.record()
    assert rec["separator"]["values"][0] != rec["separator"]["values"][1]


def test_sort_mismatch_and_ill_sorted(R):
    th = R.theory
    with pytest.raises(SortMismatch):
        equal(R, th.const("1", (0, "id_1")), th.const("0", (0, "d01")))
    with pytest.raises(IllSorted):
        act_morphism(R, "inl", th.const("1", (0, "id_1")))
    with pytest.raises(KeyError):
        eta_unit(R, "1", "nope")


def test_universal_property_into_y2(R, pool, W):
    G = yoneda(W, "2")
    gammas = enumerate_nat_trans(R.functor, G)
    oracle = UniverseOracle(R.theory.signature, R.theory.equations, Budget(size=4))
    pairs = [(m[0], u) for m in oracle.graph.classes() for u in m[1:]]
    for gamma in gammas:
        rep = check_universal_property(R, G, gamma, pool[:200], pairs)
        assert rep.passed, rep.text()


def test_non_preserving_target_rejected(R):
    F = R.functor
    with pytest.raises(NotConePreserving):
        GammaHat(R.theory, F, identity_nat(F))


def test_saturation_mode_agrees(W, cones, S):
    Rs = reflect(W, cones, S, mode="saturation", budget=Budget(size=6, iterations=20_000))
    assert Rs.engine() == "saturation"
    th = Rs.theory
    a = th.const("1", (0, "id_1"))
    t = act_morphism(Rs, "inl", act_morphism(Rs, "codiag", a))
    assert isinstance(equal(Rs, t, a), Equal)
    assert equal(Rs, t, a).trace


def test_cyclic_apex_graph_falls_back(W):
    # two cones sharing apex 2 make eta-long forms ambiguous
    cc = [ProductCone("p", "2", "1", "1", "inl", "inr"), ProductCone("q", "2", "1", "1", "inr", "inl")]
    R = reflect(W, cc, yoneda(W, "2"), budget=Budget(size=4))
    assert R.engine() == "saturation"
    with pytest.raises(NoCanonicalForm):
        normalize(R, R.theory.const("1", "inl"))


def test_map_L_is_functorial(R, pool, W):
    F = R.functor
    alpha = identity_nat(F)
    for t in pool[:100]:
        assert map_L(alpha, t, R.theory) is t


def test_classify_groups_by_normal_form(R, pool):
    groups = classify(R, pool)
    assert sum(len(g) for g in groups) == len(pool)
    assert len(groups) == 7
