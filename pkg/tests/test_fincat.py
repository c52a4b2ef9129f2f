import dataclasses

import pytest
from hypothesis import given, strategies as st

from ppreflect.fincat import (
    ConeCollection, FinFunctor, NatTrans, ProductCone, compose_nat, coproduct_presheaf, copair,
    enumerate_nat_trans, functor_iso_check, identity_nat, is_equalizer_cone, is_product_cone,
    naturality_failures, opposite, validate_category, validate_functor, yoneda,
    yoneda_bijection_failures,
)
from ppreflect.samples import (
    delta, diamond, equalizer_category, equalizer_cone, poset, sample_presheaves,
)


@st.composite
def posets(draw, max_n=4):
    n = draw(st.integers(1, max_n))
    names = [f"p{i}" for i in range(n)]
    pairs = [(names[i], names[j]) for i in range(n) for j in range(i + 1, n)]
    leq = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    return poset("P", names, leq)


def test_delta_shape():
    d = delta()
    assert validate_category(d) == []
    assert len(d.objects) == 3
    # |Hom(m, n)| = n^m
    for m in range(3):
        for n in range(3):
            assert len(d.hom(str(m), str(n))) == n ** m
    assert len(d.morphisms) == 11


def test_every_composition_mutation_is_flagged():
    d = delta()
    flagged = total = 0
    for key, h in d.comp.items():
        for other in d.morphisms:
            if other == h:
                continue
            total += 1
            comp = dict(d.comp)
            comp[key] = other
            flagged += bool(validate_category(dataclasses.replace(d, comp=comp)))
    assert total == len(d.comp) * (len(d.morphisms) - 1)
    assert flagged == total


def test_missing_composite_reported():
    d = delta()
    comp = dict(d.comp)
    del comp[("inl", "d01")]
    errs = validate_category(dataclasses.replace(d, comp=comp))
    assert [e.kind for e in errs] == ["PartialComposition"]
    assert errs[0].witness == ("inl", "d01")


@given(posets())
def test_posets_are_categories(P):
    assert validate_category(P) == []
    assert opposite(opposite(P)) == P
    assert validate_category(opposite(P)) == []


@given(posets(), st.data())
def test_yoneda_on_representables(P, data):
    a = data.draw(st.sampled_from(P.objects))
    b = data.draw(st.sampled_from(P.objects))
    Y = yoneda(P, b)
    assert validate_functor(Y) == []
    assert len(enumerate_nat_trans(yoneda(P, a), Y)) == len(P.hom(b, a))
    assert yoneda_bijection_failures(Y, a) == []


@pytest.mark.parametrize("F", sample_presheaves(), ids=lambda F: F.name)
def test_yoneda_on_samples(F):
    for a in F.category.objects:
        assert yoneda_bijection_failures(F, a) == []


def test_nat_trans_laws():
    F, G, T = sample_presheaves()
    nats = enumerate_nat_trans(F, G)
    assert nats and all(not naturality_failures(n) for n in nats)
    for n in nats:
        assert compose_nat(n, identity_nat(F)).key() == n.key()
        assert compose_nat(identity_nat(G), n).key() == n.key()
    # the terminal presheaf receives exactly one map from anything
    assert len(enumerate_nat_trans(G, T)) == 1


def test_broken_naturality_is_witnessed():
    F, G, _ = sample_presheaves()
    n = enumerate_nat_trans(F, G)[0]
    comps = {a: dict(c) for a, c in n.components.items()}
    x = next(iter(comps["2"]))
    others = [v for v in G.carriers["2"] if v != comps["2"][x]]
    comps["2"][x] = others[0]
    assert naturality_failures(NatTrans(F, G, comps))


def test_coproduct_injections_and_copairing():
    W = opposite(delta())
    y1, y2 = yoneda(W, "1"), yoneda(W, "2")
    S, inl, inr = coproduct_presheaf(y1, y2)
    assert validate_functor(S) == []
    assert not naturality_failures(inl) and not naturality_failures(inr)
    a = enumerate_nat_trans(y1, y2)[0]
    b = identity_nat(y2)
    c = copair(S, a, b)
    assert not naturality_failures(c)
    assert compose_nat(c, inl).key() == a.key()
    assert compose_nat(c, inr).key() == b.key()
    assert functor_iso_check(y2, y2, b)


def test_product_cones_in_delta_op():
    W = opposite(delta())
    assert is_product_cone(W, ProductCone("plus", "2", "1", "1", "inl", "inr")) == (True, None)
    assert is_product_cone(W, ProductCone("zero", "0")) == (True, None)
    ok, w = is_product_cone(W, ProductCone("bad", "2", "1", "1", "inl", "inl"))
    assert not ok and w is not None
    ok, w = is_product_cone(W, ProductCone("typo", "2", "1", "1", "nope", "inr"))
    assert (ok, w[0]) == (False, "shape")


def test_cone_collection_cycles():
    P = diamond()
    cc = ConeCollection(P, [ProductCone("m", "bot", "a", "b", "bot_a", "bot_b")])
    assert cc.invalid() == []
    assert not cc.has_cycle()


def test_equalizer_cone_check():
    cat = equalizer_category()
    assert is_equalizer_cone(cat, equalizer_cone()) == (True, None)
    ok, _ = is_equalizer_cone(cat, dataclasses.replace(equalizer_cone(), e="h"))
    assert not ok


def test_functor_validation_catches_bad_table():
    F = sample_presheaves()[1]
    action = {m: dict(t) for m, t in F.action.items()}
    action["codiag"] = {k: "id_0" for k in action["codiag"]}
    assert validate_functor(FinFunctor(F.category, F.carriers, action, F.name))
