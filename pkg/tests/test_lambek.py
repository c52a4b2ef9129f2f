import pytest

from ppreflect.completion import NotConePreserving
from ppreflect.deduction import Budget
from ppreflect.fincat import NatTrans, ProductCone, opposite
from ppreflect.lambek import (
    CopairingError, EmbeddingContext, _copairing, comparison_iso, lambek_embed, subcategory_coproduct,
    yoneda_counterexample,
)
from ppreflect.samples import delta, poset, sample_presheaves
from ppreflect.theories import InvalidCone


@pytest.fixture(scope="module")
def ctx():
    return EmbeddingContext(delta(), (ProductCone("plus", "2", "1", "1", "inl", "inr"),
                                      ProductCone("zero", "0")), Budget(size=4))


def test_counterexample_on_delta(ctx):
    rep = yoneda_counterexample(ctx, "1")
    assert rep.passed, rep.text()
    assert rep["nat_count"].detail["count"] == 2
    assert [r.check for r in rep.records if r.check.startswith("candidate.")] == ["candidate.0", "candidate.1"]


def test_counterexample_degenerate_join():
    # in a poset with a top element, a ∨ a = a: the copairing has a section
    J = poset("J", ["a"], [])
    ctx = EmbeddingContext(J, (ProductCone("aa", "a", "a", "a", "id_a", "id_a"),))
    rep = yoneda_counterexample(ctx, "a")
    assert rep["counterexample"].verdict == "fail"
    assert "no counterexample here" in rep["counterexample"].detail["note"]


def test_corrupted_copairing_rejected(ctx):
    S, P, cp = _copairing(ctx, ctx.cone("plus"))
    comps = {x: dict(c) for x, c in cp.components.items()}
    k = next(iter(comps["1"]))
    comps["1"][k] = "codiag"  # a morphism of the wrong type
    with pytest.raises(CopairingError):
        yoneda_counterexample(ctx, "1", NatTrans(S, P, comps))


def test_context_rejects_bad_cone():
    with pytest.raises(InvalidCone):
        EmbeddingContext(delta(), (ProductCone("bad", "2", "1", "1", "inl", "inl"),))


def test_representables_embed(ctx):
    for a in ctx.working.objects:
        emb = lambek_embed(ctx, a)
        assert emb.functor.name == f"y({a})"
    assert len(lambek_embed(ctx, "0").functor.carriers["0"]) == 1


def test_non_preserving_rejected(ctx):
    with pytest.raises(NotConePreserving):
        lambek_embed(ctx, sample_presheaves()[0])


def test_subcategory_coproduct_injections(ctx):
    sc = subcategory_coproduct(ctx, "1", "1")
    assert sc.left("1", "id_1") is not sc.right("1", "id_1")
    assert sc.reflected.engine() == "nbe"


def test_comparison_iso(ctx):
    ci = comparison_iso(ctx, "plus")
    assert ci.verified, ci.report.text()
    assert ci.counts == {"0": 1, "1": 2, "2": 4}
    assert ci.report["psi_phi_eta"].detail["constants"] == 6


@pytest.mark.parametrize("obj", ["1", "2"])
def test_comparison_iso_detects_mutation(ctx, obj):
    assert not comparison_iso(ctx, "plus", mutate=obj).verified


def test_mutation_at_initial_object_is_invisible(ctx):
    # y(1)(0) is empty, so there is nothing to swap
    assert comparison_iso(ctx, "plus", mutate="0").verified
