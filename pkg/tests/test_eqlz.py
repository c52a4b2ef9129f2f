import dataclasses

import pytest
from hypothesis import given, strategies as st

from ppreflect.deduction import Budget, Proved
from ppreflect.eqlz import (
    InvalidEqualizer, build_equalizer_theory, check_instances, check_model_respects,
    correspondence_eq, cross_check_guards, eval_in_model, functor_to_partial_algebra,
    guard_traces_replay, partial_algebra_check, preserves_equalizer,
)
from ppreflect.fincat import identity_nat
from ppreflect.msa import render
from ppreflect.samples import (
    eq_nonpreserving_functor, eq_preserving_functor, equalizer_category, equalizer_cone,
)

CAT = equalizer_category()
CONE = equalizer_cone()


@pytest.fixture(scope="module")
def Fe_theory():
    return build_equalizer_theory(CAT, [CONE], eq_preserving_functor())


def test_fixpoint_converges(Fe_theory):
    et = Fe_theory
    assert et.converged and not et.truncated
    assert et.rounds[-1].new == 0
    assert guard_traces_replay(et) == []


def test_admission_matches_guard_derivability(Fe_theory):
    et = Fe_theory
    rep = cross_check_guards(et, [(eq_preserving_functor(), identity_nat(eq_preserving_functor()))])
    assert rep.passed, rep.text()


@given(st.data())
def test_admitted_terms_have_derivable_guards(Fe_theory, data):
    et = Fe_theory
    t = data.draw(st.sampled_from(sorted(et.admitted["eq"], key=render)))
    ft, gt = et.guard(CONE, t)
    assert isinstance(et.derivable(ft, gt), Proved)


def test_rejected_constants_are_really_unequal(Fe_theory):
    et = Fe_theory
    th = et.base
    # g swaps 1 and 2, so only A.0 is equalized among the constants
    admitted = {render(t) for t in et.admitted["eq"] if t.size == 1}
    assert admitted == {"A.0"}
    assert th.const("A", "1") not in et.admitted["eq"]


def test_generic_theory_admits_e_of_anything():
    et = build_equalizer_theory(CAT, [CONE])
    assert et.converged
    names = {render(t) for t in et.admitted["eq"]}
    assert "e(xE)" in names and "xA" not in names
    assert cross_check_guards(et).passed


def test_instances_hold_for_preserving_functor(Fe_theory):
    alg = functor_to_partial_algebra(eq_preserving_functor(), Fe_theory)
    assert partial_algebra_check(alg, CONE) == (True, None)
    rep = check_instances(Fe_theory, alg)
    assert rep.passed, rep.text()
    assert correspondence_eq(eq_preserving_functor(), Fe_theory).passed


def test_non_preserving_mutant_fails_with_witness():
    Fbad = eq_nonpreserving_functor()
    assert preserves_equalizer(Fbad, CONE) == (False, ("not_injective", "0", "0b"))
    et = build_equalizer_theory(CAT, [CONE], Fbad)
    alg = functor_to_partial_algebra(Fbad, et)
    assert partial_algebra_check(alg, CONE) == (False, ("eta", "0b"))
    rep = check_instances(et, alg)
    assert rep["eta.eq"].verdict == "fail"
    assert "E.0b" in rep["eta.eq"].witness
    assert correspondence_eq(Fbad, et).passed  # both sides agree that it fails


def test_model_respects_classes(Fe_theory):
    F = eq_preserving_functor()
    assert check_model_respects(Fe_theory, F, identity_nat(F)).passed
    t = next(iter(Fe_theory.guard_traces))
    assert eval_in_model(Fe_theory, F, identity_nat(F), t) == "0"


def test_invalid_equalizer_rejected():
    with pytest.raises(InvalidEqualizer):
        build_equalizer_theory(CAT, [dataclasses.replace(CONE, e="h")])


def test_round_budget_reports_truncation():
    et = build_equalizer_theory(CAT, [CONE], eq_preserving_functor(), max_rounds=1)
    assert not et.converged and et.truncated
