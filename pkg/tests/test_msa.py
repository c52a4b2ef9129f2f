import pickle

import pytest
from hypothesis import given, strategies as st

from ppreflect.msa import (
    App, Equation, FinAlgebra, FunctionSymbol, IllSorted, Signature, SortMismatch, Var, app,
    count_terms, enumerate_terms, find_violation, free_vars, match, render, satisfies, sort_of,
    substitute, substitute_all, subterms, term_table, var,
)

N, B = "nat", "bool"
zero = FunctionSymbol("zero", (), N)
succ = FunctionSymbol("succ", (N,), N)
plus = FunctionSymbol("plus", (N, N), N)
tt = FunctionSymbol("tt", (), B)
iszero = FunctionSymbol("iszero", (N,), B)
SIG = Signature([N, B], [zero, succ, plus, tt, iszero])


def nat_terms(max_leaves=8):
    base = st.one_of(st.just(app(zero)), st.just(var("x", N)), st.just(var("y", N)))
    return st.recursive(base, lambda ch: st.one_of(
        st.builds(lambda a: app(succ, a), ch),
        st.builds(lambda a, b: app(plus, a, b), ch, ch)), max_leaves=max_leaves)


def test_hash_consing_shares_nodes():
    a = app(succ, app(zero))
    b = app(succ, app(zero))
    assert a is b
    assert var("x", N) is var("x", N)
    assert var("x", N) is not var("x", B)


def test_pickle_preserves_identity():
    t = app(plus, app(zero), var("x", N))
    assert pickle.loads(pickle.dumps(t)) is t


def test_sort_of_reports_path():
    bad = App(plus, (app(zero), app(tt)))
    with pytest.raises(IllSorted) as exc:
        sort_of(bad, SIG)
    assert list(exc.value.path) == [1]


def test_substitute_rejects_sort_mismatch():
    with pytest.raises(SortMismatch):
        substitute(var("x", N), var("x", N), app(tt))


def test_render():
    assert render(app(plus, app(zero), var("x", N))) == "plus(zero, x)"


def test_signature_rejects_unknown_sorts():
    with pytest.raises(ValueError):
        Signature([N], [iszero])


@given(nat_terms())
def test_terms_are_well_sorted(t):
    assert sort_of(t, SIG) == N


@given(nat_terms())
def test_subterm_count_matches_size(t):
    assert sum(1 for _ in subterms(t)) >= 1
    assert t in set(subterms(t))


@given(nat_terms(), nat_terms())
def test_substitution_removes_variable(t, r):
    x = var("x", N)
    s = substitute(t, x, r)
    if x not in free_vars(r):
        assert x not in free_vars(s)
    assert free_vars(s) <= (free_vars(t) - {x}) | free_vars(r)


@given(nat_terms(), nat_terms(), nat_terms())
def test_match_recovers_substitution(t, r1, r2):
    sigma = {var("x", N): r1, var("y", N): r2}
    inst = substitute_all(t, sigma)
    found = match(t, inst)
    assert found is not None
    assert substitute_all(t, found) is inst


def test_enumeration_counts_agree_with_table():
    table = term_table(SIG, 5)
    for n in range(1, 6):
        assert len(set(table[(N, n)])) == len(table[(N, n)])
        assert all(t.size == n and t.sort == N for t in table[(N, n)])
    assert count_terms(SIG, N, 5) == sum(1 for _ in enumerate_terms(SIG, N, 5))
    # zero; succ zero; succ^2, plus(z,z); ...
    assert [len(table[(N, n)]) for n in range(1, 4)] == [1, 1, 2]


def test_finite_algebra_checks_equations():
    mod2 = FinAlgebra(SIG, {N: (0, 1), B: (True, False)}, {
        zero: {(): 0}, succ: {(0,): 1, (1,): 0},
        plus: {(a, b): (a + b) % 2 for a in (0, 1) for b in (0, 1)},
        tt: {(): True}, iszero: {(0,): True, (1,): False},
    })
    assert mod2.problems() == []
    x, y = var("x", N), var("y", N)
    assert satisfies(mod2, Equation(app(plus, x, y), app(plus, y, x), N))
    bad = Equation(app(succ, x), x, N)
    assert find_violation(mod2, bad) == {x: 0}
