"""The oracle is checked against hand-computed quotients and its traces are replayed."""
import dataclasses

import pytest
from hypothesis import given, strategies as st

from ppreflect.deduction import (
    Budget, Proved, Step, Trace, TraceError, Unknown, UniverseOracle, derives, format_trace, replay,
)
from ppreflect.msa import Equation, FunctionSymbol, Signature, app, var
from ppreflect.samples import delta_op, delta_op_cones
from ppreflect.theories import theory_of_functor
from ppreflect.fincat import yoneda

# succ(succ(succ(zero))) ≈ zero: naturals mod 3
N = "n"
zero = FunctionSymbol("zero", (), N)
succ = FunctionSymbol("succ", (N,), N)
SIG = Signature([N], [zero, succ])
x = var("x", N)
MOD3 = (Equation(app(succ, app(succ, app(succ, x))), x, N, "mod3"),)


def num(k):
    t = app(zero)
    for _ in range(k):
        t = app(succ, t)
    return t


def test_universe_oracle_matches_modular_arithmetic():
    oracle = UniverseOracle(SIG, MOD3, Budget(size=12))
    assert not oracle.truncated
    for i in range(12):
        for j in range(12):
            res = oracle.decide(num(i), num(j))
            assert isinstance(res, Proved) == (i % 3 == j % 3)
    assert len(oracle.graph.classes()) == 3


@given(st.integers(0, 10), st.integers(0, 10))
def test_traces_replay(i, j):
    oracle = UniverseOracle(SIG, MOD3, Budget(size=12))
    res = oracle.decide(num(i), num(j))
    if isinstance(res, Proved):
        eq = replay(MOD3, res.trace, SIG)
        assert (eq.lhs, eq.rhs) == (num(i), num(j))
        assert format_trace(res.trace).count("\n") == len(res.trace) - 1


def test_tampered_trace_rejected():
    res = UniverseOracle(SIG, MOD3, Budget(size=8)).decide(num(0), num(6))
    steps = list(res.trace.steps)
    k = next(i for i, s in enumerate(steps) if s.rule == "ax")
    steps[k] = dataclasses.replace(steps[k], rhs=num(1))
    with pytest.raises(TraceError):
        replay(MOD3, Trace(steps))
    with pytest.raises(TraceError):
        replay(MOD3, Trace([Step("ax", (), num(1), num(0), N)]))


def test_saturation_agrees_and_respects_budget():
    assert isinstance(derives(MOD3, Equation(num(4), num(1), N), Budget(size=6), strategy="saturate"), Proved)
    out = derives(MOD3, Equation(num(2), num(1), N), Budget(size=6), strategy="saturate")
    assert isinstance(out, Unknown)
    tiny = derives(MOD3, Equation(num(7), num(1), N), Budget(size=9, iterations=1), strategy="saturate")
    assert isinstance(tiny, Unknown)


def test_truncation_flag():
    oracle = UniverseOracle(SIG, MOD3, Budget(size=30, iterations=3))
    assert oracle.truncated


def test_open_goals_use_variables():
    res = derives(MOD3, Equation(app(succ, app(succ, app(succ, app(succ, x)))), app(succ, x), N), Budget(size=8))
    assert isinstance(res, Proved)
    assert replay(MOD3, res.trace).lhs.size == 5


def test_functor_theory_oracle_replays():
    W = delta_op()
    th = theory_of_functor(W, delta_op_cones(), yoneda(W, "2"))
    oracle = UniverseOracle(th.signature, th.equations, Budget(size=4))
    checked = 0
    for members in oracle.graph.classes():
        if len(members) < 2:
            continue
        a, b = members[0], members[-1]
        eq = replay(th.equations, oracle.decide(a, b).trace, th.signature)
        assert (eq.lhs, eq.rhs) == (a, b)
        checked += 1
    assert checked > 0
