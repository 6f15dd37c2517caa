import pytest

from helpers import eq, fibonacci_system, geq, lt, sym
from interpolmc.formulas import TRUE, Atom, AtomF, AtomKind, conj, evaluate
from interpolmc.interpolate import Theory
from interpolmc.terms import LinTerm, Sort, Symbol
from interpolmc.transition import (
    ImcConfig,
    NoCexUpTo,
    Safe,
    TransitionSystem,
    Unknown,
    Unrolling,
    Unsafe,
    bmc,
    check_inductive,
    imc,
    trace_replays,
)

X = sym("x")
XP = X.primed()


def counter(error, step=1):
    return TransitionSystem(
        (X,),
        eq(LinTerm.of(X), 0),
        eq(LinTerm.of(XP), LinTerm.of(X) + LinTerm.const(step)),
        error,
        Theory.LIA,
    )


def test_system_symbol_validation():
    stray = sym("other")
    with pytest.raises(ValueError):
        TransitionSystem((X,), geq(LinTerm.of(stray), 0), TRUE, TRUE, Theory.LIA)
    with pytest.raises(ValueError):
        TransitionSystem((X,), TRUE, TRUE, geq(LinTerm.of(XP), 0), Theory.LIA)


def test_unrolling_uses_indexed_copies():
    sys = counter(eq(LinTerm.of(X), 3))
    unrolling = Unrolling(sys, 2)
    assert len(unrolling.items) == 3
    step_syms = {s.index for f in unrolling.items for s in __import__("interpolmc").symbols_of(f)}
    assert step_syms == {0, 1, 2}


def test_bmc_finds_unique_minimal_trace():
    sys = counter(eq(LinTerm.of(X), 3))
    result = bmc(sys, 3)
    assert isinstance(result, Unsafe)
    assert [state[X] for state in result.trace] == [0, 1, 2, 3]
    assert trace_replays(sys, result.trace, (0, 3))


def test_bmc_below_depth_reports_bound():
    result = bmc(counter(eq(LinTerm.of(X), 3)), 2)
    assert isinstance(result, NoCexUpTo) and result.bound == 2


def test_bmc_zero_step_error():
    result = bmc(counter(eq(LinTerm.of(X), 0)), 0)
    assert isinstance(result, Unsafe) and len(result.trace) == 1


def test_imc_even_counter_safe():
    sys = counter(geq(LinTerm.const(-1), LinTerm.of(X)), step=2)
    result = imc(sys, ImcConfig(j=1, k=1))
    assert isinstance(result, Safe)
    report = check_inductive(sys, result.invariant)
    assert report.ok


def test_imc_buggy_counter_case_one():
    sys = counter(eq(LinTerm.of(X), 2))
    result = imc(sys, ImcConfig(j=1, k=2))
    assert isinstance(result, Unsafe)
    assert [state[X] for state in result.trace] == [0, 1, 2]
    assert trace_replays(sys, result.trace, (0, 2))


def test_imc_initial_error_state():
    sys = counter(geq(LinTerm.const(0), LinTerm.of(X)))
    result = imc(sys, ImcConfig())
    assert isinstance(result, Unsafe) and len(result.trace) == 1


def test_imc_widens_k_past_short_windows():
    # minimal counterexample depth 3 but k starts at 1
    sys = counter(eq(LinTerm.of(X), 3))
    result = imc(sys, ImcConfig(j=1, k=1, max_k=6))
    assert isinstance(result, Unsafe)
    assert trace_replays(sys, result.trace)


def test_imc_config_validation():
    with pytest.raises(ValueError):
        ImcConfig(j=2, k=1)
    with pytest.raises(ValueError):
        ImcConfig(j=0)


def test_check_inductive_accepts_fibonacci_invariant():
    sys = fibonacci_system()
    a, b = sym("a"), sym("b")
    good = conj([geq(LinTerm.of(a), 0), geq(LinTerm.of(b), 0)])
    report = check_inductive(sys, good)
    assert report.ok


def test_check_inductive_rejects_weak_invariant_with_countermodel():
    sys = fibonacci_system()
    a = sym("a")
    report = check_inductive(sys, geq(LinTerm.of(a), 0))
    assert report.initiation.passed
    assert not report.consecution.passed
    assert report.sufficiency.passed
    cm = report.consecution.countermodel
    assert cm is not None
    # countermodel satisfies R, takes a step, violates R'
    assert evaluate(geq(LinTerm.of(a), 0), cm)
    assert evaluate(sys.trans, cm)
    assert not evaluate(geq(LinTerm.of(a.primed()), 0), cm)


def test_check_inductive_vacuous_sufficiency():
    sys = counter(AtomF(Atom(AtomKind.LEQ0, LinTerm.const(-1))))
    report = check_inductive(sys, TRUE)
    assert report.ok


def test_imc_resource_caps_report_unknown():
    # error reachable only at depth 3 but k frozen at 1 by max_k
    sys = counter(eq(LinTerm.of(X), 3))
    result = imc(sys, ImcConfig(j=1, k=1, max_k=1, max_outer_iters=10))
    assert isinstance(result, Unknown)
    assert "resource" in result.reason


def test_trace_replay_rejects_bogus_traces():
    sys = counter(eq(LinTerm.of(X), 3))
    from fractions import Fraction

    good = [{X: Fraction(i)} for i in range(4)]
    assert trace_replays(sys, good)
    assert not trace_replays(sys, good[:-1])  # never reaches the error
    broken = [{X: Fraction(0)}, {X: Fraction(2)}, {X: Fraction(3)}]
    assert not trace_replays(sys, broken)
