"""Symbolic transition systems: BMC, the interpolation fixed-point loop,
and explicit inductive-invariant checking.

States are valuations of the system's variables (symbol index 0); the
transition relation relates them to primed copies (index 1).  Unrolling
step i uses index-i copies.  A Safe verdict always carries an invariant
that was re-verified with :func:`check_inductive` before being returned.

The fixed-point loop assumes the transition relation is total; this is not
checked (it would need a quantifier alternation outside the supported
fragment) and is the caller's responsibility.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .formulas import (
    Formula,
    FreshSymbols,
    conj,
    conjuncts,
    disj,
    evaluate,
    negate,
    rename,
    rewrite_literals,
    symbols_of,
)
from .interpolate import (
    NotUnsat,
    Partition,
    Separators,
    Theory,
    binary_interpolant,
    solve,
)
from .lia import ResourceLimitExceeded, eliminate_div
from .terms import Symbol

State = dict[Symbol, Fraction]


@dataclass
class TransitionSystem:
    vars: tuple[Symbol, ...]
    init: Formula
    trans: Formula
    error: Formula
    theory: Theory

    def __post_init__(self):
        self.vars = tuple(self.vars)
        state = set(self.vars)
        primed = {v.primed() for v in self.vars}
        for name, formula, allowed in (
            ("init", self.init, state),
            ("error", self.error, state),
            ("trans", self.trans, state | primed),
        ):
            extra = symbols_of(formula) - allowed
            if extra:
                raise ValueError(
                    f"{name} mentions symbols outside the state vector: "
                    + ", ".join(sorted(str(s) for s in extra))
                )

    def at_step(self, formula: Formula, step: int) -> Formula:
        """Rename index-0 state symbols to step copies (index-1 to step+1)."""
        mapping = {}
        for s in symbols_of(formula):
            mapping[s] = Symbol(s.name, s.sort, s.index + step)
        return rename(formula, mapping)


@dataclass
class Unrolling:
    """The k-step error-trace sentence of a system, split into conjuncts."""

    system: TransitionSystem
    k: int

    def __post_init__(self):
        sys = self.system
        self.items: list[Formula] = [sys.at_step(sys.init, 0)]
        self.items += [sys.at_step(sys.trans, i) for i in range(self.k)]
        self.error_disjunction = disj(
            sys.at_step(sys.error, i) for i in range(self.k + 1)
        )

    def state(self, model: Mapping[Symbol, Fraction], step: int) -> State:
        return {
            v: Fraction(model.get(Symbol(v.name, v.sort, step), 0))
            for v in self.system.vars
        }


@dataclass
class Safe:
    invariant: Formula
    status = "safe"


@dataclass
class Unsafe:
    trace: list[State]
    status = "unsafe"


@dataclass
class Unknown:
    reason: str
    status = "unknown"


VerificationResult = Safe | Unsafe | Unknown


@dataclass
class NoCexUpTo:
    bound: int
    status = "no-counterexample"


def _error_step(sys: TransitionSystem, model: Mapping[Symbol, Fraction],
                steps: Sequence[int]) -> int:
    for i in steps:
        if evaluate(sys.at_step(sys.error, i), model):
            return i
    raise RuntimeError("model does not satisfy any unrolled error formula")


def _prep(formula: Formula, theory: Theory, fresh: FreshSymbols) -> list[Formula]:
    return conjuncts(eliminate_div(rewrite_literals(formula, theory.sort, fresh), fresh))


def bmc(sys: TransitionSystem, k: int, branch_limit: int = 10_000) -> Unsafe | NoCexUpTo:
    """Check the k-step unrolling; Unsafe iff it is satisfiable."""
    unrolling = Unrolling(sys, k)
    fresh = FreshSymbols()
    items = [
        g
        for f in unrolling.items + [unrolling.error_disjunction]
        for g in _prep(f, sys.theory, fresh)
    ]
    result = solve(items, sys.theory, branch_limit)
    if not result.is_sat:
        return NoCexUpTo(k)
    end = _error_step(sys, result.model, range(k + 1))
    return Unsafe([unrolling.state(result.model, i) for i in range(end + 1)])


@dataclass
class ImcConfig:
    j: int = 1
    k: int = 1
    max_outer_iters: int = 40
    max_k: int = 12

    def __post_init__(self):
        if self.j < 1 or self.k < self.j:
            raise ValueError("need 1 <= j <= k")


@dataclass
class ClauseCheck:
    passed: bool
    countermodel: State | None = None


@dataclass
class InductiveReport:
    initiation: ClauseCheck
    consecution: ClauseCheck
    sufficiency: ClauseCheck

    @property
    def ok(self) -> bool:
        return (
            self.initiation.passed
            and self.consecution.passed
            and self.sufficiency.passed
        )


def _full_state(model: Mapping[Symbol, Fraction], symbols: Sequence[Symbol]) -> State:
    return {s: Fraction(model.get(s, 0)) for s in symbols}


def check_inductive(
    sys: TransitionSystem, candidate: Formula, branch_limit: int = 10_000
) -> InductiveReport:
    """Initiation, consecution and sufficiency of an invariant candidate.

    The candidate ranges over the state variables and may contain div
    terms; each clause is one unsatisfiability query, with a countermodel
    reported on failure.
    """
    sort = sys.theory.sort
    fresh = FreshSymbols()
    r = rewrite_literals(candidate, sort, fresh)
    r_items = conjuncts(eliminate_div(r, fresh))
    not_r = conjuncts(eliminate_div(negate(r, sort), fresh))
    r_primed = sys.at_step(r, 1)
    not_r_primed = conjuncts(eliminate_div(negate(r_primed, sort), fresh))

    def prep(f: Formula) -> list[Formula]:
        return _prep(f, sys.theory, fresh)

    state = list(sys.vars)
    both = state + [v.primed() for v in sys.vars]

    def run(items: list[Formula], syms: list[Symbol]) -> ClauseCheck:
        result = solve(items, sys.theory, branch_limit)
        if result.is_sat:
            return ClauseCheck(False, _full_state(result.model, syms))
        return ClauseCheck(True)

    initiation = run(prep(sys.init) + not_r, state)
    consecution = run(r_items + prep(sys.trans) + not_r_primed, both)
    sufficiency = run(r_items + prep(sys.error), state)
    return InductiveReport(initiation, consecution, sufficiency)


def trace_replays(
    sys: TransitionSystem,
    trace: Sequence[State],
    error_window: tuple[int, int] | None = None,
) -> bool:
    """Direct evaluation check that a trace witnesses reachability of error."""
    if not trace:
        return False
    if not evaluate(sys.init, trace[0]):
        return False
    for before, after in zip(trace, trace[1:]):
        step = dict(before)
        step.update({v.primed(): after[v] for v in sys.vars})
        if not evaluate(sys.trans, step):
            return False
    lo, hi = error_window if error_window else (0, len(trace) - 1)
    return any(
        evaluate(sys.error, trace[i])
        for i in range(len(trace))
        if lo <= i <= hi
    )


def imc(
    sys: TransitionSystem, cfg: ImcConfig | None = None, branch_limit: int = 10_000
) -> VerificationResult:
    """Interpolation-based fixed-point computation of an inductive invariant.

    The reachable-state approximation starts at the initial condition and is
    weakened by one-step separators extracted from unsatisfiable unrolling
    queries.  A satisfiable query at the first iteration is a real
    counterexample; later on it means the approximation got too coarse, and
    the bound k is increased and the loop restarted.
    """
    cfg = cfg or ImcConfig()
    try:
        return _imc(sys, cfg, branch_limit)
    except ResourceLimitExceeded as exc:
        return Unknown(f"resource: {exc}")


def _imc(sys: TransitionSystem, cfg: ImcConfig, branch_limit: int) -> VerificationResult:
    theory = sys.theory
    fresh = FreshSymbols()
    initial = solve(
        _prep(sys.init, theory, fresh) + _prep(sys.error, theory, fresh),
        theory,
        branch_limit,
    )
    if initial.is_sat:
        return Unsafe([_full_state(initial.model, sys.vars)])

    k = cfg.k
    iters = 0
    while True:
        reached = sys.init
        i = 0
        while True:
            iters += 1
            if iters > cfg.max_outer_iters:
                return Unknown(f"resource: iteration cap {cfg.max_outer_iters}")
            a_part = Partition(
                "prefix", conj([sys.at_step(reached, 0), sys.at_step(sys.trans, 0)])
            )
            suffix = [sys.at_step(sys.trans, l) for l in range(1, k)]
            errors = disj(sys.at_step(sys.error, l) for l in range(cfg.j, k + 1))
            b_part = Partition("suffix", conj(suffix + [errors]))
            outcome = binary_interpolant(a_part, b_part, theory, branch_limit)
            if isinstance(outcome, NotUnsat):
                if i == 0:
                    end = _error_step(sys, outcome.model, range(cfg.j, k + 1))
                    unrolling = Unrolling(sys, k)
                    return Unsafe(
                        [unrolling.state(outcome.model, s) for s in range(end + 1)]
                    )
                break  # too coarse: widen the window and restart
            step_interp = outcome.items[0]
            renamed = rename(
                step_interp,
                {
                    s: Symbol(s.name, s.sort, 0)
                    for s in symbols_of(step_interp)
                    if s.index == 1
                },
            )
            widened = disj([reached, renamed])
            if _equivalent(reached, widened, theory, branch_limit):
                report = check_inductive(sys, reached, branch_limit)
                if report.ok:
                    return Safe(reached)
                if not report.sufficiency.passed:
                    break  # error window too short for this fixpoint
                return Unknown("fixpoint failed the inductiveness check")
            if _consecution_holds(sys, widened, branch_limit):
                report = check_inductive(sys, widened, branch_limit)
                if report.ok:
                    return Safe(widened)
            reached = widened
            i += 1
        if k >= cfg.max_k:
            return Unknown(f"resource: k cap {cfg.max_k}")
        k += 1


def _equivalent(a: Formula, b: Formula, theory: Theory, branch_limit: int) -> bool:
    fresh = FreshSymbols()
    a_rw = rewrite_literals(a, theory.sort, fresh)
    b_rw = rewrite_literals(b, theory.sort, fresh)
    forward = solve(
        conjuncts(eliminate_div(a_rw, fresh))
        + conjuncts(eliminate_div(negate(b_rw, theory.sort), fresh)),
        theory,
        branch_limit,
    )
    if forward.is_sat:
        return False
    backward = solve(
        conjuncts(eliminate_div(b_rw, fresh))
        + conjuncts(eliminate_div(negate(a_rw, theory.sort), fresh)),
        theory,
        branch_limit,
    )
    return not backward.is_sat


def _consecution_holds(sys: TransitionSystem, candidate: Formula, branch_limit: int) -> bool:
    theory = sys.theory
    fresh = FreshSymbols()
    r = rewrite_literals(candidate, theory.sort, fresh)
    r_primed = sys.at_step(r, 1)
    query = (
        conjuncts(eliminate_div(r, fresh))
        + conjuncts(eliminate_div(rewrite_literals(sys.trans, theory.sort, fresh), fresh))
        + conjuncts(eliminate_div(negate(r_primed, theory.sort), fresh))
    )
    return not solve(query, theory, branch_limit).is_sat
