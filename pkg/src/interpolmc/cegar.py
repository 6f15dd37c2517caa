"""Boolean predicate abstraction with interpolation-guided refinement.

Abstract states are bit-vectors recording the truth of each predicate; the
abstract system is built explicitly from satisfiability queries (one per
state for the initial and error sets, one per state pair for transitions).
Bit-vectors whose predicate combination is itself unsatisfiable are
filtered out with one query each first, which leaves the abstraction
unchanged while avoiding the quadratic blowup on contradictory
combinations.

An abstract error path is concretized into the sequence-interpolation
partitions B, TR, ..., TR, E; by default each step is additionally
constrained to its abstract state so feasibility is judged for the
specific path (set ``paper_literal=True`` to drop those conjuncts).
Spurious paths are refined by adding the sequence interpolants as new
predicates, which eliminates all abstract error paths of that length.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Iterable, Sequence

from .formulas import (
    FalseF,
    Formula,
    FreshSymbols,
    NotF,
    TrueF,
    conj,
    disj,
    fold_constants,
    formula_key,
    rename,
    symbols_of,
)
from .interpolate import (
    NotUnsat,
    Partition,
    Separators,
    Theory,
    sequence_interpolant,
    solve,
)
from .lia import ResourceLimitExceeded, eliminate_div
from .terms import Symbol
from .transition import (
    Safe,
    State,
    TransitionSystem,
    Unknown,
    Unsafe,
    VerificationResult,
    _prep,
    check_inductive,
)

BitVector = tuple[int, ...]

DEFAULT_PREDICATE_CAP = 12


class PredicateCapExceeded(Exception):
    """More predicates than the explicit 2^k abstraction can afford."""


@dataclass
class PredicateSet:
    """Ordered, syntactically deduplicated predicates over the state vars."""

    predicates: list[Formula] = field(default_factory=list)

    def __post_init__(self):
        unique: list[Formula] = []
        seen: set[tuple] = set()
        for p in self.predicates:
            key = formula_key(p)
            if key not in seen:
                seen.add(key)
                unique.append(p)
        self.predicates = unique

    def __len__(self) -> int:
        return len(self.predicates)

    def extended(self, new: Iterable[Formula]) -> "PredicateSet":
        return PredicateSet(self.predicates + list(new))

    def inverse_image(self, bits: BitVector) -> Formula:
        """The predicate valuation formula p^-1(bits) over the state vars."""
        parts = []
        for p, bit in zip(self.predicates, bits):
            parts.append(p if bit else NotF(p))
        return conj(parts)


@dataclass
class AbstractTS:
    predicates: PredicateSet
    states: list[BitVector]
    initial: list[BitVector]
    transitions: list[tuple[BitVector, BitVector]]
    errors: list[BitVector]


@dataclass
class AbstractPath:
    states: list[BitVector]


@dataclass
class AbstractSafe:
    reachable: list[BitVector]


def boolean_abstract(
    sys: TransitionSystem,
    preds: PredicateSet,
    cap: int = DEFAULT_PREDICATE_CAP,
    branch_limit: int = 10_000,
) -> AbstractTS:
    """Existential Boolean abstraction of a system over a predicate set."""
    k = len(preds)
    if k > cap:
        raise PredicateCapExceeded(f"{k} predicates exceed the cap of {cap}")
    theory = sys.theory
    fresh = FreshSymbols()

    cache: dict[BitVector, list[Formula]] = {}

    def inv_items(bits: BitVector, step: int = 0) -> list[Formula]:
        if bits not in cache:
            cache[bits] = _prep(preds.inverse_image(bits), theory, fresh)
        items = cache[bits]
        if step == 0:
            return items
        return [sys.at_step(f, step) for f in items]

    def sat(items: list[Formula]) -> bool:
        return solve(items, theory, branch_limit).is_sat

    init_items = _prep(sys.init, theory, fresh)
    trans_items = _prep(sys.trans, theory, fresh)
    error_items = _prep(sys.error, theory, fresh)

    states = [
        bits for bits in product((0, 1), repeat=k) if sat(inv_items(bits))
    ]
    initial = [bits for bits in states if sat(init_items + inv_items(bits))]
    errors = [bits for bits in states if sat(error_items + inv_items(bits))]
    transitions = [
        (pre, post)
        for pre in states
        for post in states
        if sat(inv_items(pre) + trans_items + inv_items(post, step=1))
    ]
    return AbstractTS(preds, states, initial, transitions, errors)


def abstract_reach(abstraction: AbstractTS) -> AbstractPath | AbstractSafe:
    """Shortest abstract error path by BFS, or the reachable closure."""
    successors: dict[BitVector, list[BitVector]] = {}
    for pre, post in abstraction.transitions:
        successors.setdefault(pre, []).append(post)
    errors = set(abstraction.errors)
    parent: dict[BitVector, BitVector | None] = {}
    queue: list[BitVector] = []
    for s in sorted(abstraction.initial):
        parent[s] = None
        queue.append(s)
    head = 0
    while head < len(queue):
        state = queue[head]
        head += 1
        if state in errors:
            path = [state]
            while parent[path[-1]] is not None:
                path.append(parent[path[-1]])
            return AbstractPath(path[::-1])
        for nxt in sorted(successors.get(state, ())):
            if nxt not in parent:
                parent[nxt] = state
                queue.append(nxt)
    return AbstractSafe(sorted(parent))


@dataclass
class Feasible:
    trace: list[State]


@dataclass
class Spurious:
    partitions: list[Partition]


def concretize(
    sys: TransitionSystem,
    path: AbstractPath,
    preds: PredicateSet,
    paper_literal: bool = False,
    branch_limit: int = 10_000,
) -> Feasible | Spurious:
    """Concrete feasibility of an abstract error path.

    Builds the path sentence B[x1] ^ TR[x1,x2] ^ ... ^ E[xm] as sequence
    partitions; unless ``paper_literal`` is set, step i is conjoined with
    its abstract state's predicate valuation so the answer follows the
    given path rather than any path of the same length.
    """
    m = len(path.states)
    parts: list[Partition] = []
    for i, bits in enumerate(path.states, start=1):
        pieces = [sys.at_step(sys.init, 1)] if i == 1 else [
            sys.at_step(sys.trans, i - 1)
        ]
        if not paper_literal:
            pieces.append(sys.at_step(preds.inverse_image(bits), i))
        parts.append(Partition(f"step{i}", conj(pieces)))
    parts.append(Partition("error", sys.at_step(sys.error, m)))
    fresh = FreshSymbols()
    items = [g for p in parts for g in _prep(p.formula, sys.theory, fresh)]
    outcome = solve(items, sys.theory, branch_limit)
    if not outcome.is_sat:
        return Spurious(parts)
    trace = [
        {
            v: Fraction(outcome.model.get(Symbol(v.name, v.sort, i), 0))
            for v in sys.vars
        }
        for i in range(1, m + 1)
    ]
    return Feasible(trace)


def refine(preds: PredicateSet, chain: Sequence[Formula]) -> PredicateSet | None:
    """Add the inner sequence interpolants, renamed to the state variables.

    Returns None when every new predicate was already present (or the chain
    only contained constants), signalling no progress.
    """
    new: list[Formula] = []
    for i, interp in enumerate(chain[1:-1], start=1):
        folded = fold_constants(interp)
        if isinstance(folded, (TrueF, FalseF)):
            continue
        mapping = {
            s: Symbol(s.name, s.sort, 0)
            for s in symbols_of(folded)
            if s.index == i
        }
        new.append(rename(folded, mapping))
    extended = preds.extended(new)
    if len(extended) == len(preds):
        return None
    return extended


def cegar_loop(
    sys: TransitionSystem,
    max_refinements: int = 10,
    seed_predicates: Sequence[Formula] = (),
    cap: int = DEFAULT_PREDICATE_CAP,
    paper_literal: bool = False,
    branch_limit: int = 10_000,
) -> VerificationResult:
    """Abstract, search, concretize, refine until a verdict or a cap."""
    preds = PredicateSet(list(seed_predicates))
    try:
        for _ in range(max_refinements + 1):
            abstraction = boolean_abstract(sys, preds, cap, branch_limit)
            reach = abstract_reach(abstraction)
            if isinstance(reach, AbstractSafe):
                invariant = disj(
                    preds.inverse_image(bits) for bits in reach.reachable
                )
                report = check_inductive(sys, invariant, branch_limit)
                if report.ok:
                    return Safe(invariant)
                return Unknown("abstract invariant failed the inductiveness check")
            outcome = concretize(sys, reach, preds, paper_literal, branch_limit)
            if isinstance(outcome, Feasible):
                return Unsafe(outcome.trace)
            interp = sequence_interpolant(outcome.partitions, sys.theory, branch_limit)
            if isinstance(interp, NotUnsat):
                raise RuntimeError("spurious path concretization disagreed with interpolation")
            refined = refine(preds, interp.items)
            if refined is None:
                return Unknown("refinement-stuck")
            preds = refined
        return Unknown(f"resource: refinement cap {max_refinements}")
    except (ResourceLimitExceeded, PredicateCapExceeded) as exc:
        return Unknown(f"resource: {exc}")
