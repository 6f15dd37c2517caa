"""Interpolation over full quantifier-free formulas.

Disjunctions are handled by explicit case splitting: an or-node on the
first partition's side splits into cases whose sub-separators are joined
with "or", one on the second side joins with "and" (the interpolating
disjunction rules).  Conjunction-only cases go to the theory engines.

Sequence interpolants are computed by the iterative binary scheme with the
cut ((I_{i-1} and A_i), (A_{i+1} and ... and A_n)).  Tree interpolants use
the same idea bottom-up, interpolating (children labels' interpolants and
A(v)) against the remaining original labels; on chain-shaped trees this is
call-for-call the sequence computation.  For branching trees those queries
can in rare cases become satisfiable (children interpolants are computed
against original sibling labels, which are stronger than the sibling
interpolants); the computation then falls back to a top-down scheme whose
queries are unsatisfiable by construction, at the price of negating parent
interpolants into the second side.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .formulas import (
    AtomF,
    AtomKind,
    FALSE,
    Formula,
    FreshSymbols,
    FalseF,
    OrF,
    TRUE,
    TrueF,
    conj,
    conjuncts,
    disj,
    evaluate,
    negate,
    rewrite_literals,
    symbols_of,
)
from .lia import ResourceLimitExceeded, eliminate_div, lia_check, lia_interpolate
from .lra import concrete_model, lra_check, lra_interpolate
from .terms import Sort, Symbol


class Theory(Enum):
    LRA = "QF_LRA"
    LIA = "QF_LIA"

    @property
    def sort(self) -> Sort:
        return Sort.REAL if self is Theory.LRA else Sort.INT


@dataclass
class Partition:
    """A named formula taking part in an interpolation query."""

    label: str
    formula: Formula
    symbols: frozenset[Symbol] = field(default_factory=frozenset)

    def signature(self) -> frozenset[Symbol]:
        return frozenset(symbols_of(self.formula))


@dataclass
class NotUnsat:
    """The query was satisfiable; the model covers all partitions."""

    model: dict[Symbol, Fraction]


@dataclass
class Separators:
    """Interpolants for an unsatisfiable query.

    ``items`` is the per-cut list (a single formula for binary queries, the
    full I_0..I_n chain for sequences); tree queries fill ``labeling``.
    """

    items: list[Formula] | None = None
    labeling: dict[str, Formula] | None = None


InterpolationResult = NotUnsat | Separators


@dataclass
class SatResult:
    model: dict[Symbol, Fraction]
    is_sat = True


@dataclass
class UnsatResult:
    is_sat = False


SolveResult = SatResult | UnsatResult


class _CaseSat(Exception):
    def __init__(self, model: dict[Symbol, Fraction]):
        self.model = model


def _items(formula: Formula, fresh: FreshSymbols) -> list[Formula]:
    return conjuncts(eliminate_div(formula, fresh))


def _prepare(formula: Formula, theory: Theory, fresh: FreshSymbols) -> list[Formula]:
    return _items(rewrite_literals(formula, theory.sort, fresh), fresh)


def _first_or(items: Sequence[Formula]) -> int | None:
    for i, f in enumerate(items):
        if isinstance(f, OrF):
            return i
    return None


def _split(items: Sequence[Formula], at: int, case: Formula) -> list[Formula]:
    return list(items[:at]) + conjuncts(case) + list(items[at + 1 :])


def _leaf_check(items: Sequence[Formula], theory: Theory, branch_limit: int):
    atoms = [f.atom for f in items if isinstance(f, AtomF)]
    if theory is Theory.LIA:
        result = lia_check(atoms, branch_limit)
        if result.status == "resource-out":
            raise ResourceLimitExceeded(result.reason)
        if result.status == "sat":
            return result.model, None
        return None, (atoms, result.proof)
    verdict = lra_check(atoms)
    if verdict.is_sat:
        return concrete_model(atoms, verdict.model), None
    return None, (atoms, verdict.certificate)


def solve(
    items: Sequence[Formula], theory: Theory, branch_limit: int = 10_000
) -> SolveResult:
    """Satisfiability of a conjunction of rewritten formulas, by case split.

    Before splitting a disjunction, the theory atoms collected so far are
    checked on their own; an unsatisfiable core prunes every case below.
    """
    work = [g for f in items for g in conjuncts(f)]
    if any(isinstance(f, FalseF) for f in work):
        return UnsatResult()
    model, _ = _leaf_check(work, theory, branch_limit)
    if model is None:
        return UnsatResult()
    at = _first_or(work)
    if at is None:
        return SatResult(dict(model))
    for case in work[at].args:
        result = solve(_split(work, at, case), theory, branch_limit)
        if result.is_sat:
            return result
    return UnsatResult()


def _interp_cases(
    a_items: list[Formula],
    b_items: list[Formula],
    theory: Theory,
    branch_limit: int,
) -> Formula:
    if any(isinstance(f, FalseF) for f in a_items):
        return FALSE
    if any(isinstance(f, FalseF) for f in b_items):
        return TRUE
    # close on the atoms collected so far if they already conflict; the
    # resulting separator covers every case below this node
    a_atoms = [f.atom for f in a_items if isinstance(f, AtomF)]
    b_atoms = [f.atom for f in b_items if isinstance(f, AtomF)]
    if theory is Theory.LIA:
        result = lia_check(a_atoms + b_atoms, branch_limit)
        if result.status == "resource-out":
            raise ResourceLimitExceeded(result.reason)
        model = result.model if result.status == "sat" else None
        if model is None:
            return lia_interpolate(a_atoms, b_atoms, result.proof)
    else:
        verdict = lra_check(a_atoms + b_atoms)
        model = (
            concrete_model(a_atoms + b_atoms, verdict.model)
            if verdict.is_sat
            else None
        )
        if model is None:
            return lra_interpolate(a_atoms, b_atoms, verdict.certificate)
    at = _first_or(a_items)
    if at is not None:
        return disj(
            _interp_cases(_split(a_items, at, case), b_items, theory, branch_limit)
            for case in a_items[at].args
        )
    at = _first_or(b_items)
    if at is not None:
        return conj(
            _interp_cases(a_items, _split(b_items, at, case), theory, branch_limit)
            for case in b_items[at].args
        )
    raise _CaseSat(model)


def _extend_model(
    model: Mapping[Symbol, Fraction], symbols: Iterable[Symbol]
) -> dict[Symbol, Fraction]:
    out = {s: Fraction(0) for s in symbols}
    out.update(model)
    return out


def _interp_or_model(
    a_items: list[Formula],
    b_items: list[Formula],
    theory: Theory,
    branch_limit: int,
) -> tuple[Formula | None, dict[Symbol, Fraction] | None]:
    all_syms = {s for f in a_items + b_items for s in symbols_of(f)}
    try:
        return _interp_cases(a_items, b_items, theory, branch_limit), None
    except _CaseSat as hit:
        return None, _extend_model(hit.model, all_syms)


def binary_interpolant(
    a: Partition, b: Partition, theory: Theory, branch_limit: int = 10_000
) -> InterpolationResult:
    """Separator for a against b, or a model of their conjunction."""
    fresh = FreshSymbols()
    a_items = _prepare(a.formula, theory, fresh)
    b_items = _prepare(b.formula, theory, fresh)
    formula, model = _interp_or_model(a_items, b_items, theory, branch_limit)
    if model is not None:
        return NotUnsat(model)
    return Separators(items=[formula])


def sequence_interpolant(
    parts: Sequence[Partition], theory: Theory, branch_limit: int = 10_000
) -> InterpolationResult:
    """Inductive interpolant chain I_0 = true, ..., I_n = false.

    Computed by repeated binary interpolation with the previous chain
    element conjoined into the left side.
    """
    if not parts:
        raise ValueError("sequence interpolation needs at least one partition")
    fresh = FreshSymbols()
    prepared = [_prepare(p.formula, theory, fresh) for p in parts]
    n = len(parts)
    if n == 1:
        result = solve(prepared[0], theory, branch_limit)
        if result.is_sat:
            return NotUnsat(
                _extend_model(result.model, symbols_of(parts[0].formula))
            )
        return Separators(items=[TRUE, FALSE])
    chain: list[Formula] = [TRUE]
    current = TRUE
    for i in range(1, n):
        a_items = _items(current, fresh) + prepared[i - 1]
        b_items = [f for part in prepared[i:] for f in part]
        formula, model = _interp_or_model(a_items, b_items, theory, branch_limit)
        if model is not None:
            if i > 1:
                raise RuntimeError("interpolation chain broke on an unsat suffix")
            return NotUnsat(model)
        chain.append(formula)
        current = formula
    chain.append(FALSE)
    return Separators(items=chain)


# -- trees ---------------------------------------------------------------------


@dataclass
class TreeQuery:
    """A rooted tree of named partitions; parent[root] is None."""

    nodes: list[str]
    parent: dict[str, str | None]
    label: dict[str, Partition]

    def __post_init__(self):
        roots = [n for n in self.nodes if self.parent.get(n) is None]
        if len(roots) != 1:
            raise ValueError(f"tree needs exactly one root, found {roots}")
        self.root = roots[0]
        self.children: dict[str, list[str]] = {n: [] for n in self.nodes}
        for n in self.nodes:
            p = self.parent.get(n)
            if p is not None:
                if p not in self.children:
                    raise ValueError(f"unknown parent {p!r} of node {n!r}")
                self.children[p].append(n)
        for n in self.nodes:
            if n not in self.label:
                raise ValueError(f"node {n!r} has no label")
        seen: set[str] = set()
        stack = [self.root]
        while stack:
            n = stack.pop()
            if n in seen:
                raise ValueError("parent links contain a cycle")
            seen.add(n)
            stack.extend(self.children[n])
        if len(seen) != len(self.nodes):
            raise ValueError("tree is not connected")

    def subtree(self, node: str) -> list[str]:
        out = []
        stack = [node]
        while stack:
            n = stack.pop(0)
            out.append(n)
            stack.extend(self.children[n])
        return [n for n in self.nodes if n in set(out)]

    def postorder(self) -> list[str]:
        out: list[str] = []

        def visit(n: str) -> None:
            for c in self.children[n]:
                visit(c)
            out.append(n)

        visit(self.root)
        return out


def _tree_bottom_up(
    q: TreeQuery,
    prepared: dict[str, list[Formula]],
    theory: Theory,
    branch_limit: int,
    fresh: FreshSymbols,
) -> dict[str, Formula] | None:
    labels: dict[str, Formula] = {}
    for v in q.postorder():
        inside = set(q.subtree(v))
        child_items = [f for w in q.children[v] for f in _items(labels[w], fresh)]
        a_items = child_items + prepared[v]
        if v == q.root:
            if solve(a_items, theory, branch_limit).is_sat:
                return None
            labels[v] = FALSE
            continue
        b_items = [f for u in q.nodes if u not in inside for f in prepared[u]]
        formula, model = _interp_or_model(a_items, b_items, theory, branch_limit)
        if model is not None:
            return None
        labels[v] = formula
    return labels


def _tree_top_down(
    q: TreeQuery,
    prepared: dict[str, list[Formula]],
    theory: Theory,
    branch_limit: int,
    fresh: FreshSymbols,
) -> dict[str, Formula]:
    labels: dict[str, Formula] = {q.root: FALSE}
    order = [q.root]
    queue = [q.root]
    while queue:
        p = queue.pop(0)
        siblings = q.children[p]
        for idx, v in enumerate(siblings):
            inside = set(q.subtree(v))
            a_items = [f for u in q.nodes if u in inside for f in prepared[u]]
            b_items = []
            for j, s in enumerate(siblings):
                if j < idx:
                    b_items.extend(_items(labels[s], fresh))
                elif j > idx:
                    b_items.extend(
                        f for u in q.nodes if u in set(q.subtree(s)) for f in prepared[u]
                    )
            b_items.extend(prepared[p])
            b_items.extend(_items(negate(labels[p], theory.sort), fresh))
            formula, model = _interp_or_model(a_items, b_items, theory, branch_limit)
            if model is not None:
                raise RuntimeError("top-down tree query was satisfiable")
            labels[v] = formula
            order.append(v)
            queue.append(v)
    return labels


def tree_interpolant(
    q: TreeQuery, theory: Theory, branch_limit: int = 10_000
) -> InterpolationResult:
    """Tree interpolant labeling, or a model of the overall conjunction."""
    fresh = FreshSymbols()
    prepared = {n: _prepare(q.label[n].formula, theory, fresh) for n in q.nodes}
    overall = solve([f for n in q.nodes for f in prepared[n]], theory, branch_limit)
    if overall.is_sat:
        syms = {s for n in q.nodes for s in symbols_of(q.label[n].formula)}
        return NotUnsat(_extend_model(overall.model, syms))
    labels = _tree_bottom_up(q, prepared, theory, branch_limit, fresh)
    if labels is None:
        labels = _tree_top_down(q, prepared, theory, branch_limit, fresh)
    return Separators(labeling=labels)


# -- definitional checkers -------------------------------------------------------


@dataclass
class ClauseReport:
    passed: bool
    countermodel: dict[Symbol, Fraction] | None = None
    detail: str = ""


@dataclass
class SeparatorReport:
    entailment: ClauseReport
    refutation: ClauseReport
    signature: ClauseReport

    @property
    def ok(self) -> bool:
        return self.entailment.passed and self.refutation.passed and self.signature.passed


def _entails(
    premise_items: list[Formula],
    conclusion: Formula,
    theory: Theory,
    branch_limit: int,
    fresh: FreshSymbols,
) -> ClauseReport:
    query = premise_items + _items(negate(conclusion, theory.sort), fresh)
    result = solve(query, theory, branch_limit)
    if result.is_sat:
        return ClauseReport(False, result.model)
    return ClauseReport(True)


def check_separator(
    a: Partition,
    b: Partition,
    interpolant: Formula,
    theory: Theory,
    branch_limit: int = 10_000,
) -> SeparatorReport:
    """Check the two entailments and the signature clause of a separator."""
    fresh = FreshSymbols()
    a_items = _prepare(a.formula, theory, fresh)
    b_items = _prepare(b.formula, theory, fresh)
    i_rw = rewrite_literals(interpolant, theory.sort, fresh)
    entailment = _entails(a_items, i_rw, theory, branch_limit, fresh)
    joint = solve(b_items + _items(i_rw, fresh), theory, branch_limit)
    refutation = (
        ClauseReport(False, joint.model) if joint.is_sat else ClauseReport(True)
    )
    shared = a.signature() & b.signature()
    extra = symbols_of(interpolant) - shared
    signature = ClauseReport(
        not extra, detail="" if not extra else "outside shared signature: "
        + ", ".join(sorted(str(s) for s in extra))
    )
    return SeparatorReport(entailment, refutation, signature)


def check_sequence(
    parts: Sequence[Partition],
    chain: Sequence[Formula],
    theory: Theory,
    branch_limit: int = 10_000,
) -> bool:
    """Definitional check of an inductive interpolant chain."""
    n = len(parts)
    if len(chain) != n + 1:
        return False
    if not isinstance(chain[0], TrueF) or not isinstance(chain[n], FalseF):
        return False
    fresh = FreshSymbols()
    prepared = [_prepare(p.formula, theory, fresh) for p in parts]
    sigs = [p.signature() for p in parts]
    for i in range(1, n + 1):
        chain_rw = rewrite_literals(chain[i - 1], theory.sort, fresh)
        premise = _items(chain_rw, fresh) + prepared[i - 1]
        if not _entails(premise, rewrite_literals(chain[i], theory.sort, fresh),
                        theory, branch_limit, fresh).passed:
            return False
    for i in range(n + 1):
        before = frozenset().union(*sigs[:i]) if i else frozenset()
        after = frozenset().union(*sigs[i:]) if i < n else frozenset()
        if symbols_of(chain[i]) - (before & after):
            return False
    return True


def check_tree(
    q: TreeQuery,
    labels: Mapping[str, Formula],
    theory: Theory,
    branch_limit: int = 10_000,
) -> bool:
    """Definitional check of a tree interpolant labeling."""
    if not isinstance(labels[q.root], FalseF):
        return False
    fresh = FreshSymbols()
    prepared = {n: _prepare(q.label[n].formula, theory, fresh) for n in q.nodes}
    sigs = {n: q.label[n].signature() for n in q.nodes}
    for v in q.nodes:
        premise = [
            f
            for w in q.children[v]
            for f in _items(rewrite_literals(labels[w], theory.sort, fresh), fresh)
        ] + prepared[v]
        conclusion = rewrite_literals(labels[v], theory.sort, fresh)
        if not _entails(premise, conclusion, theory, branch_limit, fresh).passed:
            return False
        inside = set(q.subtree(v))
        sig_in = frozenset().union(*(sigs[u] for u in inside))
        outside = [u for u in q.nodes if u not in inside]
        sig_out = (
            frozenset().union(*(sigs[u] for u in outside)) if outside else frozenset()
        )
        if symbols_of(labels[v]) - (sig_in & sig_out):
            return False
    return True
