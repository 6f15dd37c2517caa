"""Integer decision procedure: relaxation, gcd cuts, branch-and-bound.

``lia_check`` decides conjunctions of integer inequalities.  Each node of
the search solves the real relaxation; an integral model is a result, an
infeasible relaxation closes the node with a Farkas certificate.  Otherwise
one round of cut generation combines pairs of constraints to cancel one
symbol (the Comb/Simp shape of a cutting-planes proof) and tightens the
result with a gcd cut; only cuts whose rounding step actually strengthens
the inequality are kept.  When cuts dry up, the search branches on the
canonically smallest symbol with a fractional relaxation value.

Every constraint records how it was derived (input, branch hypothesis,
combination, division), so an unsatisfiability proof can be replayed with
interpolation annotations.  A Div step divides the annotation by the same
integer and pulls A-local multiples out of the div scope, and a branch
joins its children's interpolants with "or" when the branch symbol belongs
to the first partition (with "and" otherwise).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import floor, gcd, lcm
from typing import Mapping, Sequence

from .formulas import (
    AndF,
    Atom,
    AtomF,
    AtomKind,
    Formula,
    FreshSymbols,
    OrF,
    conj,
    disj,
    leq0,
)
from .lra import CertificateError, FarkasCertificate, lra_check
from .terms import DivTerm, LinTerm, Sort, Symbol, euclid_div, ext_div, term_key

__all__ = [
    "euclid_div",
    "gcd_cut",
    "lia_check",
    "lia_interpolate",
    "eliminate_div",
    "LiaSat",
    "LiaUnsat",
    "LiaResourceOut",
    "ProofLeaf",
    "ProofBranch",
    "ResourceLimitExceeded",
]

DEFAULT_BRANCH_LIMIT = 10_000
_MAX_BRANCH_DEPTH = 100
_MAX_CUTS_PER_NODE = 64


class ResourceLimitExceeded(Exception):
    """A configured search budget ran out before the query was decided."""


def gcd_cut(atom: Atom) -> Atom:
    """Tighten an integer inequality by its coefficient content.

    Divides all coefficients by their positive content beta and floors the
    constant term; no integer points are lost.  Constant atoms and atoms
    already in tight form come back unchanged.
    """
    if atom.kind is not AtomKind.LEQ0:
        raise ValueError("gcd_cut applies to Leq0 atoms")
    term = atom.term
    if term.is_constant():
        return atom
    beta = term.content()
    floored = Fraction(floor(term.constant / beta))
    if beta == 1 and floored == term.constant:
        return atom
    coeffs = {k: c / beta for k, c in term.coeffs.items()}
    return leq0(LinTerm(coeffs, floored))


# -- proof bookkeeping ---------------------------------------------------------


@dataclass(frozen=True)
class InputOrigin:
    index: int  # into the caller's atom list


@dataclass(frozen=True)
class BranchOrigin:
    symbol: Symbol
    bound: int
    upper: bool  # True for 0 <= bound - x, False for 0 <= x - bound - 1


@dataclass(frozen=True)
class CombOrigin:
    parts: tuple[tuple["Constraint", Fraction], ...]


@dataclass(frozen=True)
class DivOrigin:
    parent: "Constraint"
    beta: int


Origin = InputOrigin | BranchOrigin | CombOrigin | DivOrigin


@dataclass(frozen=True, eq=False)
class Constraint:
    """An inequality in the current set together with its derivation."""

    atom: Atom
    origin: Origin


def _tighten(node: Constraint) -> Constraint:
    """Scale to integer coefficients and apply the gcd cut.

    The scaling is recorded as a one-parent Comb and the cut as a Div so
    the annotation replay sees ordinary rule applications.  The constant is
    made integral as well: every constraint the cuts work on is then fully
    integer, which keeps div annotations over integer-valued terms only.
    """
    term = node.atom.term
    scale = lcm(term.denominator_lcm(), term.constant.denominator)
    if scale != 1:
        scaled = leq0(term.scale(scale))
        node = Constraint(scaled, CombOrigin(((node, Fraction(scale)),)))
        term = scaled.term
    cut = gcd_cut(node.atom)
    if cut != node.atom:
        beta = term.content()
        assert beta.denominator == 1
        node = Constraint(cut, DivOrigin(node, int(beta)))
    return node


@dataclass
class ProofLeaf:
    constraints: list[Constraint]
    certificate: FarkasCertificate  # indices into constraints


@dataclass
class ProofBranch:
    symbol: Symbol
    bound: int
    left_constraint: Constraint
    right_constraint: Constraint
    left: "ProofNode"
    right: "ProofNode"


ProofNode = ProofLeaf | ProofBranch


def proof_size(node: ProofNode) -> int:
    if isinstance(node, ProofLeaf):
        return 1
    return 1 + proof_size(node.left) + proof_size(node.right)


def cut_count(node: ProofNode) -> int:
    """Number of distinct strengthening Div steps used anywhere in the proof."""
    seen: set[int] = set()

    def walk_constraint(c: Constraint) -> None:
        if id(c) in seen:
            return
        seen.add(id(c))
        origin = c.origin
        if isinstance(origin, CombOrigin):
            for parent, _ in origin.parts:
                walk_constraint(parent)
        elif isinstance(origin, DivOrigin):
            divs.add(id(c))
            walk_constraint(origin.parent)

    divs: set[int] = set()

    def walk(node: ProofNode) -> None:
        if isinstance(node, ProofLeaf):
            for i in node.certificate.coeffs:
                walk_constraint(node.constraints[i])
        else:
            walk(node.left)
            walk(node.right)

    walk(node)
    return len(divs)


# -- verdicts ------------------------------------------------------------------


@dataclass
class LiaSat:
    model: dict[Symbol, Fraction]
    status = "sat"


@dataclass
class LiaUnsat:
    proof: ProofNode
    status = "unsat"


@dataclass
class LiaResourceOut:
    reason: str
    status = "resource-out"


LiaResult = LiaSat | LiaUnsat | LiaResourceOut


# -- the search ----------------------------------------------------------------


@dataclass
class _Refutation:
    constraints: list[Constraint]
    certificate: FarkasCertificate


def _antiparallel_conflict(
    working: list[Constraint], new_index: int
) -> FarkasCertificate | None:
    """Certificate from combining the new constraint with an opposite one.

    Detects the Comb+Con ending of a cutting-planes proof: two constraints
    whose linear parts are negative multiples of each other and whose
    weighted constant sum is negative.
    """
    t_new = working[new_index].atom.term
    lin_new = t_new.linear_part()
    if lin_new.is_constant():
        return None
    anchor, c_new = next(iter(lin_new.coeffs.items()))
    for i in range(new_index):
        t_old = working[i].atom.term
        c_old = t_old.coeff(anchor)
        if c_old == 0 or (c_old > 0) == (c_new > 0):
            continue
        lam = -c_old / c_new
        if t_old.linear_part() != lin_new.scale(-lam):
            continue
        if lam * t_new.constant + t_old.constant < 0:
            return FarkasCertificate({i: Fraction(1), new_index: lam})
    return None


_SATURATION_PASSES = 4
_MAX_TEMP_COMBOS = 96


def _eliminate_pair(ci: Constraint, cj: Constraint) -> list[Constraint]:
    """All one-symbol eliminations between two constraints."""
    out = []
    ti, tj = ci.atom.term, cj.atom.term
    shared = sorted(set(ti.coeffs) & set(tj.coeffs), key=term_key)
    for key in shared:
        ai, aj = ti.coeffs[key], tj.coeffs[key]
        if (ai > 0) == (aj > 0):
            continue
        # smallest positive weights cancelling the shared key
        wi, wj = abs(aj), abs(ai)
        if wi.denominator == 1 and wj.denominator == 1:
            g = gcd(wi.numerator, wj.numerator)
            wi, wj = wi / g, wj / g
        combined = ti.scale(wi) + tj.scale(wj)
        if combined.is_constant():
            continue
        if any(abs(c.numerator) > 10**9 for c in combined.coeffs.values()):
            continue  # runaway coefficients add nothing useful
        out.append(Constraint(leq0(combined), CombOrigin(((ci, wi), (cj, wj)))))
    return out


def _cut_candidates(
    constraints: list[Constraint], known: set[Atom], slots: int
) -> list[Constraint] | _Refutation:
    """Saturating passes of pairwise eliminations followed by gcd cuts.

    Combinations whose gcd cut actually strengthens become new constraints;
    the others join a bounded pool of intermediates so that chains of
    eliminations (combine, combine again, then round) stay reachable.
    Returns a refutation as soon as a freshly cut constraint directly
    contradicts an earlier one.
    """
    working = list(constraints)
    solid = list(constraints)
    cuts: list[Constraint] = []
    temp_count = 0
    scanned = 0  # pairs within working[:scanned] have all been processed
    for _ in range(_SATURATION_PASSES):
        total = len(working)
        if scanned >= total:
            break
        for j in range(scanned, total):
            for i in range(j):
                for comb in _eliminate_pair(working[i], working[j]):
                    if comb.atom in known:
                        continue
                    cut = _tighten(comb)
                    if cut.atom == comb.atom:
                        # no strengthening: keep as an intermediate only
                        if temp_count < _MAX_TEMP_COMBOS:
                            known.add(comb.atom)
                            working.append(comb)
                            temp_count += 1
                        continue
                    if cut.atom in known:
                        continue
                    known.add(comb.atom)
                    known.add(cut.atom)
                    cuts.append(cut)
                    working.append(cut)
                    solid.append(cut)
                    cert = _antiparallel_conflict(solid, len(solid) - 1)
                    if cert is not None:
                        cert._canonicalize()
                        return _Refutation(solid, cert)
                    if len(cuts) >= slots:
                        return cuts
        scanned = total
    return cuts


class _Budget:
    def __init__(self, limit: int):
        self.remaining = limit

    def spend(self) -> None:
        if self.remaining <= 0:
            raise ResourceLimitExceeded("branch budget exhausted")
        self.remaining -= 1


def _solve(
    constraints: list[Constraint], budget: _Budget, depth: int = 0
) -> LiaSat | ProofNode:
    if depth > _MAX_BRANCH_DEPTH:
        raise ResourceLimitExceeded("branch depth exceeded")
    known = {c.atom for c in constraints}
    cuts_done = False
    while True:
        verdict = lra_check([c.atom for c in constraints])
        if not verdict.is_sat:
            return ProofLeaf(list(constraints), verdict.certificate)
        model = {s: v.real for s, v in verdict.model.items()}
        fractional = sorted(
            (s for s, v in model.items() if v.denominator != 1), key=term_key
        )
        if not fractional:
            return LiaSat(model)
        if not cuts_done:
            cuts_done = True
            new_cuts = _cut_candidates(constraints, known, _MAX_CUTS_PER_NODE)
            if isinstance(new_cuts, _Refutation):
                return ProofLeaf(new_cuts.constraints, new_cuts.certificate)
            if new_cuts:
                constraints = constraints + new_cuts
                continue
        budget.spend()
        x = fractional[0]
        bound = floor(model[x])
        if abs(bound) > 10**7:
            # relaxation optima running away: branching cannot converge
            raise ResourceLimitExceeded("branch bound magnitude")
        left_c = Constraint(leq0(LinTerm({x: -1}, bound)), BranchOrigin(x, bound, True))
        right_c = Constraint(
            leq0(LinTerm({x: 1}, -bound - 1)), BranchOrigin(x, bound, False)
        )
        left = _solve(constraints + [left_c], budget, depth + 1)
        if isinstance(left, LiaSat):
            return left
        right = _solve(constraints + [right_c], budget, depth + 1)
        if isinstance(right, LiaSat):
            return right
        return ProofBranch(x, bound, left_c, right_c, left, right)


def lia_check(atoms: Sequence[Atom], branch_limit: int = DEFAULT_BRANCH_LIMIT) -> LiaResult:
    """Decide a conjunction of integer Leq0 atoms.

    Atoms must be rewritten (no equations, strict inequalities or
    divisibility).  The proof returned for unsatisfiable inputs refers to
    the given atom order.
    """
    for a in atoms:
        if a.kind is not AtomKind.LEQ0:
            raise ValueError(f"lia_check expects rewritten Leq0 atoms, got {a}")
        if a.term.sort() not in (None, Sort.INT):
            raise ValueError("lia_check expects integer-sorted atoms")
        if a.term.has_div():
            raise ValueError("div terms must be eliminated before solving")
    constraints = [
        _tighten(Constraint(a, InputOrigin(i))) for i, a in enumerate(atoms)
    ]
    budget = _Budget(branch_limit)
    try:
        outcome = _solve(constraints, budget)
    except ResourceLimitExceeded as exc:
        return LiaResourceOut(str(exc))
    if isinstance(outcome, LiaSat):
        base = {s: Fraction(0) for a in atoms for s in a.term.symbols()}
        base.update(outcome.model)
        return LiaSat(base)
    return LiaUnsat(outcome)


# -- interpolation -------------------------------------------------------------


def _annotation(constraint: Constraint, n_a: int, a_sig: frozenset[Symbol],
                memo: dict[int, LinTerm]) -> LinTerm:
    cached = memo.get(id(constraint))
    if cached is not None:
        return cached
    origin = constraint.origin
    if isinstance(origin, InputOrigin):
        value = constraint.atom.term if origin.index < n_a else LinTerm()
    elif isinstance(origin, BranchOrigin):
        value = constraint.atom.term if origin.symbol in a_sig else LinTerm()
    elif isinstance(origin, CombOrigin):
        value = LinTerm()
        for parent, weight in origin.parts:
            value = value + _annotation(parent, n_a, a_sig, memo).scale(weight)
    else:
        value = ext_div(_annotation(origin.parent, n_a, a_sig, memo), origin.beta)
    memo[id(constraint)] = value
    return value


def lia_interpolate(
    a_atoms: Sequence[Atom], b_atoms: Sequence[Atom], proof: ProofNode
) -> Formula:
    """Separator extracted from an unsatisfiability proof for a_atoms + b_atoms.

    Leaf certificates combine the annotated constraints; a branch on a
    symbol of the first partition disjoins the child separators, any other
    branch conjoins them.
    """
    n_a = len(a_atoms)
    n_total = n_a + len(b_atoms)
    a_sig = frozenset(s for a in a_atoms for s in a.term.symbols())
    memo: dict[int, LinTerm] = {}

    def check_inputs(c: Constraint, seen: set[int]) -> None:
        if id(c) in seen:
            return
        seen.add(id(c))
        origin = c.origin
        if isinstance(origin, InputOrigin):
            if origin.index < 0 or origin.index >= n_total:
                raise CertificateError(f"proof references unknown input atom {origin.index}")
            expected = (
                a_atoms[origin.index]
                if origin.index < n_a
                else b_atoms[origin.index - n_a]
            )
            if c.atom != expected:
                raise CertificateError(f"proof input {origin.index} does not match the query")
        elif isinstance(origin, CombOrigin):
            for parent, _ in origin.parts:
                check_inputs(parent, seen)
        elif isinstance(origin, DivOrigin):
            check_inputs(origin.parent, seen)

    seen: set[int] = set()

    def walk(node: ProofNode) -> Formula:
        if isinstance(node, ProofLeaf):
            total = LinTerm()
            for i in sorted(node.certificate.coeffs):
                if i < 0 or i >= len(node.constraints):
                    raise CertificateError(f"leaf certificate references constraint {i}")
                c = node.constraints[i]
                check_inputs(c, seen)
                weight = node.certificate.coeffs[i]
                total = total + _annotation(c, n_a, a_sig, memo).scale(weight)
            return AtomF(leq0(total))
        left = walk(node.left)
        right = walk(node.right)
        if node.symbol in a_sig:
            return disj([left, right])
        return conj([left, right])

    return walk(proof)


# -- div elimination -----------------------------------------------------------


def eliminate_div(formula: Formula, fresh: FreshSymbols | None = None) -> Formula:
    """Replace div terms by fresh quotient symbols with defining constraints.

    Each u div b becomes q with u = b*q + r and 0 <= r <= b-1 conjoined at
    the atom that contained it; sound here because formulas and their
    negations are only ever checked for joint satisfiability.
    """
    if fresh is None:
        fresh = FreshSymbols()

    def rewrite_term(term: LinTerm, defs: list[Formula]) -> LinTerm:
        items: list[tuple] = []
        for key, c in term.coeffs.items():
            if isinstance(key, DivTerm):
                num = rewrite_term(key.num, defs)
                q = LinTerm.of(fresh.make("q", Sort.INT))
                r = LinTerm.of(fresh.make("r", Sort.INT))
                diff = num - q.scale(key.den) - r
                defs.append(AtomF(leq0(diff)))
                defs.append(AtomF(leq0(-diff)))
                defs.append(AtomF(leq0(r)))
                defs.append(AtomF(leq0(LinTerm.const(key.den - 1) - r)))
                for k2, c2 in q.coeffs.items():
                    items.append((k2, c2 * c))
            else:
                items.append((key, c))
        return LinTerm(items, term.constant)

    def walk(f: Formula) -> Formula:
        if isinstance(f, AtomF):
            if not f.atom.term.has_div():
                return f
            defs: list[Formula] = []
            new_term = rewrite_term(f.atom.term, defs)
            return conj([AtomF(Atom(f.atom.kind, new_term, f.atom.modulus))] + defs)
        if isinstance(f, AndF):
            return conj([walk(a) for a in f.args])
        if isinstance(f, OrF):
            return disj([walk(a) for a in f.args])
        return f

    return walk(formula)
