"""Decision procedure for conjunctions of linear real inequalities.

The solver is a bounds-propagating exact-rational simplex in the usual
SMT style: every input inequality ``0 <= t`` (or ``0 < t``) becomes a slack
variable equal to the linear part of ``t`` with a lower bound ``-constant``
(plus an infinitesimal delta for strict atoms).  Pivoting uses Bland's rule
on a fixed variable numbering, so runs are deterministic and terminating.

On an infeasible instance the conflicting tableau row directly yields a
nonnegative combination of input atoms whose sum is a contradictory
constant, returned as a :class:`FarkasCertificate` (canonicalized to
coprime integer coefficients).  Interpolation replays such a certificate
through annotated sequent rules: hypotheses from the first partition
contribute their own term to the annotation, hypotheses from the second
contribute zero, and combinations add annotations with the certificate
weights.  The annotation of the final contradictory inequality is the
separator.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm
from typing import Mapping, Sequence

from .formulas import Atom, AtomF, AtomKind, Formula, leq0, lt0
from .terms import DeltaRational, LinTerm, Rat, Symbol, ZERO_DELTA, term_key


class CertificateError(Exception):
    """A certificate or proof does not match the atoms it claims to refute."""


@dataclass
class FarkasCertificate:
    """Nonnegative atom weights whose combination is contradictory.

    Keys index into the atom list the certificate was produced for.  The
    combination of the weighted atom terms must normalize to a constant that
    is negative, or nonpositive with at least one strict atom weighted
    positively.  Zero weights are never stored.
    """

    coeffs: dict[int, Fraction]

    def combination(self, atoms: Sequence[Atom]) -> LinTerm:
        total = LinTerm()
        for i, c in self.coeffs.items():
            if i < 0 or i >= len(atoms):
                raise CertificateError(f"certificate references atom {i}")
            total = total + atoms[i].term.scale(c)
        return total

    def is_strict(self, atoms: Sequence[Atom]) -> bool:
        return any(atoms[i].kind is AtomKind.LT0 and c > 0 for i, c in self.coeffs.items())

    def validate(self, atoms: Sequence[Atom]) -> None:
        if not self.coeffs:
            raise CertificateError("empty certificate")
        if any(c <= 0 for c in self.coeffs.values()):
            raise CertificateError("certificate coefficients must be positive")
        total = self.combination(atoms)
        if not total.is_constant():
            raise CertificateError(f"combination is not constant: {total}")
        if total.constant < 0:
            return
        if total.constant == 0 and self.is_strict(atoms):
            return
        raise CertificateError(f"combination is not contradictory: 0 <= {total}")

    def _canonicalize(self) -> None:
        self.coeffs = {i: c for i, c in sorted(self.coeffs.items()) if c != 0}
        if not self.coeffs:
            return
        dens = 1
        nums = 0
        for c in self.coeffs.values():
            dens = lcm(dens, c.denominator)
            nums = gcd(nums, c.numerator)
        factor = Fraction(dens, nums)
        self.coeffs = {i: c * factor for i, c in self.coeffs.items()}


@dataclass
class LraSat:
    model: dict[Symbol, DeltaRational]
    is_sat = True


@dataclass
class LraUnsat:
    certificate: FarkasCertificate
    is_sat = False


LraVerdict = LraSat | LraUnsat


class _Simplex:
    """General simplex over slack variables with lower bounds only.

    Variable numbering: original symbols in canonical order get ids
    0..n-1, the slack for input atom i gets id n+i.  Bland's rule picks the
    smallest violated basic id and then the smallest suitable nonbasic id.
    """

    def __init__(self, atoms: Sequence[Atom]):
        symbols = sorted({s for a in atoms for s in a.term.symbols()}, key=term_key)
        self.nsyms = len(symbols)
        self.symbols = symbols
        self.var_of = {s: i for i, s in enumerate(symbols)}
        self.rows: dict[int, dict[int, Fraction]] = {}
        self.lower: dict[int, DeltaRational] = {}
        self.assign: dict[int, DeltaRational] = {}
        self.slack_atom: dict[int, int] = {}
        self.basic: set[int] = set()
        for i in range(self.nsyms):
            self.assign[i] = ZERO_DELTA
        self.trivial_conflict: int | None = None
        for i, atom in enumerate(atoms):
            term = atom.term
            strict = atom.kind is AtomKind.LT0
            if term.is_constant():
                ok = term.constant > 0 if strict else term.constant >= 0
                if not ok and self.trivial_conflict is None:
                    self.trivial_conflict = i
                continue
            var = self.nsyms + i
            self.slack_atom[var] = i
            self.rows[var] = {self.var_of[s]: c for s, c in term.coeffs.items()}
            self.basic.add(var)
            self.lower[var] = DeltaRational(-term.constant, Fraction(1 if strict else 0))
            self.assign[var] = ZERO_DELTA

    def _violated_basic(self) -> int | None:
        worst = None
        for var in self.basic:
            bound = self.lower.get(var)
            if bound is not None and self.assign[var] < bound:
                if worst is None or var < worst:
                    worst = var
        return worst

    def _suitable(self, var: int, coeff: Fraction) -> bool:
        # increasing the violated basic var: positive columns can always grow
        # (no upper bounds exist), negative columns must be free to shrink.
        if coeff > 0:
            return True
        bound = self.lower.get(var)
        return bound is None or self.assign[var] > bound

    def _pivot(self, basic: int, enter: int) -> None:
        row = self.rows.pop(basic)
        a = row.pop(enter)
        new_row = {basic: Fraction(1) / a}
        for var, c in row.items():
            new_row[var] = -c / a
        self.rows[enter] = new_row
        self.basic.discard(basic)
        self.basic.add(enter)
        for other, orow in self.rows.items():
            if other == enter:
                continue
            c = orow.pop(enter, None)
            if c is None:
                continue
            for var, d in new_row.items():
                val = orow.get(var, Fraction(0)) + c * d
                if val == 0:
                    orow.pop(var, None)
                else:
                    orow[var] = val

    def _pivot_and_update(self, basic: int, enter: int, target: DeltaRational) -> None:
        a = self.rows[basic][enter]
        theta = (target - self.assign[basic]).scale(Fraction(1) / a)
        self.assign[basic] = target
        self.assign[enter] = self.assign[enter] + theta
        for other, orow in self.rows.items():
            if other == basic:
                continue
            c = orow.get(enter)
            if c:
                self.assign[other] = self.assign[other] + theta.scale(c)
        self._pivot(basic, enter)

    def check(self) -> LraVerdict:
        if self.trivial_conflict is not None:
            cert = FarkasCertificate({self.trivial_conflict: Fraction(1)})
            return LraUnsat(cert)
        while True:
            violated = self._violated_basic()
            if violated is None:
                model = {s: self.assign[i] for s, i in self.var_of.items()}
                return LraSat(model)
            row = self.rows[violated]
            enter = None
            for var in sorted(row):
                if self._suitable(var, row[var]):
                    enter = var
                    break
            if enter is None:
                coeffs = {self.slack_atom[violated]: Fraction(1)}
                for var, c in row.items():
                    coeffs[self.slack_atom[var]] = coeffs.get(self.slack_atom[var], Fraction(0)) - c
                cert = FarkasCertificate(coeffs)
                cert._canonicalize()
                return LraUnsat(cert)
            self._pivot_and_update(violated, enter, self.lower[violated])


def lra_check(atoms: Sequence[Atom]) -> LraVerdict:
    """Decide a conjunction of Leq0/Lt0 atoms over the rationals.

    Integer-sorted atoms are allowed; the result is then the real relaxation.
    """
    for a in atoms:
        if a.kind not in (AtomKind.LEQ0, AtomKind.LT0):
            raise ValueError(f"lra_check expects rewritten inequality atoms, got {a}")
        if a.term.has_div():
            raise ValueError("div terms must be eliminated before solving")
    return _Simplex(atoms).check()


def admissible_delta(atoms: Sequence[Atom], model: Mapping[Symbol, DeltaRational]) -> Fraction:
    """A concrete positive value for delta keeping every atom satisfied.

    Half the smallest bound imposed by an atom whose value decreases with
    delta; 1 when no atom constrains it.
    """
    limit = None
    for a in atoms:
        value = a.term.evaluate_delta(model)
        if value.eps < 0:
            bound = value.real / -value.eps
            if limit is None or bound < limit:
                limit = bound
    if limit is None:
        return Fraction(1)
    return min(Fraction(1), limit / 2)


def concrete_model(
    atoms: Sequence[Atom], model: Mapping[Symbol, DeltaRational]
) -> dict[Symbol, Fraction]:
    delta = admissible_delta(atoms, model)
    return {s: v.concrete(delta) for s, v in model.items()}


@dataclass
class AnnotatedIneq:
    """Final sequent of an interpolating replay: inequality plus annotation.

    The annotation is the contribution of the first partition; the
    inequality term minus the annotation normalizes to a term over the
    second partition's symbols.
    """

    ineq: Atom
    annotation: LinTerm


def _split_ids(n_a: int, n_b: int, cert: FarkasCertificate) -> None:
    for i in cert.coeffs:
        if i < 0 or i >= n_a + n_b:
            raise CertificateError(f"certificate references unknown atom {i}")


def replay_annotated(
    a_atoms: Sequence[Atom], b_atoms: Sequence[Atom], cert: FarkasCertificate
) -> AnnotatedIneq:
    """Replay a certificate through the annotated rules (Hyp/Comb/Simp).

    Certificate indices refer to a_atoms + b_atoms in order.
    """
    _split_ids(len(a_atoms), len(b_atoms), cert)
    atoms = list(a_atoms) + list(b_atoms)
    combined = LinTerm()
    annotation = LinTerm()
    strict = False
    for i in sorted(cert.coeffs):
        weight = cert.coeffs[i]
        combined = combined + atoms[i].term.scale(weight)
        strict = strict or atoms[i].kind is AtomKind.LT0
        if i < len(a_atoms):
            annotation = annotation + atoms[i].term.scale(weight)
    ineq = lt0(combined) if strict else leq0(combined)
    return AnnotatedIneq(ineq, annotation)


def lra_interpolate(
    a_atoms: Sequence[Atom], b_atoms: Sequence[Atom], cert: FarkasCertificate
) -> Formula:
    """Separator for an unsatisfiable split conjunction of inequalities.

    The separator is the certificate-weighted combination of the first
    partition's atoms, strict when a strict atom from that side carries
    positive weight.
    """
    final = replay_annotated(a_atoms, b_atoms, cert)
    a_strict = any(
        a_atoms[i].kind is AtomKind.LT0 for i in cert.coeffs if i < len(a_atoms)
    )
    return AtomF(lt0(final.annotation) if a_strict else leq0(final.annotation))
