"""Atoms and quantifier-free formulas in negation normal form.

The input language allows equations, disequations, strict inequalities,
divisibility literals and arbitrary and/or/not structure.
:func:`rewrite_literals` lowers all of that to the solver language, which is
conjunctions/disjunctions of nonnegativity atoms only:

* ``s = t``            ->  ``0 <= s-t  and  0 <= t-s``
* ``s != t``           ->  ``0 < s-t  or  0 < t-s``
* over Int, ``0 < t``  ->  ``0 <= t-1``      (after scaling t integral)
* over Int, ``k | t``  ->  ``t = k*q``       (q fresh)
* over Int, ``!(k|t)`` ->  ``t = k*q + r  and  1 <= r <= k-1``  (q, r fresh)

Fresh symbols belong to the partition whose literal introduced them; callers
collect them from the :class:`FreshSymbols` allocator they pass in.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from math import lcm
from typing import Iterable, Mapping

from .terms import DivTerm, LinTerm, Rat, Sort, Symbol, euclid_div


class AtomKind(Enum):
    LEQ0 = "<="   # 0 <= t
    LT0 = "<"     # 0 <  t
    EQ0 = "="     # t == 0
    NEQ0 = "!="   # t != 0
    DIVIDES = "|"  # k | t


@dataclass(frozen=True)
class Atom:
    kind: AtomKind
    term: LinTerm
    modulus: int | None = None

    def __post_init__(self):
        if self.kind is AtomKind.DIVIDES:
            if self.modulus is None or self.modulus < 1:
                raise ValueError("divisibility atom needs a positive modulus")
            if self.term.sort() not in (None, Sort.INT):
                raise ValueError("divisibility atom over Int terms only")
        elif self.modulus is not None:
            raise ValueError("modulus only valid on divisibility atoms")

    def evaluate(self, assignment: Mapping[Symbol, Rat]) -> bool:
        value = self.term.evaluate(assignment)
        if self.kind is AtomKind.LEQ0:
            return value >= 0
        if self.kind is AtomKind.LT0:
            return value > 0
        if self.kind is AtomKind.EQ0:
            return value == 0
        if self.kind is AtomKind.NEQ0:
            return value != 0
        if value.denominator != 1:
            return False
        return value.numerator % self.modulus == 0

    def __str__(self) -> str:
        if self.kind is AtomKind.DIVIDES:
            return f"{self.modulus} | {self.term}"
        if self.kind in (AtomKind.EQ0, AtomKind.NEQ0):
            return f"{self.term} {self.kind.value} 0"
        return f"0 {self.kind.value} {self.term}"


def leq0(term: LinTerm) -> Atom:
    return Atom(AtomKind.LEQ0, term)


def lt0(term: LinTerm) -> Atom:
    return Atom(AtomKind.LT0, term)


# -- formula trees ------------------------------------------------------------


class Formula:
    __slots__ = ()


@dataclass(frozen=True)
class TrueF(Formula):
    def __str__(self) -> str:
        return "true"


@dataclass(frozen=True)
class FalseF(Formula):
    def __str__(self) -> str:
        return "false"


TRUE = TrueF()
FALSE = FalseF()


@dataclass(frozen=True)
class AtomF(Formula):
    atom: Atom

    def __str__(self) -> str:
        return str(self.atom)


@dataclass(frozen=True)
class NotF(Formula):
    arg: Formula

    def __str__(self) -> str:
        return f"!({self.arg})"


@dataclass(frozen=True)
class AndF(Formula):
    args: tuple[Formula, ...]

    def __str__(self) -> str:
        return "(" + " & ".join(str(a) for a in self.args) + ")"


@dataclass(frozen=True)
class OrF(Formula):
    args: tuple[Formula, ...]

    def __str__(self) -> str:
        return "(" + " | ".join(str(a) for a in self.args) + ")"


def _dedup(items: list[Formula]) -> list[Formula]:
    seen: set = set()
    out = []
    for f in items:
        key = formula_key(f)
        if key not in seen:
            seen.add(key)
            out.append(f)
    return out


def conj(args: Iterable[Formula]) -> Formula:
    """And with flattening, duplicate dropping and constant short-circuits."""
    flat: list[Formula] = []
    for a in args:
        if isinstance(a, FalseF):
            return FALSE
        if isinstance(a, TrueF):
            continue
        if isinstance(a, AndF):
            flat.extend(a.args)
        else:
            flat.append(a)
    flat = _dedup(flat)
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return AndF(tuple(flat))


def disj(args: Iterable[Formula]) -> Formula:
    flat: list[Formula] = []
    for a in args:
        if isinstance(a, TrueF):
            return TRUE
        if isinstance(a, FalseF):
            continue
        if isinstance(a, OrF):
            flat.extend(a.args)
        else:
            flat.append(a)
    flat = _dedup(flat)
    if not flat:
        return FALSE
    if len(flat) == 1:
        return flat[0]
    return OrF(tuple(flat))


def atom_formula(atom: Atom) -> Formula:
    """Atom as a formula, folding symbol-free atoms to a constant."""
    if atom.term.is_constant() and not atom.term.has_div():
        return TRUE if atom.evaluate({}) else FALSE
    return AtomF(atom)


def evaluate(formula: Formula, assignment: Mapping[Symbol, Rat]) -> bool:
    if isinstance(formula, TrueF):
        return True
    if isinstance(formula, FalseF):
        return False
    if isinstance(formula, AtomF):
        return formula.atom.evaluate(assignment)
    if isinstance(formula, NotF):
        return not evaluate(formula.arg, assignment)
    if isinstance(formula, AndF):
        return all(evaluate(a, assignment) for a in formula.args)
    if isinstance(formula, OrF):
        return any(evaluate(a, assignment) for a in formula.args)
    raise TypeError(f"not a formula: {formula!r}")


def symbols_of(formula: Formula) -> set[Symbol]:
    if isinstance(formula, (TrueF, FalseF)):
        return set()
    if isinstance(formula, AtomF):
        return formula.atom.term.symbols()
    if isinstance(formula, NotF):
        return symbols_of(formula.arg)
    if isinstance(formula, (AndF, OrF)):
        out: set[Symbol] = set()
        for a in formula.args:
            out |= symbols_of(a)
        return out
    raise TypeError(f"not a formula: {formula!r}")


def rename(formula: Formula, mapping: Mapping[Symbol, Symbol]) -> Formula:
    if isinstance(formula, (TrueF, FalseF)):
        return formula
    if isinstance(formula, AtomF):
        a = formula.atom
        return AtomF(Atom(a.kind, a.term.rename(mapping), a.modulus))
    if isinstance(formula, NotF):
        return NotF(rename(formula.arg, mapping))
    if isinstance(formula, AndF):
        return AndF(tuple(rename(a, mapping) for a in formula.args))
    if isinstance(formula, OrF):
        return OrF(tuple(rename(a, mapping) for a in formula.args))
    raise TypeError(f"not a formula: {formula!r}")


def shift_index(formula: Formula, offset: int, only_index: int | None = None) -> Formula:
    """Shift symbol indices by offset (optionally just one source index)."""
    syms = symbols_of(formula)
    mapping = {
        s: Symbol(s.name, s.sort, s.index + offset)
        for s in syms
        if only_index is None or s.index == only_index
    }
    return rename(formula, mapping)


def formula_key(formula: Formula) -> tuple:
    """Structural key with sorted and/or children; used for deduplication."""
    if isinstance(formula, TrueF):
        return ("true",)
    if isinstance(formula, FalseF):
        return ("false",)
    if isinstance(formula, AtomF):
        a = formula.atom
        return ("atom", a.kind.value, a.modulus, a.term.key())
    if isinstance(formula, NotF):
        return ("not", formula_key(formula.arg))
    tag = "and" if isinstance(formula, AndF) else "or"
    return (tag, tuple(sorted(formula_key(a) for a in formula.args)))


# -- rewriting ----------------------------------------------------------------


class FreshSymbols:
    """Deterministic fresh-symbol allocator; '!' never occurs in parsed names."""

    def __init__(self):
        self._count = 0
        self.created: list[Symbol] = []

    def make(self, prefix: str, sort: Sort) -> Symbol:
        sym = Symbol(f"{prefix}!{self._count}", sort)
        self._count += 1
        self.created.append(sym)
        return sym


def _scale_int(term: LinTerm) -> LinTerm:
    """Positive scaling making every non-constant coefficient an integer."""
    m = term.denominator_lcm()
    return term if m == 1 else term.scale(m)


def _strict_to_leq_int(term: LinTerm) -> Atom:
    # 0 < v + c over Int, v integer-valued: equivalent to 0 <= v - floor(-c) - 1.
    t = _scale_int(term)
    c = t.constant
    bound = Fraction((-c).__floor__() + 1)
    return leq0(LinTerm(t.coeffs) - LinTerm.const(bound))


def _ineq(term: LinTerm, strict: bool, sort: Sort) -> Formula:
    if sort is Sort.INT:
        if strict:
            return atom_formula(_strict_to_leq_int(term))
        return atom_formula(leq0(_scale_int(term)))
    return atom_formula(lt0(term) if strict else leq0(term))


def rewrite_literals(
    formula: Formula,
    sort: Sort,
    fresh: FreshSymbols | None = None,
    _positive: bool = True,
) -> Formula:
    """Lower a quantifier-free formula to NNF over Leq0/Lt0 atoms.

    Over Int the result uses Leq0 atoms with integer coefficients only.
    Divisibility rewriting draws fresh symbols from ``fresh``; passing None
    allocates a throwaway allocator (fine when the caller does not need to
    track partition-local symbols).
    """
    if fresh is None:
        fresh = FreshSymbols()
    f, pos = formula, _positive
    if isinstance(f, NotF):
        return rewrite_literals(f.arg, sort, fresh, not pos)
    if isinstance(f, TrueF):
        return TRUE if pos else FALSE
    if isinstance(f, FalseF):
        return FALSE if pos else TRUE
    if isinstance(f, AndF):
        parts = [rewrite_literals(a, sort, fresh, pos) for a in f.args]
        return conj(parts) if pos else disj(parts)
    if isinstance(f, OrF):
        parts = [rewrite_literals(a, sort, fresh, pos) for a in f.args]
        return disj(parts) if pos else conj(parts)
    assert isinstance(f, AtomF)
    atom = f.atom
    term_sort = atom.term.sort()
    if term_sort is not None and term_sort is not sort:
        raise ValueError(f"atom sort {term_sort.value} does not match theory sort {sort.value}")
    kind = atom.kind
    if kind is AtomKind.LEQ0:
        return _ineq(atom.term, False, sort) if pos else _ineq(-atom.term, True, sort)
    if kind is AtomKind.LT0:
        return _ineq(atom.term, True, sort) if pos else _ineq(-atom.term, False, sort)
    if kind is AtomKind.EQ0:
        if pos:
            return conj([_ineq(atom.term, False, sort), _ineq(-atom.term, False, sort)])
        return disj([_ineq(atom.term, True, sort), _ineq(-atom.term, True, sort)])
    if kind is AtomKind.NEQ0:
        if pos:
            return disj([_ineq(atom.term, True, sort), _ineq(-atom.term, True, sort)])
        return conj([_ineq(atom.term, False, sort), _ineq(-atom.term, False, sort)])
    # divisibility: k | t
    if sort is not Sort.INT:
        raise ValueError("divisibility literals require the Int theory")
    k = atom.modulus
    t = atom.term
    if t.denominator_lcm() != 1 or t.constant.denominator != 1:
        raise ValueError("divisibility term must have integer coefficients")
    if k == 1:
        return TRUE if pos else FALSE
    q = LinTerm.of(fresh.make("q", Sort.INT))
    if pos:
        diff = t - q.scale(k)
        return conj([atom_formula(leq0(diff)), atom_formula(leq0(-diff))])
    r = LinTerm.of(fresh.make("r", Sort.INT))
    diff = t - q.scale(k) - r
    return conj(
        [
            atom_formula(leq0(diff)),
            atom_formula(leq0(-diff)),
            atom_formula(leq0(r - LinTerm.const(1))),
            atom_formula(leq0(LinTerm.const(k - 1) - r)),
        ]
    )


def negate(formula: Formula, sort: Sort) -> Formula:
    """NNF negation of an already-rewritten formula (Leq0/Lt0 atoms only)."""
    if isinstance(formula, TrueF):
        return FALSE
    if isinstance(formula, FalseF):
        return TRUE
    if isinstance(formula, AndF):
        return disj([negate(a, sort) for a in formula.args])
    if isinstance(formula, OrF):
        return conj([negate(a, sort) for a in formula.args])
    if isinstance(formula, AtomF):
        atom = formula.atom
        if atom.kind is AtomKind.LEQ0:
            return _ineq(-atom.term, True, sort)
        if atom.kind is AtomKind.LT0:
            return _ineq(-atom.term, False, sort)
        raise ValueError(f"negate expects a rewritten formula, found {atom.kind}")
    raise ValueError("negate expects a rewritten formula")


def fold_constants(formula: Formula) -> Formula:
    """Fold symbol-free atoms and collapse trivial and/or structure."""
    if isinstance(formula, AtomF):
        return atom_formula(formula.atom)
    if isinstance(formula, NotF):
        inner = fold_constants(formula.arg)
        if isinstance(inner, TrueF):
            return FALSE
        if isinstance(inner, FalseF):
            return TRUE
        return NotF(inner)
    if isinstance(formula, AndF):
        return conj(fold_constants(a) for a in formula.args)
    if isinstance(formula, OrF):
        return disj(fold_constants(a) for a in formula.args)
    return formula


def conjuncts(formula: Formula) -> list[Formula]:
    """Flatten nested conjunctions into a list of non-And parts."""
    if isinstance(formula, TrueF):
        return []
    if isinstance(formula, AndF):
        out: list[Formula] = []
        for a in formula.args:
            out.extend(conjuncts(a))
        return out
    return [formula]
