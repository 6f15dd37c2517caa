"""Exact arithmetic building blocks: sorts, symbols, linear terms.

All values here are immutable after construction and safe to share between
threads.  Rational coefficients are plain ``fractions.Fraction`` (always
reduced, positive denominator).  Linear terms map symbols (or integer
division terms, see :class:`DivTerm`) to nonzero rational coefficients and
keep their entries in a canonical order so that printing and hashing are
deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Iterator, Mapping, Union

Rat = Union[int, Fraction]


class Sort(Enum):
    INT = "Int"
    REAL = "Real"


@dataclass(frozen=True)
class Symbol:
    """A sorted constant symbol.

    ``index`` distinguishes unrolled copies of the same program variable:
    index 0 is the plain variable, index 1 its primed copy, and in a k-step
    unrolling index i is the copy at step i.
    """

    name: str
    sort: Sort = Sort.INT
    index: int = 0

    def primed(self, shift: int = 1) -> "Symbol":
        return Symbol(self.name, self.sort, self.index + shift)

    def __str__(self) -> str:
        if self.index == 0:
            return self.name
        if self.index == 1:
            return self.name + "'"
        return f"{self.name}@{self.index}"


def term_key(key: "TermKey") -> tuple:
    """Canonical total order on term keys: sort, name, index; DivTerms last."""
    if isinstance(key, Symbol):
        return (0, key.sort.value, key.name, key.index)
    return (1, key.den, key.num.key())


@dataclass(frozen=True)
class DeltaRational:
    """A rational plus a coefficient of a positive infinitesimal delta.

    Used as model values in the presence of strict inequalities; ordering is
    lexicographic (real part first).
    """

    real: Fraction
    eps: Fraction = Fraction(0)

    @staticmethod
    def of(value: Rat, eps: Rat = 0) -> "DeltaRational":
        return DeltaRational(Fraction(value), Fraction(eps))

    def __add__(self, other: "DeltaRational") -> "DeltaRational":
        return DeltaRational(self.real + other.real, self.eps + other.eps)

    def __sub__(self, other: "DeltaRational") -> "DeltaRational":
        return DeltaRational(self.real - other.real, self.eps - other.eps)

    def __neg__(self) -> "DeltaRational":
        return DeltaRational(-self.real, -self.eps)

    def scale(self, factor: Rat) -> "DeltaRational":
        f = Fraction(factor)
        return DeltaRational(self.real * f, self.eps * f)

    def _cmp_key(self) -> tuple[Fraction, Fraction]:
        return (self.real, self.eps)

    def __lt__(self, other: "DeltaRational") -> bool:
        return self._cmp_key() < other._cmp_key()

    def __le__(self, other: "DeltaRational") -> bool:
        return self._cmp_key() <= other._cmp_key()

    def __gt__(self, other: "DeltaRational") -> bool:
        return self._cmp_key() > other._cmp_key()

    def __ge__(self, other: "DeltaRational") -> bool:
        return self._cmp_key() >= other._cmp_key()

    def concrete(self, delta: Fraction) -> Fraction:
        return self.real + self.eps * delta

    def __str__(self) -> str:
        if self.eps == 0:
            return str(self.real)
        return f"{self.real}+{self.eps}d"


ZERO_DELTA = DeltaRational(Fraction(0))


def euclid_div(a: int, b: int) -> int:
    """Euclidean quotient: the unique q with a = b*q + r and 0 <= r < |b|."""
    if b == 0:
        raise ZeroDivisionError("euclid_div by zero")
    if b > 0:
        return a // b
    return -(a // -b)


class LinTerm:
    """A linear combination of term keys plus a rational constant.

    Keys are symbols or :class:`DivTerm` values.  No stored coefficient is
    zero and entries are kept in the canonical key order; equal terms compare
    and hash equal.
    """

    __slots__ = ("coeffs", "constant", "_key")

    def __init__(
        self,
        coeffs: Mapping["TermKey", Rat] | Iterable[tuple["TermKey", Rat]] = (),
        constant: Rat = 0,
    ):
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        acc: dict[TermKey, Fraction] = {}
        for key, c in items:
            c = Fraction(c)
            if key in acc:
                acc[key] += c
            else:
                acc[key] = c
        cleaned = {k: acc[k] for k in sorted(acc, key=term_key) if acc[k] != 0}
        self.coeffs: dict[TermKey, Fraction] = cleaned
        self.constant: Fraction = Fraction(constant)
        self._key: tuple | None = None

    # -- construction helpers ------------------------------------------------

    @staticmethod
    def of(symbol: Symbol, coeff: Rat = 1) -> "LinTerm":
        return LinTerm({symbol: coeff})

    @staticmethod
    def const(value: Rat) -> "LinTerm":
        return LinTerm((), value)

    # -- algebra ------------------------------------------------------------

    def __add__(self, other: "LinTerm") -> "LinTerm":
        merged = dict(self.coeffs)
        for k, c in other.coeffs.items():
            merged[k] = merged.get(k, Fraction(0)) + c
        return LinTerm(merged, self.constant + other.constant)

    def __sub__(self, other: "LinTerm") -> "LinTerm":
        return self + other.scale(-1)

    def __neg__(self) -> "LinTerm":
        return self.scale(-1)

    def scale(self, factor: Rat) -> "LinTerm":
        f = Fraction(factor)
        if f == 0:
            return LinTerm()
        return LinTerm({k: c * f for k, c in self.coeffs.items()}, self.constant * f)

    def add_const(self, value: Rat) -> "LinTerm":
        return LinTerm(self.coeffs, self.constant + Fraction(value))

    def is_constant(self) -> bool:
        return not self.coeffs

    def linear_part(self) -> "LinTerm":
        return LinTerm(self.coeffs)

    def coeff(self, key: "TermKey") -> Fraction:
        return self.coeffs.get(key, Fraction(0))

    def has_div(self) -> bool:
        return any(isinstance(k, DivTerm) for k in self.coeffs)

    # -- inspection ----------------------------------------------------------

    def symbols(self) -> set[Symbol]:
        out: set[Symbol] = set()
        for k in self.coeffs:
            if isinstance(k, Symbol):
                out.add(k)
            else:
                out |= k.num.symbols()
        return out

    def sort(self) -> Sort | None:
        """Common sort of the symbols, or None for a constant term."""
        sorts = {s.sort for s in self.symbols()}
        if not sorts:
            return None
        if len(sorts) > 1:
            raise ValueError(f"mixed-sort term: {self}")
        return sorts.pop()

    def denominator_lcm(self) -> int:
        """lcm of coefficient denominators (constant excluded)."""
        out = 1
        for c in self.coeffs.values():
            out = lcm(out, c.denominator)
        return out

    def content(self) -> Fraction:
        """Positive rational content of the non-constant coefficients."""
        if not self.coeffs:
            return Fraction(1)
        nums = 0
        dens = 1
        for c in self.coeffs.values():
            nums = gcd(nums, abs(c.numerator))
            dens = lcm(dens, c.denominator)
        return Fraction(nums, dens)

    def evaluate(self, assignment: Mapping[Symbol, Rat]) -> Fraction:
        total = self.constant
        for k, c in self.coeffs.items():
            total += c * _key_value(k, assignment)
        return total

    def evaluate_delta(self, assignment: Mapping[Symbol, DeltaRational]) -> DeltaRational:
        total = DeltaRational(self.constant)
        for k, c in self.coeffs.items():
            if not isinstance(k, Symbol):
                raise ValueError("delta evaluation over plain symbols only")
            total = total + assignment.get(k, ZERO_DELTA).scale(c)
        return total

    def rename(self, mapping: Mapping[Symbol, Symbol]) -> "LinTerm":
        items = []
        for k, c in self.coeffs.items():
            if isinstance(k, Symbol):
                items.append((mapping.get(k, k), c))
            else:
                items.append((DivTerm(k.num.rename(mapping), k.den), c))
        return LinTerm(items, self.constant)

    # -- identity ------------------------------------------------------------

    def key(self) -> tuple:
        if self._key is None:
            self._key = (
                tuple((term_key(k), c) for k, c in self.coeffs.items()),
                self.constant,
            )
        return self._key

    def __eq__(self, other: object) -> bool:
        return isinstance(other, LinTerm) and self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def __iter__(self) -> Iterator[tuple["TermKey", Fraction]]:
        return iter(self.coeffs.items())

    def __repr__(self) -> str:
        return f"LinTerm({self})"

    def __str__(self) -> str:
        parts = []
        for k, c in self.coeffs.items():
            name = str(k)
            if c == 1:
                parts.append(name)
            elif c == -1:
                parts.append(f"-{name}")
            else:
                parts.append(f"{c}*{name}")
        if self.constant != 0 or not parts:
            parts.append(str(self.constant))
        return " + ".join(parts).replace("+ -", "- ")


@dataclass(frozen=True)
class DivTerm:
    """Euclidean integer division of a term by a positive integer literal."""

    num: LinTerm
    den: int

    def __post_init__(self):
        if self.den < 1:
            raise ValueError("DivTerm denominator must be a positive integer")

    def __str__(self) -> str:
        return f"({self.num}) div {self.den}"

    def __hash__(self) -> int:
        return hash((self.num.key(), self.den))


TermKey = Union[Symbol, DivTerm]


def _key_value(key: TermKey, assignment: Mapping[Symbol, Rat]) -> Fraction:
    if isinstance(key, Symbol):
        return Fraction(assignment.get(key, 0))
    value = key.num.evaluate(assignment)
    if value.denominator != 1:
        raise ValueError(f"non-integer operand for div: {value}")
    return Fraction(euclid_div(value.numerator, key.den))


def normalize(term: LinTerm) -> LinTerm:
    """Drop zero coefficients and restore canonical key order.

    Construction already canonicalizes, so this is the identity on any term
    built through this module; it exists as the explicit normal form used by
    the proof rules and is idempotent.
    """
    return LinTerm(term.coeffs, term.constant)


def ext_div(term: LinTerm, beta: int) -> LinTerm:
    """term div beta with multiples of beta pulled out of the div scope.

    Rewrites (alpha*s + t) div beta to (alpha/beta)*s + (t div beta)
    whenever beta divides alpha, which is valid for Euclidean division.
    Constant multiples of beta are pulled out the same way.
    """
    if beta < 1:
        raise ValueError("div denominator must be a positive integer")
    if beta == 1:
        return term
    pulled: list[tuple[TermKey, Fraction]] = []
    inner: list[tuple[TermKey, Fraction]] = []
    for k, c in term.coeffs.items():
        q = c / beta
        if q.denominator == 1:
            pulled.append((k, q))
        else:
            inner.append((k, c))
    const_q = term.constant / beta
    if const_q.denominator == 1:
        pulled_const = const_q
        inner_const = Fraction(0)
    else:
        pulled_const = Fraction(0)
        inner_const = term.constant
    rest = LinTerm(inner, inner_const)
    if rest.is_constant() and rest.constant == 0:
        return LinTerm(pulled, pulled_const)
    pulled.append((DivTerm(rest, beta), Fraction(1)))
    return LinTerm(pulled, pulled_const)
