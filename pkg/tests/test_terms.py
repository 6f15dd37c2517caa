import random
from fractions import Fraction

import pytest

from conftest import SEED
from interpolmc.terms import (
    DeltaRational,
    DivTerm,
    LinTerm,
    Sort,
    Symbol,
    euclid_div,
    ext_div,
    normalize,
)


def real(name):
    return Symbol(name, Sort.REAL)


def test_normalize_cancellation_from_proof_step():
    x, y, z = real("x"), real("y"), real("z")
    combined = LinTerm({z: 1, x: -1, y: -2}, -2) + LinTerm({x: 1})
    assert combined == LinTerm({z: 1, y: -2}, -2)


def test_normalize_drops_zero_coefficients():
    x = real("x")
    assert LinTerm({x: 0}, 5) == LinTerm.const(5)


def test_normalize_forced_cancellation():
    x, y = real("x"), real("y")
    assert LinTerm({x: 1, y: 1}) + LinTerm({y: -1}, 1) == LinTerm({x: 1}, 1)


def test_normalize_idempotent_and_eval_preserving():
    rng = random.Random(SEED)
    symbols = [real(f"s{i}") for i in range(4)]
    for _ in range(200):
        pairs = [(s, Fraction(rng.randint(-6, 6), rng.randint(1, 5))) for s in symbols]
        t = LinTerm(pairs, Fraction(rng.randint(-9, 9), rng.randint(1, 4)))
        assert normalize(normalize(t)) == normalize(t)
        point = {s: Fraction(rng.randint(-20, 20), rng.randint(1, 6)) for s in symbols}
        assert t.evaluate(point) == normalize(t).evaluate(point)


def test_canonical_symbol_order():
    a = Symbol("a", Sort.INT)
    b = Symbol("b", Sort.INT)
    b1 = Symbol("b", Sort.INT, 1)
    t = LinTerm({b1: 1, b: 2, a: 3})
    assert list(t.coeffs) == [a, b, b1]


def test_mixed_sort_term_rejected():
    t = LinTerm({Symbol("x", Sort.INT): 1, Symbol("y", Sort.REAL): 1})
    with pytest.raises(ValueError):
        t.sort()


def test_delta_rational_is_lexicographic():
    assert DeltaRational.of(1) > DeltaRational.of(0, 100)
    assert DeltaRational.of(0, 1) > DeltaRational.of(0)
    assert DeltaRational.of(2, -1) < DeltaRational.of(2)
    assert DeltaRational.of(3, 1).concrete(Fraction(1, 2)) == Fraction(7, 2)


def test_euclid_div_examples():
    assert euclid_div(7, 2) == 3
    assert euclid_div(-7, 2) == -4
    assert euclid_div(7, -2) == -3
    with pytest.raises(ZeroDivisionError):
        euclid_div(1, 0)


def test_euclid_div_definition_holds():
    rng = random.Random(SEED)
    for _ in range(300):
        a = rng.randint(-50, 50)
        b = rng.choice([i for i in range(-9, 10) if i])
        q = euclid_div(a, b)
        r = a - b * q
        assert 0 <= r < abs(b)


def test_ext_div_pulls_multiples_out():
    x, y = Symbol("x", Sort.INT), Symbol("y", Sort.INT)
    pulled = ext_div(LinTerm({y: 1, x: 4}, 1), 4)
    assert pulled == LinTerm({x: 1, DivTerm(LinTerm({y: 1}, 1), 4): 1})
    # whole term divisible: no div left
    assert ext_div(LinTerm({x: 8}, 4), 4) == LinTerm({x: 2}, 1)
    # denominator one is the identity
    t = LinTerm({x: 3}, 2)
    assert ext_div(t, 1) == t


def test_ext_div_matches_euclidean_semantics():
    x, y = Symbol("x", Sort.INT), Symbol("y", Sort.INT)
    t = LinTerm({y: 1, x: 4}, 1)
    rewritten = ext_div(t, 4)
    for xv in range(-6, 7):
        for yv in range(-6, 7):
            point = {x: xv, y: yv}
            direct = euclid_div(int(t.evaluate(point)), 4)
            assert rewritten.evaluate(point) == direct


def test_div_term_requires_positive_denominator():
    with pytest.raises(ValueError):
        DivTerm(LinTerm.const(1), 0)
