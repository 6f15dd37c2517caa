"""Shared oracles and generators for the test suites.

The enumeration oracle compiles formulas down to plain-int Python lambdas
so exhaustive scans over boxes stay fast; it is deliberately independent of
the solvers it cross-checks (no simplex, no cuts, just evaluation).
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction
from math import lcm

from interpolmc.formulas import (
    AndF,
    Atom,
    AtomF,
    AtomKind,
    FalseF,
    Formula,
    NotF,
    OrF,
    TrueF,
    conj,
    disj,
)
from interpolmc.interpolate import Partition, Theory
from interpolmc.terms import DivTerm, LinTerm, Sort, Symbol, euclid_div
from interpolmc.transition import TransitionSystem


def sym(name: str, sort: Sort = Sort.INT, index: int = 0) -> Symbol:
    return Symbol(name, sort, index)


def term(coeffs: dict, const=0) -> LinTerm:
    return LinTerm(coeffs, const)


def geq(t: LinTerm, u: LinTerm | int = 0) -> Formula:
    u = u if isinstance(u, LinTerm) else LinTerm.const(u)
    return AtomF(Atom(AtomKind.LEQ0, t - u))


def lt(t: LinTerm, u: LinTerm | int) -> Formula:
    u = u if isinstance(u, LinTerm) else LinTerm.const(u)
    return AtomF(Atom(AtomKind.LT0, u - t))


def eq(t: LinTerm, u: LinTerm | int) -> Formula:
    u = u if isinstance(u, LinTerm) else LinTerm.const(u)
    return AtomF(Atom(AtomKind.EQ0, t - u))


# -- fast enumeration oracle -----------------------------------------------------


def _term_expr(t: LinTerm, names: dict[Symbol, str]) -> tuple[str, int]:
    """Expression computing scale*t with everything integer; returns scale."""
    scale = lcm(t.denominator_lcm(), t.constant.denominator)
    parts = []
    for key, c in t.coeffs.items():
        c = c * scale
        assert c.denominator == 1
        if isinstance(key, Symbol):
            parts.append(f"{int(c)}*{names[key]}")
        else:
            inner, inner_scale = _term_expr(key.num, names)
            assert inner_scale == 1, "div numerators must be integral"
            parts.append(f"{int(c)}*ediv({inner}, {key.den})")
    c0 = t.constant * scale
    assert c0.denominator == 1
    parts.append(str(int(c0)))
    return "+".join(parts), scale


def _atom_expr(atom: Atom, names: dict[Symbol, str]) -> str:
    body, scale = _term_expr(atom.term, names)
    if atom.kind is AtomKind.LEQ0:
        return f"(({body})>=0)"
    if atom.kind is AtomKind.LT0:
        return f"(({body})>0)"
    if atom.kind is AtomKind.EQ0:
        return f"(({body})==0)"
    if atom.kind is AtomKind.NEQ0:
        return f"(({body})!=0)"
    assert scale == 1, "divisibility atoms must be integral"
    return f"((({body}))%{atom.modulus}==0)"


def _formula_expr(f: Formula, names: dict[Symbol, str]) -> str:
    if isinstance(f, TrueF):
        return "True"
    if isinstance(f, FalseF):
        return "False"
    if isinstance(f, AtomF):
        return _atom_expr(f.atom, names)
    if isinstance(f, NotF):
        return f"(not {_formula_expr(f.arg, names)})"
    op = " and " if isinstance(f, AndF) else " or "
    return "(" + op.join(_formula_expr(a, names) for a in f.args) + ")"


def compile_formula(f: Formula, symbols: list[Symbol]):
    """Compile to a fast predicate over integer tuples (one per symbol)."""
    names = {s: f"v{i}" for i, s in enumerate(symbols)}
    expr = _formula_expr(f, names)
    args = ",".join(names[s] for s in symbols) or "*_ignored"
    return eval(f"lambda {args}: {expr}", {"ediv": euclid_div})


def box_points(symbols: list[Symbol], lo: int, hi: int):
    return itertools.product(range(lo, hi + 1), repeat=len(symbols))


def enumerate_sat(f: Formula, symbols: list[Symbol], lo: int, hi: int) -> bool:
    """Exhaustive integer-box satisfiability."""
    pred = compile_formula(f, symbols)
    return any(pred(*p) for p in box_points(symbols, lo, hi))


def holds_everywhere(premise: Formula, conclusion: Formula,
                     symbols: list[Symbol], lo: int, hi: int) -> bool:
    p = compile_formula(premise, symbols)
    c = compile_formula(conclusion, symbols)
    return all(c(*pt) for pt in box_points(symbols, lo, hi) if p(*pt))


def nowhere_joint(f: Formula, g: Formula, symbols: list[Symbol], lo: int, hi: int) -> bool:
    fp = compile_formula(f, symbols)
    gp = compile_formula(g, symbols)
    return not any(fp(*pt) and gp(*pt) for pt in box_points(symbols, lo, hi))


# -- random generators -----------------------------------------------------------


def random_linterm(rng: random.Random, symbols: list[Symbol], *, rational: bool,
                   max_coeff: int = 5) -> LinTerm:
    coeffs = {}
    for s in symbols:
        if rng.random() < 0.7:
            c = rng.randint(-max_coeff, max_coeff)
            if rational and rng.random() < 0.3:
                coeffs[s] = Fraction(c, rng.randint(1, 4))
            elif c:
                coeffs[s] = Fraction(c)
    const = Fraction(rng.randint(-8, 8))
    if rational and rng.random() < 0.3:
        const /= rng.randint(1, 4)
    return LinTerm(coeffs, const)


def random_ineq_atoms(rng: random.Random, symbols: list[Symbol], count: int, *,
                      strict_ok: bool, rational: bool) -> list[Atom]:
    atoms = []
    for _ in range(count):
        t = random_linterm(rng, symbols, rational=rational)
        kind = AtomKind.LT0 if strict_ok and rng.random() < 0.3 else AtomKind.LEQ0
        atoms.append(Atom(kind, t))
    return atoms


def random_formula(rng: random.Random, symbols: list[Symbol], depth: int = 2,
                   div_budget: list[int] | None = None) -> Formula:
    """Random input-language formula: and/or/not over mixed literals."""
    if div_budget is None:
        div_budget = [1]
    if depth == 0 or rng.random() < 0.35:
        t = random_linterm(rng, symbols, rational=False, max_coeff=3)
        roll = rng.random()
        if roll < 0.3:
            kind = AtomKind.LEQ0
        elif roll < 0.5:
            kind = AtomKind.LT0
        elif roll < 0.7:
            kind = AtomKind.EQ0
        elif roll < 0.85:
            kind = AtomKind.NEQ0
        elif div_budget[0] > 0:
            div_budget[0] -= 1
            return AtomF(Atom(AtomKind.DIVIDES, t, rng.choice([2, 3, 4])))
        else:
            kind = AtomKind.LEQ0
        return AtomF(Atom(kind, t))
    arity = rng.randint(2, 3)
    parts = [random_formula(rng, symbols, depth - 1, div_budget) for _ in range(arity)]
    roll = rng.random()
    if roll < 0.45:
        return conj(parts)
    if roll < 0.9:
        return disj(parts)
    return NotF(parts[0])


def range_atoms(symbols: list[Symbol], lo: int, hi: int) -> list[Atom]:
    out = []
    for s in symbols:
        out.append(Atom(AtomKind.LEQ0, LinTerm({s: 1}, -lo)))
        out.append(Atom(AtomKind.LEQ0, LinTerm({s: -1}, hi)))
    return out


# -- fixture systems -------------------------------------------------------------


def fibonacci_system() -> TransitionSystem:
    n, a, b, i = (sym(s) for s in "nabi")
    tn = LinTerm.of(n)
    ta = LinTerm.of(a)
    tb = LinTerm.of(b)
    ti = LinTerm.of(i)
    init = conj([geq(tn), eq(ta, 0), eq(tb, 1), eq(ti, 0)])
    trans = conj(
        [
            lt(ti, tn),
            eq(LinTerm.of(b.primed()), ta + tb),
            eq(LinTerm.of(a.primed()), tb),
            eq(LinTerm.of(i.primed()), ti + LinTerm.const(1)),
            eq(LinTerm.of(n.primed()), tn),
        ]
    )
    error = conj([geq(ti - tn), geq(LinTerm.const(-1) - ta)])
    return TransitionSystem((n, a, b, i), init, trans, error, Theory.LIA)


def fibonacci_unwinding_partitions() -> list[Partition]:
    """Two-iteration unwinding split into four conjuncts."""
    names = ["n0", "a0", "b0", "i0", "t1", "a1", "b1", "i1", "t2", "a2", "b2", "i2"]
    v = {s: LinTerm.of(sym(s)) for s in names}
    a1 = conj([geq(v["n0"]), eq(v["a0"], 0), eq(v["b0"], 1), eq(v["i0"], 0)])
    a2 = conj(
        [
            lt(v["i0"], v["n0"]),
            eq(v["t1"], v["b0"]),
            eq(v["b1"], v["a0"] + v["b0"]),
            eq(v["a1"], v["t1"]),
            eq(v["i1"], v["i0"] + LinTerm.const(1)),
        ]
    )
    a3 = conj(
        [
            lt(v["i1"], v["n0"]),
            eq(v["t2"], v["b1"]),
            eq(v["b2"], v["a1"] + v["b1"]),
            eq(v["a2"], v["t2"]),
            eq(v["i2"], v["i1"] + LinTerm.const(1)),
        ]
    )
    a4 = conj([geq(v["i2"] - v["n0"]), geq(LinTerm.const(-1) - v["a2"])])
    return [Partition(f"A{k}", f) for k, f in enumerate((a1, a2, a3, a4), start=1)]


def separator_family(n: int):
    """The integer instance pair whose only separators need div."""
    x, y, z = sym("x"), sym("y"), sym("z")
    a_atoms = [
        Atom(AtomKind.LEQ0, LinTerm({y: 1, x: 2 * n}, n - 1)),
        Atom(AtomKind.LEQ0, LinTerm({y: -1, x: -2 * n})),
    ]
    b_atoms = [
        Atom(AtomKind.LEQ0, LinTerm({y: 1, z: 2 * n}, -1)),
        Atom(AtomKind.LEQ0, LinTerm({y: -1, z: -2 * n}, n)),
    ]
    return a_atoms, b_atoms
