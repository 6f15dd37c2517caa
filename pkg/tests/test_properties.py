"""Seeded bulk property suites.

These are the statistical workhorses: every count matches the project's
acceptance bar (500 separator splits, 500 integer verdicts against
enumeration, 1000 cut soundness checks, 50 sequence/tree instances, 100
BMC-against-fixed-point comparisons).  INTERPOLMC_SEED moves all of them
at once.
"""

import itertools
import random
from fractions import Fraction

from conftest import SEED
from helpers import (
    box_points,
    compile_formula,
    eq,
    geq,
    lt,
    random_formula,
    random_ineq_atoms,
    range_atoms,
    sym,
)
from interpolmc.formulas import (
    AtomF,
    Atom,
    AtomKind,
    FalseF,
    TrueF,
    conj,
    disj,
    evaluate,
    leq0,
    negate,
    rewrite_literals,
    symbols_of,
)
from interpolmc.interpolate import (
    NotUnsat,
    Partition,
    Separators,
    Theory,
    TreeQuery,
    check_sequence,
    check_tree,
    sequence_interpolant,
    tree_interpolant,
)
from interpolmc.lia import LiaResourceOut, LiaSat, gcd_cut, lia_check
from interpolmc.lra import LraUnsat, lra_check, lra_interpolate
from interpolmc.terms import LinTerm, Sort, Symbol
from interpolmc.transition import (
    ImcConfig,
    NoCexUpTo,
    Safe,
    TransitionSystem,
    Unsafe,
    bmc,
    check_inductive,
    imc,
    trace_replays,
)


def test_lra_separator_contract_500():
    rng = random.Random(SEED)
    symbols = [Symbol(f"r{i}", Sort.REAL) for i in range(6)]
    passed = 0
    while passed < 500:
        n_atoms = rng.randint(3, 7)
        active = rng.sample(symbols, rng.randint(2, 6))
        atoms = random_ineq_atoms(rng, active, n_atoms, strict_ok=True, rational=True)
        verdict = lra_check(atoms)
        if not isinstance(verdict, LraUnsat):
            continue
        cut = rng.randint(0, n_atoms)
        a_atoms, b_atoms = atoms[:cut], atoms[cut:]
        interp = lra_interpolate(a_atoms, b_atoms, verdict.certificate)
        atom = interp.atom
        sig_a = {s for a in a_atoms for s in a.term.symbols()}
        sig_b = {s for b in b_atoms for s in b.term.symbols()}
        assert atom.term.symbols() <= (sig_a & sig_b)
        negated = rewrite_literals(negate(interp, Sort.REAL), Sort.REAL)
        if isinstance(negated, AtomF):
            assert isinstance(lra_check(list(a_atoms) + [negated.atom]), LraUnsat)
        elif isinstance(negated, TrueF):
            # a false-equivalent separator: the contradiction sits inside A
            assert isinstance(lra_check(list(a_atoms)), LraUnsat)
        else:
            assert isinstance(negated, FalseF)
        assert isinstance(lra_check([atom] + list(b_atoms)), LraUnsat)
        passed += 1


def test_lia_verdicts_match_enumeration_500():
    rng = random.Random(SEED + 1)
    lo, hi = -7, 7
    for _ in range(500):
        symbols = [sym(f"v{i}") for i in range(rng.randint(1, 3))]
        atoms = list(range_atoms(symbols, lo, hi))
        for _ in range(rng.randint(1, 4)):
            coeffs = {
                s: rng.randint(-5, 5) for s in symbols if rng.random() < 0.85
            }
            atoms.append(Atom(AtomKind.LEQ0, LinTerm(coeffs, rng.randint(-9, 9))))
        result = lia_check(atoms)
        assert not isinstance(result, LiaResourceOut)
        f = conj([AtomF(a) for a in atoms])
        pred = compile_formula(f, symbols)
        truth = any(pred(*p) for p in box_points(symbols, lo, hi))
        assert isinstance(result, LiaSat) == truth
        if isinstance(result, LiaSat):
            assert all(a.evaluate(result.model) for a in atoms)


def test_gcd_cut_point_soundness_1000():
    rng = random.Random(SEED + 2)
    for _ in range(1000):
        k = rng.randint(1, 3)
        symbols = [sym(f"v{i}") for i in range(k)]
        coeffs = {s: rng.randint(-12, 12) for s in symbols}
        atom = Atom(AtomKind.LEQ0, LinTerm(coeffs, rng.randint(-15, 15)))
        cut = gcd_cut(atom)
        before = compile_formula(AtomF(atom), symbols)
        after = compile_formula(AtomF(cut), symbols)
        for point in box_points(symbols, -10, 10):
            if before(*point):
                assert after(*point), (atom, cut, point)


def _random_chain_partitions(rng, length):
    """Random conjuncts, each range-bounding exactly the symbols it uses."""
    symbols = [sym(f"c{i}") for i in range(3)]
    parts = []
    for i in range(length):
        f = random_formula(rng, symbols, depth=1, div_budget=[0])
        used = sorted(symbols_of(f), key=lambda s: s.name)
        bounds = [AtomF(a) for a in range_atoms(used, -5, 5)]
        parts.append(Partition(f"P{i}", conj(bounds + [f])))
    return parts, symbols


def test_sequence_checker_50_random_instances():
    rng = random.Random(SEED + 3)
    done = 0
    while done < 50:
        parts, _ = _random_chain_partitions(rng, rng.randint(2, 4))
        result = sequence_interpolant(parts, Theory.LIA)
        if isinstance(result, NotUnsat):
            for p in parts:
                assert evaluate(p.formula, result.model)
            continue
        assert check_sequence(parts, result.items, Theory.LIA)
        done += 1


def test_tree_checker_50_random_instances():
    rng = random.Random(SEED + 4)
    done = 0
    while done < 50:
        size = rng.randint(2, 5)
        parts, _ = _random_chain_partitions(rng, size)
        names = [p.label for p in parts]
        # random tree over the nodes: parent of node i is a later node
        parent = {}
        for i, name in enumerate(names):
            parent[name] = None if i == size - 1 else names[rng.randint(i + 1, size - 1)]
        query = TreeQuery(names, parent, {p.label: p for p in parts})
        result = tree_interpolant(query, Theory.LIA)
        if isinstance(result, NotUnsat):
            joint = conj([p.formula for p in parts])
            assert evaluate(joint, result.model)
            continue
        assert check_tree(query, result.labeling, Theory.LIA)
        done += 1


def test_tree_on_chain_matches_sequence_50():
    rng = random.Random(SEED + 5)
    done = 0
    while done < 50:
        parts, _ = _random_chain_partitions(rng, rng.randint(2, 4))
        seq = sequence_interpolant(parts, Theory.LIA)
        if isinstance(seq, NotUnsat):
            continue
        names = [p.label for p in parts]
        parent = {names[i]: names[i + 1] for i in range(len(names) - 1)}
        parent[names[-1]] = None
        query = TreeQuery(names, parent, {p.label: p for p in parts})
        tree = tree_interpolant(query, Theory.LIA)
        assert isinstance(tree, Separators)
        # the bottom-up tree walk reruns the sequence computation, so the
        # per-node formulas agree even syntactically
        for i, name in enumerate(names[:-1], start=1):
            assert tree.labeling[name] == seq.items[i]
        done += 1


def _random_system(rng) -> TransitionSystem:
    """A small total-transition counter machine with bounded guard logic."""
    x = sym("x")
    xp = x.primed()
    tx, txp = LinTerm.of(x), LinTerm.of(xp)
    start = rng.randint(-2, 2)
    step = rng.choice([1, 2, -1])
    bound = rng.randint(2, 4)
    # guarded move with an explicit else branch keeps the relation total
    move = conj([lt(tx, bound), eq(txp, tx + LinTerm.const(step))])
    stay = conj([geq(tx - LinTerm.const(bound)), eq(txp, tx)])
    trans = disj([move, stay])
    init = eq(tx, start)
    if rng.random() < 0.5:
        error = eq(tx, rng.randint(-3, 6))
    else:
        error = geq(tx - LinTerm.const(rng.randint(4, 8)))
    return TransitionSystem((x,), init, trans, error, Theory.LIA)


def test_bmc_agrees_with_fixed_point_verdicts_100():
    rng = random.Random(SEED + 6)
    max_k = 12
    for _ in range(100):
        system = _random_system(rng)
        verdict = imc(system, ImcConfig(j=1, k=1, max_outer_iters=80, max_k=max_k))
        bounded = bmc(system, max_k)
        if isinstance(verdict, Unsafe):
            assert isinstance(bounded, Unsafe)
            assert trace_replays(system, verdict.trace)
        else:
            assert isinstance(verdict, Safe), getattr(verdict, "reason", verdict)
            assert check_inductive(system, verdict.invariant).ok
            assert isinstance(bmc(system, 2 * max_k), NoCexUpTo)
        if isinstance(bounded, Unsafe):
            assert isinstance(verdict, Unsafe)
