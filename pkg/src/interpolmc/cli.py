"""Command-line driver: parse queries and systems, dispatch, print.

Interpolation scripts:

    (set-logic QF_LIA)                          ; or QF_LRA
    (declare-const <name> Int|Real)
    (assert (! <formula> :named <id>))
    (get-interpolants <id>+)                    ; two ids = binary cut
    (get-tree-interpolants (<id> <parent-id|root>)+)

Transition systems (theory is taken from the variable sorts):

    (system (vars (<name> <sort>)+)
            (init <formula>) (trans <formula>) (error <formula>)
            (invariant <formula>)?              ; for check-invariant
            (predicates <formula>*)?)           ; CEGAR seed

Formulas use (and ...) (or ...) (not ...) (<= t t) (< t t) (= t t)
(divisible k t); terms use (+ ...) (* c t) (div t k) with integer or
(/ p q) rational literals.  Primed variables are written <name>'.

Exit codes: 0 unsat/interpolants or safe, 1 sat/unsafe, 2 unknown or
resource-out, 3 malformed input.
"""

from __future__ import annotations

import argparse
import re
import sys as _sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .cegar import cegar_loop
from .formulas import (
    Atom,
    AtomF,
    AtomKind,
    FALSE,
    Formula,
    NotF,
    TRUE,
    conj,
    disj,
)
from .interpolate import (
    NotUnsat,
    Partition,
    Separators,
    Theory,
    TreeQuery,
    binary_interpolant,
    sequence_interpolant,
    tree_interpolant,
)
from .lia import ResourceLimitExceeded
from .sexpr import (
    InputError,
    SExpr,
    Token,
    head,
    position,
    print_formula,
    print_rational,
    print_symbol,
    read_all,
)
from .terms import DivTerm, LinTerm, Sort, Symbol
from .transition import (
    ImcConfig,
    NoCexUpTo,
    Safe,
    TransitionSystem,
    Unknown,
    Unsafe,
    bmc,
    check_inductive,
    imc,
)

EXIT_GOOD = 0
EXIT_SAT = 1
EXIT_UNKNOWN = 2
EXIT_INPUT = 3

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_.$-]*'?\Z")
_INT_RE = re.compile(r"-?[0-9]+\Z")


def _fail(message: str, expr: SExpr | None = None) -> InputError:
    if expr is None:
        return InputError(message)
    line, col = position(expr)
    return InputError(message, line, col)


def _expect_token(expr: SExpr, what: str) -> Token:
    if not isinstance(expr, Token):
        raise _fail(f"expected {what}", expr)
    return expr


def _parse_literal(expr: SExpr) -> Fraction | None:
    if isinstance(expr, Token) and _INT_RE.match(expr.text):
        return Fraction(int(expr.text))
    if head(expr) == "/":
        if len(expr) != 3:
            raise _fail("rational literal needs two parts", expr)
        p = _expect_token(expr[1], "an integer")
        q = _expect_token(expr[2], "an integer")
        if not (_INT_RE.match(p.text) and _INT_RE.match(q.text)):
            raise _fail("rational literal needs integer parts", expr)
        if int(q.text) <= 0:
            raise _fail("rational denominator must be positive", expr)
        return Fraction(int(p.text), int(q.text))
    return None


class _Terms:
    """Term parser over a symbol table."""

    def __init__(self, table: dict[str, Symbol]):
        self.table = table

    def lookup(self, tok: Token) -> Symbol:
        sym = self.table.get(tok.text)
        if sym is None:
            raise _fail(f"undeclared symbol '{tok.text}'", tok)
        return sym

    def term(self, expr: SExpr) -> LinTerm:
        lit = _parse_literal(expr)
        if lit is not None:
            return LinTerm.const(lit)
        if isinstance(expr, Token):
            return LinTerm.of(self.lookup(expr))
        op = head(expr)
        if op == "+":
            total = LinTerm()
            for part in expr[1:]:
                total = total + self.term(part)
            return total
        if op == "*":
            if len(expr) != 3:
                raise _fail("(* c t) takes a literal and a term", expr)
            coeff = _parse_literal(expr[1])
            if coeff is None:
                raise _fail("(* c t) needs a literal coefficient", expr[1])
            return self.term(expr[2]).scale(coeff)
        if op == "div":
            if len(expr) != 3:
                raise _fail("(div t k) takes a term and a positive integer", expr)
            den_tok = _expect_token(expr[2], "a positive integer")
            if not _INT_RE.match(den_tok.text) or int(den_tok.text) < 1:
                raise _fail("div denominator must be a positive integer", den_tok)
            num = self.term(expr[1])
            if num.denominator_lcm() != 1 or num.constant.denominator != 1:
                raise _fail("div numerator must have integer coefficients", expr[1])
            return LinTerm({DivTerm(num, int(den_tok.text)): 1})
        raise _fail(f"cannot parse term '{op or expr}'", expr)

    def formula(self, expr: SExpr) -> Formula:
        if isinstance(expr, Token):
            if expr.text == "true":
                return TRUE
            if expr.text == "false":
                return FALSE
            raise _fail(f"expected a formula, found '{expr.text}'", expr)
        op = head(expr)
        if op == "and":
            if len(expr) < 2:
                raise _fail("(and ...) needs arguments", expr)
            return conj(self.formula(a) for a in expr[1:])
        if op == "or":
            if len(expr) < 2:
                raise _fail("(or ...) needs arguments", expr)
            return disj(self.formula(a) for a in expr[1:])
        if op == "not":
            if len(expr) != 2:
                raise _fail("(not f) takes one argument", expr)
            return NotF(self.formula(expr[1]))
        if op in ("<=", "<", "="):
            if len(expr) != 3:
                raise _fail(f"({op} t t) takes two terms", expr)
            lhs, rhs = self.term(expr[1]), self.term(expr[2])
            diff = rhs - lhs
            kind = {"<=": AtomKind.LEQ0, "<": AtomKind.LT0, "=": AtomKind.EQ0}[op]
            try:
                return AtomF(Atom(kind, diff))
            except ValueError as exc:
                raise _fail(str(exc), expr)
        if op == "divisible":
            if len(expr) != 3:
                raise _fail("(divisible k t) takes a modulus and a term", expr)
            k_tok = _expect_token(expr[1], "a positive integer")
            if not _INT_RE.match(k_tok.text) or int(k_tok.text) < 1:
                raise _fail("divisibility modulus must be a positive integer", k_tok)
            try:
                return AtomF(Atom(AtomKind.DIVIDES, self.term(expr[2]), int(k_tok.text)))
            except ValueError as exc:
                raise _fail(str(exc), expr)
        raise _fail(f"cannot parse formula '{op or expr}'", expr)


@dataclass
class Script:
    theory: Theory
    declarations: list[Symbol]
    partitions: list[Partition]
    command: str  # "interpolate" | "tree-interpolate"
    order: list[str] = field(default_factory=list)
    parents: dict[str, str | None] = field(default_factory=dict)


def _parse_sort(tok: Token) -> Sort:
    if tok.text == "Int":
        return Sort.INT
    if tok.text == "Real":
        return Sort.REAL
    raise _fail(f"unknown sort '{tok.text}'", tok)


def parse_script(text: str) -> Script:
    """Parse an interpolation query script."""
    exprs = read_all(text)
    theory: Theory | None = None
    table: dict[str, Symbol] = {}
    declarations: list[Symbol] = []
    named: dict[str, Partition] = {}
    order_of_assert: list[str] = []
    command: tuple | None = None
    for expr in exprs:
        op = head(expr)
        if op == "set-logic":
            if theory is not None:
                raise _fail("duplicate set-logic", expr)
            logic = _expect_token(expr[1], "a logic name").text
            if logic == "QF_LIA":
                theory = Theory.LIA
            elif logic == "QF_LRA":
                theory = Theory.LRA
            else:
                raise _fail(f"unsupported logic '{logic}'", expr)
        elif op == "declare-const":
            if theory is None:
                raise _fail("set-logic must come first", expr)
            if len(expr) != 3:
                raise _fail("(declare-const name sort)", expr)
            name_tok = _expect_token(expr[1], "a symbol name")
            sort = _parse_sort(_expect_token(expr[2], "a sort"))
            if not _NAME_RE.match(name_tok.text) or name_tok.text.endswith("'"):
                raise _fail(f"bad symbol name '{name_tok.text}'", name_tok)
            if name_tok.text in table:
                raise _fail(f"duplicate declaration of '{name_tok.text}'", name_tok)
            if sort is not theory.sort:
                raise _fail(
                    f"sort {sort.value} does not match logic {theory.value}", expr
                )
            sym = Symbol(name_tok.text, sort)
            table[name_tok.text] = sym
            declarations.append(sym)
        elif op == "assert":
            if theory is None:
                raise _fail("set-logic must come first", expr)
            if len(expr) != 2 or head(expr[1]) != "!":
                raise _fail("(assert (! <formula> :named <id>))", expr)
            bang = expr[1]
            if len(bang) != 4 or not isinstance(bang[2], Token) or bang[2].text != ":named":
                raise _fail("(assert (! <formula> :named <id>))", expr)
            name = _expect_token(bang[3], "an assertion name").text
            if name in named:
                raise _fail(f"duplicate assertion name '{name}'", bang[3])
            formula = _Terms(table).formula(bang[1])
            named[name] = Partition(name, formula, frozenset(table.values()))
            order_of_assert.append(name)
        elif op == "get-interpolants":
            if command is not None:
                raise _fail("more than one command", expr)
            ids = [_expect_token(t, "an assertion name").text for t in expr[1:]]
            if not ids:
                raise _fail("get-interpolants needs assertion names", expr)
            command = ("interpolate", ids, expr)
        elif op == "get-tree-interpolants":
            if command is not None:
                raise _fail("more than one command", expr)
            pairs = []
            for item in expr[1:]:
                if not isinstance(item, list) or len(item) != 2:
                    raise _fail("(get-tree-interpolants (<id> <parent|root>)+)", expr)
                node = _expect_token(item[0], "an assertion name").text
                parent = _expect_token(item[1], "a parent name").text
                pairs.append((node, parent))
            if not pairs:
                raise _fail("get-tree-interpolants needs nodes", expr)
            command = ("tree-interpolate", pairs, expr)
        else:
            raise _fail(f"unknown command '{op}'", expr)
    if command is None:
        raise InputError("no command")
    assert theory is not None

    def resolve(name: str, where: SExpr) -> Partition:
        if name not in named:
            raise _fail(f"unknown assertion '{name}'", where)
        return named[name]

    if command[0] == "interpolate":
        ids = command[1]
        partitions = [resolve(i, command[2]) for i in ids]
        return Script(theory, declarations, partitions, "interpolate", order=ids)
    pairs = command[1]
    order = [node for node, _ in pairs]
    parents: dict[str, str | None] = {}
    for node, parent in pairs:
        resolve(node, command[2])
        parents[node] = None if parent == "root" else parent
    partitions = [named[n] for n in order]
    return Script(theory, declarations, partitions, "tree-interpolate",
                  order=order, parents=parents)


@dataclass
class SystemFile:
    system: TransitionSystem
    invariant: Formula | None
    predicates: list[Formula]


def parse_system(text: str) -> SystemFile:
    """Parse a transition-system file."""
    exprs = read_all(text)
    if not exprs:
        raise InputError("no command")
    if len(exprs) != 1 or head(exprs[0]) != "system":
        raise _fail("expected a single (system ...) form", exprs[0])
    body = exprs[0][1:]
    sections: dict[str, SExpr] = {}
    for part in body:
        name = head(part)
        if name not in ("vars", "init", "trans", "error", "invariant", "predicates"):
            raise _fail(f"unknown system section '{name}'", part)
        if name in sections:
            raise _fail(f"duplicate section '{name}'", part)
        sections[name] = part
    for required in ("vars", "init", "trans", "error"):
        if required not in sections:
            raise _fail(f"missing ({required} ...) section", exprs[0])
    table: dict[str, Symbol] = {}
    variables: list[Symbol] = []
    for decl in sections["vars"][1:]:
        if not isinstance(decl, list) or len(decl) != 2:
            raise _fail("(vars (<name> <sort>)+)", sections["vars"])
        name_tok = _expect_token(decl[0], "a variable name")
        sort = _parse_sort(_expect_token(decl[1], "a sort"))
        if not _NAME_RE.match(name_tok.text) or name_tok.text.endswith("'"):
            raise _fail(f"bad variable name '{name_tok.text}'", name_tok)
        if name_tok.text in table:
            raise _fail(f"duplicate variable '{name_tok.text}'", name_tok)
        sym = Symbol(name_tok.text, sort)
        table[name_tok.text] = sym
        variables.append(sym)
    if not variables:
        raise _fail("a system needs at least one variable", sections["vars"])
    sorts = {v.sort for v in variables}
    if len(sorts) != 1:
        raise _fail("all variables must share one sort", sections["vars"])
    theory = Theory.LIA if sorts.pop() is Sort.INT else Theory.LRA

    state_terms = _Terms(dict(table))
    trans_table = dict(table)
    for v in variables:
        trans_table[v.name + "'"] = v.primed()
    trans_terms = _Terms(trans_table)

    init = state_terms.formula(sections["init"][1])
    trans = trans_terms.formula(sections["trans"][1])
    error = state_terms.formula(sections["error"][1])
    for section in ("init", "trans", "error"):
        if len(sections[section]) != 2:
            raise _fail(f"({section} <formula>) takes one formula", sections[section])
    try:
        system = TransitionSystem(tuple(variables), init, trans, error, theory)
    except ValueError as exc:
        raise _fail(str(exc), exprs[0])
    invariant = None
    if "invariant" in sections:
        if len(sections["invariant"]) != 2:
            raise _fail("(invariant <formula>) takes one formula", sections["invariant"])
        invariant = state_terms.formula(sections["invariant"][1])
    predicates = []
    if "predicates" in sections:
        predicates = [state_terms.formula(p) for p in sections["predicates"][1:]]
    return SystemFile(system, invariant, predicates)


def parse_predicates_file(text: str, system: TransitionSystem) -> list[Formula]:
    """One formula per line over the system's state variables."""
    table = {v.name: v for v in system.vars}
    parser = _Terms(table)
    out = []
    for raw_line in text.splitlines():
        line = raw_line.strip()
        if not line or line.startswith(";"):
            continue
        exprs = read_all(line)
        for expr in exprs:
            out.append(parser.formula(expr))
    return out


# -- reporting -------------------------------------------------------------------


def _print_model(model: dict[Symbol, Fraction], out) -> None:
    for sym in sorted(model, key=lambda s: (s.sort.value, s.name, s.index)):
        out.write(f"({print_symbol(sym)} {print_rational(model[sym])})\n")


def _print_trace(trace, variables, out) -> None:
    out.write("step " + " ".join(print_symbol(v) for v in variables) + "\n")
    for i, state in enumerate(trace):
        row = " ".join(print_rational(state[v]) for v in variables)
        out.write(f"{i} {row}\n")


def _run_interp(args, out) -> int:
    script = parse_script(_read(args.file))
    if script.command == "interpolate":
        if len(script.partitions) == 2:
            result = binary_interpolant(
                script.partitions[0], script.partitions[1], script.theory,
                args.branch_budget,
            )
            cuts = result.items if isinstance(result, Separators) else None
        else:
            result = sequence_interpolant(
                script.partitions, script.theory, args.branch_budget
            )
            cuts = result.items[1:-1] if isinstance(result, Separators) else None
        if isinstance(result, NotUnsat):
            out.write("sat\n")
            _print_model(result.model, out)
            return EXIT_SAT
        out.write("unsat\n")
        for formula in cuts:
            out.write(print_formula(formula) + "\n")
        return EXIT_GOOD
    query = TreeQuery(
        script.order,
        script.parents,
        {p.label: p for p in script.partitions},
    )
    result = tree_interpolant(query, script.theory, args.branch_budget)
    if isinstance(result, NotUnsat):
        out.write("sat\n")
        _print_model(result.model, out)
        return EXIT_SAT
    out.write("unsat\n")
    for name in script.order:
        out.write(f"({name} {print_formula(result.labeling[name])})\n")
    return EXIT_GOOD


def _run_bmc(args, out) -> int:
    loaded = parse_system(_read(args.file))
    result = bmc(loaded.system, args.bound, args.branch_budget)
    if isinstance(result, NoCexUpTo):
        out.write(f"NO COUNTEREXAMPLE (bound {result.bound})\n")
        return EXIT_GOOD
    out.write("UNSAFE\n")
    _print_trace(result.trace, loaded.system.vars, out)
    return EXIT_SAT


def _run_imc(args, out) -> int:
    loaded = parse_system(_read(args.file))
    cfg = ImcConfig(args.j, args.k, args.max_iters, args.max_k)
    result = imc(loaded.system, cfg, args.branch_budget)
    return _report_verification(result, loaded.system, out)


def _run_cegar(args, out) -> int:
    loaded = parse_system(_read(args.file))
    seeds = list(loaded.predicates)
    if args.preds:
        seeds += parse_predicates_file(_read(args.preds), loaded.system)
    result = cegar_loop(
        loaded.system,
        max_refinements=args.max_refinements,
        seed_predicates=seeds,
        paper_literal=args.paper_literal_concretize,
        branch_limit=args.branch_budget,
    )
    return _report_verification(result, loaded.system, out)


def _report_verification(result, system, out) -> int:
    if isinstance(result, Safe):
        out.write("SAFE\n")
        out.write(f"(invariant {print_formula(result.invariant)})\n")
        return EXIT_GOOD
    if isinstance(result, Unsafe):
        out.write("UNSAFE\n")
        _print_trace(result.trace, system.vars, out)
        return EXIT_SAT
    out.write(f"UNKNOWN {result.reason}\n")
    return EXIT_UNKNOWN


def _run_check_invariant(args, out) -> int:
    loaded = parse_system(_read(args.file))
    if loaded.invariant is None:
        raise InputError("system file has no (invariant ...) section")
    report = check_inductive(loaded.system, loaded.invariant, args.branch_budget)
    all_ok = True
    for name, clause in (
        ("initiation", report.initiation),
        ("consecution", report.consecution),
        ("sufficiency", report.sufficiency),
    ):
        out.write(f"{name}: {'pass' if clause.passed else 'fail'}\n")
        if not clause.passed:
            all_ok = False
            items = " ".join(
                f"({print_symbol(s)} {print_rational(v)})"
                for s, v in sorted(
                    clause.countermodel.items(),
                    key=lambda kv: (kv[0].index, kv[0].sort.value, kv[0].name),
                )
            )
            out.write(f"countermodel: {items}\n")
    return EXIT_GOOD if all_ok else EXIT_SAT


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as handle:
        return handle.read()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="interpolmc",
        description="Craig interpolation and interpolation-based model checking "
        "for linear integer/real arithmetic.",
    )
    parser.add_argument(
        "--branch-budget", type=int, default=10_000,
        help="branch-and-bound node budget per integer query",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p_interp = sub.add_parser("interp", help="run an interpolation script")
    p_interp.add_argument("file")
    p_interp.set_defaults(handler=_run_interp)

    p_bmc = sub.add_parser("bmc", help="bounded model checking")
    p_bmc.add_argument("--bound", type=int, required=True)
    p_bmc.add_argument("file")
    p_bmc.set_defaults(handler=_run_bmc)

    p_imc = sub.add_parser("imc", help="interpolation-based model checking")
    p_imc.add_argument("--j", type=int, default=1)
    p_imc.add_argument("--k", type=int, default=1)
    p_imc.add_argument("--max-iters", type=int, default=40)
    p_imc.add_argument("--max-k", type=int, default=12)
    p_imc.add_argument("file")
    p_imc.set_defaults(handler=_run_imc)

    p_cegar = sub.add_parser("cegar", help="predicate-abstraction CEGAR")
    p_cegar.add_argument("--max-refinements", type=int, default=10)
    p_cegar.add_argument("--preds", help="seed predicate file, one formula per line")
    p_cegar.add_argument(
        "--paper-literal-concretize", action="store_true",
        help="concretize paths without per-step abstract-state conjuncts",
    )
    p_cegar.add_argument("file")
    p_cegar.set_defaults(handler=_run_cegar)

    p_check = sub.add_parser("check-invariant", help="check the file's invariant")
    p_check.add_argument("file")
    p_check.set_defaults(handler=_run_check_invariant)
    return parser


def run(argv: Sequence[str], out=None) -> int:
    """Entry point; returns the exit code instead of raising SystemExit."""
    out = out if out is not None else _sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv))
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_GOOD
    try:
        return args.handler(args, out)
    except InputError as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return EXIT_INPUT
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return EXIT_INPUT
    except ResourceLimitExceeded as exc:
        print(f"resource limit: {exc}", file=_sys.stderr)
        return EXIT_UNKNOWN


def main() -> None:
    raise SystemExit(run(_sys.argv[1:]))
