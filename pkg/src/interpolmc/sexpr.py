"""S-expression reading and deterministic printing.

The reader produces nested lists of :class:`Token` with line/column
positions for error reporting; `;` starts a comment running to the end of
the line.  The printers render terms and formulas fully parenthesized with
entries in canonical symbol order and rationals as ``(/ p q)``, so equal
values always print identically and printed output parses back.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .formulas import (
    AndF,
    Atom,
    AtomF,
    AtomKind,
    FalseF,
    Formula,
    NotF,
    OrF,
    TrueF,
)
from .terms import DivTerm, LinTerm, Symbol


class InputError(Exception):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


@dataclass
class Token:
    text: str
    line: int
    column: int


SExpr = Token | list  # list of SExpr


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
        elif ch in " \t\r":
            col += 1
            i += 1
        elif ch == ";":
            while i < len(text) and text[i] != "\n":
                i += 1
        elif ch in "()":
            tokens.append(Token(ch, line, col))
            col += 1
            i += 1
        else:
            start = i
            startcol = col
            while i < len(text) and text[i] not in " \t\r\n();":
                i += 1
                col += 1
            tokens.append(Token(text[start:i], line, startcol))
    return tokens


def read_all(text: str) -> list[SExpr]:
    tokens = tokenize(text)
    out: list[SExpr] = []
    stack: list[list[SExpr]] = []
    opens: list[Token] = []
    for tok in tokens:
        if tok.text == "(":
            stack.append([])
            opens.append(tok)
        elif tok.text == ")":
            if not stack:
                raise InputError("unmatched ')'", tok.line, tok.column)
            done = stack.pop()
            opens.pop()
            if stack:
                stack[-1].append(done)
            else:
                out.append(done)
        else:
            if stack:
                stack[-1].append(tok)
            else:
                out.append(tok)
    if stack:
        raise InputError("unmatched '('", opens[-1].line, opens[-1].column)
    return out


def head(expr: SExpr) -> str | None:
    if isinstance(expr, list) and expr and isinstance(expr[0], Token):
        return expr[0].text
    return None


def position(expr: SExpr) -> tuple[int | None, int | None]:
    node = expr
    while isinstance(node, list):
        if not node:
            return (None, None)
        node = node[0]
    return (node.line, node.column)


# -- printing -------------------------------------------------------------------


def print_rational(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"(/ {value.numerator} {value.denominator})"


def print_symbol(symbol: Symbol) -> str:
    if symbol.index == 0:
        return symbol.name
    if symbol.index == 1:
        return symbol.name + "'"
    return f"{symbol.name}@{symbol.index}"


def print_term(term: LinTerm) -> str:
    parts: list[str] = []
    for key, coeff in term.coeffs.items():
        base = (
            print_symbol(key)
            if isinstance(key, Symbol)
            else f"(div {print_term(key.num)} {key.den})"
        )
        if coeff == 1:
            parts.append(base)
        else:
            parts.append(f"(* {print_rational(coeff)} {base})")
    if term.constant != 0 or not parts:
        parts.append(print_rational(term.constant))
    if len(parts) == 1:
        return parts[0]
    return "(+ " + " ".join(parts) + ")"


def print_formula(formula: Formula) -> str:
    if isinstance(formula, TrueF):
        return "true"
    if isinstance(formula, FalseF):
        return "false"
    if isinstance(formula, AtomF):
        atom = formula.atom
        body = print_term(atom.term)
        if atom.kind is AtomKind.LEQ0:
            return f"(<= 0 {body})"
        if atom.kind is AtomKind.LT0:
            return f"(< 0 {body})"
        if atom.kind is AtomKind.EQ0:
            return f"(= 0 {body})"
        if atom.kind is AtomKind.NEQ0:
            return f"(not (= 0 {body}))"
        return f"(divisible {atom.modulus} {body})"
    if isinstance(formula, NotF):
        return f"(not {print_formula(formula.arg)})"
    if isinstance(formula, AndF):
        return "(and " + " ".join(print_formula(a) for a in formula.args) + ")"
    if isinstance(formula, OrF):
        return "(or " + " ".join(print_formula(a) for a in formula.args) + ")"
    raise TypeError(f"not a formula: {formula!r}")
