"""Propositional formulas and clause forms.

Variables are 1-based integers.  Literals use the DIMACS convention: the
positive int v stands for the variable, -v for its negation, and 0 never
appears as a literal (it terminates clauses in files).

The constraint DSL is s-expression based::

    (implies (and A B) C)
    (exactly-one red green blue)

Operators: and, or, not, implies, xor, exactly-one.  ``true`` and ``false``
are reserved constant atoms.  Variable names are mapped to indices in order
of first occurrence.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping

from .errors import LimitError, ParseError, StructureError

Var = int
Lit = int

_OPERATORS = ("and", "or", "not", "implies", "xor", "exactly-one")
_RESERVED = _OPERATORS + ("true", "false")


def neg(lit: Lit) -> Lit:
    """Literal negation; an involution on signed ints."""
    return -lit


def var_of(lit: Lit) -> Var:
    return abs(lit)


class Formula:
    """Base class of the constraint AST."""

    def vars(self) -> frozenset[Var]:
        out: set[Var] = set()
        _collect_vars(self, out)
        return frozenset(out)


@dataclass(frozen=True)
class Const(Formula):
    value: bool


TRUE = Const(True)
FALSE = Const(False)


@dataclass(frozen=True)
class Atom(Formula):
    """A literal leaf: variable ``var``, possibly negated."""

    var: Var
    positive: bool = True

    def __post_init__(self):
        if self.var < 1:
            raise StructureError(f"variable index must be >= 1, got {self.var}")

    @property
    def lit(self) -> Lit:
        return self.var if self.positive else -self.var


@dataclass(frozen=True)
class Not(Formula):
    child: Formula


@dataclass(frozen=True)
class And(Formula):
    args: tuple

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))


@dataclass(frozen=True)
class Or(Formula):
    args: tuple

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))


@dataclass(frozen=True)
class Implies(Formula):
    lhs: Formula
    rhs: Formula


@dataclass(frozen=True)
class Xor(Formula):
    lhs: Formula
    rhs: Formula


@dataclass(frozen=True)
class ExactlyOne(Formula):
    """Exactly one argument is true.  Kept primitive in the AST; expanded
    (at-least-one plus pairwise at-most-one) when converting to CNF."""

    args: tuple

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))


def _collect_vars(f: Formula, out: set[Var]) -> None:
    if isinstance(f, Atom):
        out.add(f.var)
    elif isinstance(f, Not):
        _collect_vars(f.child, out)
    elif isinstance(f, (And, Or, ExactlyOne)):
        for g in f.args:
            _collect_vars(g, out)
    elif isinstance(f, (Implies, Xor)):
        _collect_vars(f.lhs, out)
        _collect_vars(f.rhs, out)


def eval_formula(formula: Formula, assignment: Mapping[Var, bool]) -> bool:
    """Evaluate under a total assignment; raises if a variable is missing."""
    missing = sorted(v for v in formula.vars() if v not in assignment)
    if missing:
        raise StructureError(f"assignment missing variables {missing}")
    return _eval(formula, assignment)


def _eval(f: Formula, a: Mapping[Var, bool]) -> bool:
    if isinstance(f, Const):
        return f.value
    if isinstance(f, Atom):
        return bool(a[f.var]) == f.positive
    if isinstance(f, Not):
        return not _eval(f.child, a)
    if isinstance(f, And):
        return all(_eval(g, a) for g in f.args)
    if isinstance(f, Or):
        return any(_eval(g, a) for g in f.args)
    if isinstance(f, Implies):
        return (not _eval(f.lhs, a)) or _eval(f.rhs, a)
    if isinstance(f, Xor):
        return _eval(f.lhs, a) != _eval(f.rhs, a)
    if isinstance(f, ExactlyOne):
        return sum(1 for g in f.args if _eval(g, a)) == 1
    raise TypeError(f"not a formula node: {f!r}")


# ---------------------------------------------------------------------------
# CNF container and DIMACS I/O


@dataclass
class CnfFormula:
    """Clause conjunction over vars 1..num_vars.

    ``aux_vars`` marks Tseitin-introduced definition variables; they carry
    neutral (1, 1) weights in weighted queries.
    """

    num_vars: int
    clauses: list
    aux_vars: frozenset = frozenset()

    def validate(self) -> None:
        if self.num_vars < 0:
            raise StructureError("negative num_vars")
        for clause in self.clauses:
            for lit in clause:
                if lit == 0 or abs(lit) > self.num_vars:
                    raise StructureError(f"literal {lit} out of range 1..{self.num_vars}")


def parse_dimacs(text: str) -> CnfFormula:
    """Parse DIMACS CNF.  Comment lines start with 'c'; clauses are
    0-terminated and may span lines.  Header counts must match."""
    num_vars = num_clauses = None
    clauses: list = []
    current: list = []
    last_line = 1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        last_line = lineno
        if line.startswith("p"):
            if num_vars is not None:
                raise ParseError("duplicate 'p cnf' header", lineno)
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ParseError("malformed header, expected 'p cnf <vars> <clauses>'", lineno)
            try:
                num_vars, num_clauses = int(parts[2]), int(parts[3])
            except ValueError:
                raise ParseError("non-integer header counts", lineno) from None
            if num_vars < 0 or num_clauses < 0:
                raise ParseError("negative header counts", lineno)
            continue
        if num_vars is None:
            raise ParseError("clause data before 'p cnf' header", lineno)
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise ParseError(f"bad literal {tok!r}", lineno) from None
            if lit == 0:
                clauses.append(current)
                current = []
            else:
                if abs(lit) > num_vars:
                    raise ParseError(f"literal {lit} out of range 1..{num_vars}", lineno)
                current.append(lit)
    if num_vars is None:
        raise ParseError("missing 'p cnf' header", last_line)
    if current:
        raise ParseError("missing clause terminator 0", last_line)
    if len(clauses) != num_clauses:
        raise ParseError(
            f"header declares {num_clauses} clauses, found {len(clauses)}", last_line
        )
    return CnfFormula(num_vars, clauses)


def write_dimacs(cnf: CnfFormula) -> str:
    lines = [f"p cnf {cnf.num_vars} {len(cnf.clauses)}"]
    for clause in cnf.clauses:
        lines.append(" ".join(str(lit) for lit in clause) + " 0")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Constraint DSL


def parse_constraint_dsl(text: str):
    """Parse an s-expression constraint.

    Returns (formula, name_table) where name_table maps variable names to
    indices in first-occurrence order.
    """
    tokens = _tokenize(text)
    if not tokens:
        raise ParseError("empty input")
    names: dict = {}
    formula, rest = _parse_expr(tokens, names)
    if rest:
        tok, line = rest[0]
        raise ParseError(f"trailing input starting at {tok!r}", line)
    return formula, names


def _tokenize(text: str):
    tokens = []
    i, line = 0, 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            i += 1
        elif ch.isspace():
            i += 1
        elif ch in "()":
            tokens.append((ch, line))
            i += 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in "()":
                j += 1
            tokens.append((text[i:j], line))
            i = j
    return tokens


def _parse_expr(tokens, names):
    tok, line = tokens[0]
    if tok == ")":
        raise ParseError("unexpected ')'", line)
    if tok != "(":
        return _parse_atom(tok, line, names), tokens[1:]
    rest = tokens[1:]
    if not rest:
        raise ParseError("unbalanced '('", line)
    head, head_line = rest[0]
    if head in ("(", ")"):
        raise ParseError("expected operator after '('", head_line)
    if head not in _OPERATORS:
        raise ParseError(f"unknown operator {head!r}", head_line)
    rest = rest[1:]
    args = []
    while True:
        if not rest:
            raise ParseError("unbalanced '('", line)
        if rest[0][0] == ")":
            rest = rest[1:]
            break
        arg, rest = _parse_expr(rest, names)
        args.append(arg)
    return _make_node(head, args, head_line), rest


def _parse_atom(tok, line, names):
    if tok == "true":
        return TRUE
    if tok == "false":
        return FALSE
    if tok in _OPERATORS:
        raise ParseError(f"operator {tok!r} used as a variable", line)
    if tok not in names:
        names[tok] = len(names) + 1
    return Atom(names[tok])


def _make_node(op, args, line):
    if op == "not":
        if len(args) != 1:
            raise ParseError(f"'not' takes 1 argument, got {len(args)}", line)
        return Not(args[0])
    if op in ("implies", "xor"):
        if len(args) != 2:
            raise ParseError(f"'{op}' takes 2 arguments, got {len(args)}", line)
        return Implies(*args) if op == "implies" else Xor(*args)
    if not args:
        raise ParseError(f"'{op}' needs at least 1 argument", line)
    if op == "and":
        return And(args)
    if op == "or":
        return Or(args)
    return ExactlyOne(args)


def format_name_table(names: Mapping[str, Var]) -> str:
    """Sidecar text: one '<name> <index>' line per variable."""
    lines = [f"{name} {idx}" for name, idx in sorted(names.items(), key=lambda kv: kv[1])]
    return "\n".join(lines) + ("\n" if lines else "")


# ---------------------------------------------------------------------------
# CNF conversion


def to_cnf(formula: Formula, mode: str = "distribute", clause_cap: int = 100_000) -> CnfFormula:
    """Convert a formula to CNF.

    ``distribute`` produces an equivalent CNF over the original variables
    only (exponential in the worst case; guarded by clause_cap).
    ``tseitin`` is linear-size and equisatisfiable, introducing aux vars
    with full biconditional definitions, so every model of the original
    formula extends to exactly one model of the encoding.
    """
    if mode not in ("distribute", "tseitin"):
        raise ValueError(f"unknown to_cnf mode {mode!r}")
    orig_vars = formula.vars()
    num_orig = max(orig_vars, default=0)
    f = _simplify(_desugar(formula, keep_xor=(mode == "tseitin")))
    if mode == "distribute":
        clause_sets = _distribute(f, clause_cap)
        clauses = _canonical_clauses(clause_sets)
        return CnfFormula(num_orig, clauses)
    return _tseitin(f, num_orig)


def _desugar(f: Formula, keep_xor: bool) -> Formula:
    """Rewrite implies and exactly-one (and xor unless kept) into and/or/not."""
    if isinstance(f, (Const, Atom)):
        return f
    if isinstance(f, Not):
        return Not(_desugar(f.child, keep_xor))
    if isinstance(f, And):
        return And([_desugar(g, keep_xor) for g in f.args])
    if isinstance(f, Or):
        return Or([_desugar(g, keep_xor) for g in f.args])
    if isinstance(f, Implies):
        return Or([Not(_desugar(f.lhs, keep_xor)), _desugar(f.rhs, keep_xor)])
    if isinstance(f, Xor):
        a, b = _desugar(f.lhs, keep_xor), _desugar(f.rhs, keep_xor)
        if keep_xor:
            return Xor(a, b)
        return Or([And([a, Not(b)]), And([Not(a), b])])
    if isinstance(f, ExactlyOne):
        args = [_desugar(g, keep_xor) for g in f.args]
        parts = [Or(args)]
        for a, b in itertools.combinations(args, 2):
            parts.append(Or([Not(a), Not(b)]))
        return And(parts)
    raise TypeError(f"not a formula node: {f!r}")


def _simplify(f: Formula) -> Formula:
    """Constant folding; flattens nothing else."""
    if isinstance(f, (Const, Atom)):
        return f
    if isinstance(f, Not):
        c = _simplify(f.child)
        if isinstance(c, Const):
            return FALSE if c.value else TRUE
        return Not(c)
    if isinstance(f, And):
        kept = []
        for g in f.args:
            s = _simplify(g)
            if isinstance(s, Const):
                if not s.value:
                    return FALSE
            else:
                kept.append(s)
        if not kept:
            return TRUE
        return kept[0] if len(kept) == 1 else And(kept)
    if isinstance(f, Or):
        kept = []
        for g in f.args:
            s = _simplify(g)
            if isinstance(s, Const):
                if s.value:
                    return TRUE
            else:
                kept.append(s)
        if not kept:
            return FALSE
        return kept[0] if len(kept) == 1 else Or(kept)
    if isinstance(f, Xor):
        a, b = _simplify(f.lhs), _simplify(f.rhs)
        if isinstance(a, Const):
            return _simplify(Not(b)) if a.value else b
        if isinstance(b, Const):
            return _simplify(Not(a)) if b.value else a
        return Xor(a, b)
    raise TypeError(f"unexpected node in simplify: {f!r}")


def _nnf(f: Formula, positive: bool) -> Formula:
    if isinstance(f, Const):
        return f if positive else Const(not f.value)
    if isinstance(f, Atom):
        return f if positive else Atom(f.var, not f.positive)
    if isinstance(f, Not):
        return _nnf(f.child, not positive)
    if isinstance(f, And):
        args = [_nnf(g, positive) for g in f.args]
        return And(args) if positive else Or(args)
    if isinstance(f, Or):
        args = [_nnf(g, positive) for g in f.args]
        return Or(args) if positive else And(args)
    raise TypeError(f"unexpected node in nnf: {f!r}")


def _distribute(f: Formula, cap: int) -> list:
    """Clause sets (frozensets of lits) for a desugared, simplified formula."""
    f = _nnf(f, True)
    return _clauses_of(f, cap)


def _clauses_of(f: Formula, cap: int) -> list:
    if isinstance(f, Const):
        return [] if f.value else [frozenset()]
    if isinstance(f, Atom):
        return [frozenset({f.lit})]
    if isinstance(f, And):
        out, seen = [], set()
        for g in f.args:
            for clause in _clauses_of(g, cap):
                if clause not in seen:
                    seen.add(clause)
                    out.append(clause)
            if len(out) > cap:
                raise LimitError(f"distribute exceeded clause cap {cap}")
        return out
    if isinstance(f, Or):
        acc = [frozenset()]
        for g in f.args:
            child = _clauses_of(g, cap)
            nxt, seen = [], set()
            for a, b in itertools.product(acc, child):
                merged = a | b
                if any(-lit in merged for lit in merged):
                    continue  # tautology
                if merged not in seen:
                    seen.add(merged)
                    nxt.append(merged)
                if len(nxt) > cap:
                    raise LimitError(f"distribute exceeded clause cap {cap}")
            acc = nxt
            if not acc:
                # every product clause was tautological: the disjunct is valid
                return []
        return acc
    raise TypeError(f"unexpected node in distribute: {f!r}")


def _canonical_clauses(clause_sets: list) -> list:
    keyed = []
    for cs in clause_sets:
        lits = sorted(cs, key=lambda l: (abs(l), l < 0))
        keyed.append(tuple(lits))
    keyed = sorted(set(keyed), key=lambda c: [(abs(l), l < 0) for l in c])
    return [list(c) for c in keyed]


def _tseitin(f: Formula, num_orig: int) -> CnfFormula:
    if isinstance(f, Const):
        if f.value:
            return CnfFormula(num_orig, [])
        return CnfFormula(num_orig, [[]])
    clauses: list = []
    memo: dict = {}
    counter = [num_orig]

    def fresh() -> int:
        counter[0] += 1
        return counter[0]

    def rep(g: Formula) -> int:
        hit = memo.get(g)
        if hit is not None:
            return hit
        if isinstance(g, Atom):
            r = g.lit
        elif isinstance(g, Not):
            r = -rep(g.child)
        elif isinstance(g, And):
            cs = [rep(h) for h in g.args]
            r = fresh()
            for c in cs:
                clauses.append([-r, c])
            clauses.append([r] + [-c for c in cs])
        elif isinstance(g, Or):
            cs = [rep(h) for h in g.args]
            r = fresh()
            for c in cs:
                clauses.append([r, -c])
            clauses.append([-r] + cs)
        elif isinstance(g, Xor):
            a, b = rep(g.lhs), rep(g.rhs)
            r = fresh()
            clauses.append([-r, a, b])
            clauses.append([-r, -a, -b])
            clauses.append([r, a, -b])
            clauses.append([r, -a, b])
        else:
            raise TypeError(f"unexpected node in tseitin: {g!r}")
        memo[g] = r
        return r

    root = rep(f)
    clauses.append([root])
    aux = frozenset(range(num_orig + 1, counter[0] + 1))
    return CnfFormula(counter[0], clauses, aux_vars=aux)
