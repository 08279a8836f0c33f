"""Compile projector satisfiability into existential real arithmetic.

A formula becomes a system of matrix equations over projector variables,
which is unfolded entrywise into polynomial atoms and printed as SMT-LIB2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping

import numpy as np

from . import __version__
from .formula import AND, NOT, TOP, VAR, Formula, subformulas
from .pba import subformula_values

Expr = tuple
Poly = dict  # monomial (sorted tuple of variable names) -> coefficient

ONE: Expr = ("one",)
ZERO: Expr = ("zero",)


def mvar(name: str) -> Expr:
    return ("var", name)


def add(a: Expr, b: Expr) -> Expr:
    return ("add", a, b)


def sub(a: Expr, b: Expr) -> Expr:
    return ("sub", a, b)


def mul(a: Expr, b: Expr) -> Expr:
    return ("mul", a, b)


def dag(a: Expr) -> Expr:
    return ("dag", a)


def expr_text(e: Expr) -> str:
    k = e[0]
    if k == "var":
        return e[1]
    if k == "one":
        return "1"
    if k == "zero":
        return "0"
    if k == "dag":
        return f"{expr_text(e[1])}^T"
    sym = {"add": "+", "sub": "-", "mul": "*"}[k]
    return f"({expr_text(e[1])} {sym} {expr_text(e[2])})"


@dataclass
class MatrixSystem:
    """Matrix equations lhs = rhs plus one root constraint.

    ``value_of[k]`` names the matrix variable carrying the k-th subformula
    (post-order); variables reuse their P matrix.
    """

    formula: Formula
    mode: str
    variables: list[str]
    equations: list[tuple[Expr, Expr]]
    root: Expr
    value_of: list[str] = field(default_factory=list)

    def text(self) -> str:
        rows = [f"{expr_text(a)} = {expr_text(b)}" for a, b in self.equations]
        rel = "=" if self.mode == "strong" else "!="
        rhs = "1" if self.mode == "strong" else "0"
        rows.append(f"{expr_text(self.root)} {rel} {rhs}")
        return "\n".join(rows)

    @property
    def constraint_count(self) -> int:
        return len(self.equations) + 1


def build_system(f: Formula, mode: str = "strong") -> MatrixSystem:
    """Projector equations for every variable and subformula, then the root."""
    if mode not in ("strong", "weak"):
        raise ValueError("mode must be strong or weak")
    subs = subformulas(f)
    index = {g: k for k, g in enumerate(subs)}
    names: list[str] = []
    value_of: list[str] = []
    eqs: list[tuple[Expr, Expr]] = []
    for k, g in enumerate(subs):
        if g.kind == VAR:
            p = f"P_{g.name}"
            names.append(p)
            value_of.append(p)
            eqs.append((mul(mvar(p), mvar(p)), mvar(p)))
            eqs.append((mvar(p), dag(mvar(p))))
            continue
        z = f"Z_{k}"
        names.append(z)
        value_of.append(z)
        if g.kind == TOP:
            eqs.append((mvar(z), ONE))
        elif g.kind == NOT:
            v = mvar(value_of[index[g.child]])
            eqs.append((mvar(z), add(ONE, sub(ZERO, v))))
        else:
            a, b = mvar(value_of[index[g.left]]), mvar(value_of[index[g.right]])
            if g.kind == AND:
                eqs.append((mvar(z), mul(a, b)))
            else:
                eqs.append((mvar(z), sub(add(a, b), mul(a, b))))
            eqs.append((sub(mul(a, b), mul(b, a)), ZERO))
    # P variables first in order of first occurrence, then the Z's
    ordered = [n for n in names if n.startswith("P_")] + [n for n in names if n.startswith("Z_")]
    return MatrixSystem(f, mode, ordered, eqs, mvar(value_of[-1]), value_of)


# ---------------------------------------------------------------- polynomials


def _padd(a: Poly, b: Poly, sign: int = 1) -> Poly:
    out = dict(a)
    for m, c in b.items():
        v = out.get(m, 0) + sign * c
        if v:
            out[m] = v
        else:
            out.pop(m, None)
    return out


def _pmul(a: Poly, b: Poly) -> Poly:
    out: Poly = {}
    for m1, c1 in a.items():
        for m2, c2 in b.items():
            m = tuple(sorted(m1 + m2))
            v = out.get(m, 0) + c1 * c2
            if v:
                out[m] = v
            else:
                out.pop(m, None)
    return out


def _pneg(a: Poly) -> Poly:
    return {m: -c for m, c in a.items()}


def _const(c) -> Poly:
    return {(): c} if c else {}


def poly_degree(p: Poly) -> int:
    return max((len(m) for m in p), default=0)


def poly_eval(p: Poly, values: Mapping[str, float]) -> float:
    total = 0.0
    for m, c in p.items():
        term = float(c)
        for v in m:
            term *= values[v]
        total += term
    return total


@dataclass(frozen=True)
class Atom:
    """lhs = rhs or lhs != rhs over real polynomials."""

    rel: str
    lhs: tuple
    rhs: tuple
    origin: str = ""

    @property
    def lhs_poly(self) -> Poly:
        return dict(self.lhs)

    @property
    def rhs_poly(self) -> Poly:
        return dict(self.rhs)

    def degree(self) -> int:
        return max(poly_degree(self.lhs_poly), poly_degree(self.rhs_poly))

    def holds(self, values: Mapping[str, float], eps: float) -> bool:
        gap = abs(poly_eval(self.lhs_poly, values) - poly_eval(self.rhs_poly, values))
        return gap <= eps if self.rel == "=" else gap > eps

    def smt(self) -> str:
        op = "=" if self.rel == "=" else "distinct"
        return f"({op} {poly_smt(self.lhs_poly)} {poly_smt(self.rhs_poly)})"


def _freeze(p: Poly) -> tuple:
    return tuple(sorted(p.items(), key=lambda mc: (len(mc[0]), mc[0])))


@dataclass
class ScalarSentence:
    """Existentially quantified conjunction of polynomial atoms."""

    variables: list[str]
    atoms: list[Atom]
    field: str
    d: int

    def max_degree(self) -> int:
        return max((a.degree() for a in self.atoms), default=0)


class _Scalarizer:
    def __init__(self, d: int, field: str):
        self.d = d
        self.complex = field == "C"

    def entry_var(self, name: str, i: int, j: int, part: str = "") -> Poly:
        suffix = f"_{part}" if part else ""
        return {(f"{name}_{i + 1}_{j + 1}{suffix}",): 1}

    def matrix(self, e: Expr) -> list[list[Any]]:
        """Entries as polys (real) or (re, im) poly pairs (complex)."""
        d = self.d
        k = e[0]
        if k == "var":
            if self.complex:
                return [[(self.entry_var(e[1], i, j, "re"), self.entry_var(e[1], i, j, "im")) for j in range(d)] for i in range(d)]
            return [[self.entry_var(e[1], i, j) for j in range(d)] for i in range(d)]
        if k in ("one", "zero"):
            c = 1 if k == "one" else 0
            if self.complex:
                return [[(_const(c if i == j else 0), {}) for j in range(d)] for i in range(d)]
            return [[_const(c if i == j else 0) for j in range(d)] for i in range(d)]
        if k == "dag":
            m = self.matrix(e[1])
            if self.complex:
                return [[(m[j][i][0], _pneg(m[j][i][1])) for j in range(d)] for i in range(d)]
            return [[m[j][i] for j in range(d)] for i in range(d)]
        a, b = self.matrix(e[1]), self.matrix(e[2])
        if k in ("add", "sub"):
            s = 1 if k == "add" else -1
            if self.complex:
                return [[(_padd(a[i][j][0], b[i][j][0], s), _padd(a[i][j][1], b[i][j][1], s)) for j in range(d)] for i in range(d)]
            return [[_padd(a[i][j], b[i][j], s) for j in range(d)] for i in range(d)]
        out = []
        for i in range(d):
            row = []
            for j in range(d):
                if self.complex:
                    re: Poly = {}
                    im: Poly = {}
                    for t in range(d):
                        (ar, ai), (br, bi) = a[i][t], b[t][j]
                        re = _padd(_padd(re, _pmul(ar, br)), _pmul(ai, bi), -1)
                        im = _padd(_padd(im, _pmul(ar, bi)), _pmul(ai, br))
                    row.append((re, im))
                else:
                    acc: Poly = {}
                    for t in range(d):
                        acc = _padd(acc, _pmul(a[i][t], b[t][j]))
                    row.append(acc)
            out.append(row)
        return out


def scalarize(sys: MatrixSystem, d: int, field: str = "R") -> ScalarSentence:
    """Unfold each matrix equation entrywise; complex entries split into
    real and imaginary parts. Atoms that hold identically are dropped."""
    if d < 1:
        raise ValueError("d must be at least 1")
    if field not in ("R", "C"):
        raise ValueError("field must be R or C")
    sc = _Scalarizer(d, field)
    variables = []
    for name in sys.variables:
        for i in range(d):
            for j in range(d):
                if field == "C":
                    variables += [f"{name}_{i + 1}_{j + 1}_re", f"{name}_{i + 1}_{j + 1}_im"]
                else:
                    variables.append(f"{name}_{i + 1}_{j + 1}")
    atoms: list[Atom] = []

    def emit(lhs: Poly, rhs: Poly, origin: str) -> None:
        if _padd(lhs, rhs, -1):
            atoms.append(Atom("=", _freeze(lhs), _freeze(rhs), origin))

    # the root constraint comes first so it is the first atom reported
    _emit_root(sc, sys, d, field, emit, atoms)
    for lhs, rhs in sys.equations:
        A, B = sc.matrix(lhs), sc.matrix(rhs)
        origin = f"{expr_text(lhs)} = {expr_text(rhs)}"
        for i in range(d):
            for j in range(d):
                if field == "C":
                    emit(A[i][j][0], B[i][j][0], origin)
                    emit(A[i][j][1], B[i][j][1], origin)
                else:
                    emit(A[i][j], B[i][j], origin)
    return ScalarSentence(variables, atoms, field, d)


def _emit_root(sc: _Scalarizer, sys: MatrixSystem, d: int, field: str, emit, atoms: list[Atom]) -> None:
    R = sc.matrix(sys.root)
    if sys.mode == "strong":
        one = sc.matrix(ONE)
        origin = f"{expr_text(sys.root)} = 1"
        for i in range(d):
            for j in range(d):
                if field == "C":
                    emit(R[i][j][0], one[i][j][0], origin)
                    emit(R[i][j][1], one[i][j][1], origin)
                else:
                    emit(R[i][j], one[i][j], origin)
    else:
        # a projector is nonzero iff its trace (its rank) is nonzero
        trace: Poly = {}
        for i in range(d):
            trace = _padd(trace, R[i][i][0] if field == "C" else R[i][i])
        atoms.append(Atom("!=", _freeze(trace), (), f"trace {expr_text(sys.root)} != 0"))


# ---------------------------------------------------------------- SMT-LIB2


def _num(c) -> str:
    c = Fraction(c)
    if c.denominator == 1:
        return str(c.numerator) if c >= 0 else f"(- {-c.numerator})"
    body = f"(/ {abs(c.numerator)} {c.denominator})"
    return body if c >= 0 else f"(- {body})"


def poly_smt(p: Poly) -> str:
    terms = []
    for m, c in sorted(p.items(), key=lambda mc: (len(mc[0]), mc[0])):
        if not m:
            terms.append(_num(c))
        elif c == 1 and len(m) == 1:
            terms.append(m[0])
        elif c == 1:
            terms.append("(* " + " ".join(m) + ")")
        else:
            terms.append("(* " + " ".join([_num(c), *m]) + ")")
    if not terms:
        return "0"
    if len(terms) == 1:
        return terms[0]
    return "(+ " + " ".join(terms) + ")"


def emit_smt(s: ScalarSentence, comment: str | None = None) -> str:
    """SMT-LIB2 (QF_NRA) text with one declaration per real and one assert per atom."""
    out = [f"; pbasat {__version__}"]
    if comment:
        out.append(f"; {comment}")
    out.append("(set-logic QF_NRA)")
    out += [f"(declare-const {v} Real)" for v in s.variables]
    out += [f"(assert {a.smt()})" for a in s.atoms]
    out.append("(check-sat)")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------- witnesses


@dataclass(frozen=True)
class WitnessReport:
    """Outcome of substituting values into a sentence; falsy on failure."""

    ok: bool
    index: int | None = None
    atom: Atom | None = None

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        if self.ok:
            return "all atoms hold"
        return f"atom {self.index} fails: {self.atom.smt()}  [{self.atom.origin}]"


def check_witness(s: ScalarSentence, values: Mapping[str, float], eps: float = 1e-9) -> WitnessReport:
    """Evaluate every atom; report the first that fails."""
    missing = [v for v in s.variables if v not in values]
    if missing:
        raise KeyError(f"no value for {missing[0]}")
    for k, a in enumerate(s.atoms):
        if not a.holds(values, eps):
            return WitnessReport(False, k, a)
    return WitnessReport(True)


def flatten_witness(sys: MatrixSystem, alpha: Mapping[str, Any], ops, field: str = "R") -> dict[str, float]:
    """Real values for every scalar variable from a projector substitution.

    Subformula matrices are computed with ``ops`` (a projector backend).
    """
    vals = subformula_values(sys.formula, alpha, ops)
    d = ops.d
    out: dict[str, float] = {}
    for name, g in zip(sys.value_of, subformulas(sys.formula)):
        m = np.asarray(vals[g], dtype=complex)
        for i in range(d):
            for j in range(d):
                key = f"{name}_{i + 1}_{j + 1}"
                if field == "C":
                    out[key + "_re"] = float(m[i, j].real)
                    out[key + "_im"] = float(m[i, j].imag)
                else:
                    out[key] = float(m[i, j].real)
    return out


def zero_values(s: ScalarSentence) -> dict[str, float]:
    return {v: 0.0 for v in s.variables}


def parse_values(text: str) -> dict[str, float]:
    """``name value`` per line; ``#`` comments."""
    out: dict[str, float] = {}
    for lineno, row in enumerate(text.splitlines(), 1):
        row = row.split("#", 1)[0].split()
        if not row:
            continue
        if len(row) != 2:
            raise ValueError(f"line {lineno}: expected 'name value'")
        out[row[0]] = float(Fraction(row[1])) if "/" in row[1] else float(row[1])
    return out


def format_values(values: Mapping[str, float]) -> str:
    return "".join(f"{k} {v!r}\n" for k, v in values.items())
