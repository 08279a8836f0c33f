"""Small dense matrices: projector and involution algebras, Pauli vectors,
cross products on the projective plane, and the magic square."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

DEFAULT_EPS = 1e-9

Mat = np.ndarray


# ---------------------------------------------------------------- basics


def is_exact(m: Mat) -> bool:
    return m.dtype == object


def identity(d: int, exact: bool = False, dtype=float) -> Mat:
    if exact:
        m = np.full((d, d), Fraction(0), dtype=object)
        for i in range(d):
            m[i, i] = Fraction(1)
        return m
    return np.eye(d, dtype=dtype)


def zeros(d: int, exact: bool = False, dtype=float) -> Mat:
    if exact:
        return np.full((d, d), Fraction(0), dtype=object)
    return np.zeros((d, d), dtype=dtype)


def dagger(m: Mat) -> Mat:
    return m.T if is_exact(m) else m.conj().T


def frob(m: Mat) -> float:
    if is_exact(m):
        return float(sum(abs(x) ** 2 for x in m.flat)) ** 0.5
    return float(np.linalg.norm(m))


def mat_equal(a: Mat, b: Mat, eps: float = DEFAULT_EPS) -> bool:
    """Equality up to ``eps`` in Frobenius norm; exact when both are rational."""
    if a.shape != b.shape:
        return False
    if is_exact(a) and is_exact(b):
        return bool(np.all(a == b))
    return frob(np.asarray(a, dtype=complex) - np.asarray(b, dtype=complex)) <= eps


def is_zero(m: Mat, eps: float = DEFAULT_EPS) -> bool:
    if is_exact(m):
        return all(x == 0 for x in m.flat)
    return frob(m) <= eps


def commutator(a: Mat, b: Mat) -> Mat:
    return a @ b - b @ a


def anticommutator(a: Mat, b: Mat) -> Mat:
    return a @ b + b @ a


def is_projector(m: Mat, eps: float = DEFAULT_EPS) -> bool:
    return m.ndim == 2 and m.shape[0] == m.shape[1] and mat_equal(m, dagger(m), eps) and mat_equal(m @ m, m, eps)


def is_involution(m: Mat, eps: float = DEFAULT_EPS) -> bool:
    d = m.shape[0]
    return mat_equal(m, dagger(m), eps) and mat_equal(m @ m, identity(d, is_exact(m), m.dtype if not is_exact(m) else float), eps)


def rank(m: Mat, eps: float = DEFAULT_EPS) -> int:
    """Gaussian elimination rank: exact pivots for rationals, |pivot| > eps otherwise."""
    exact = is_exact(m)
    rows = [list(r) for r in (m.tolist() if exact else np.asarray(m, dtype=complex).tolist())]
    if not rows:
        return 0
    nrows, ncols = len(rows), len(rows[0])
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        if exact:
            piv = next((i for i in range(r, nrows) if rows[i][c] != 0), None)
        else:
            best = max(range(r, nrows), key=lambda i: abs(rows[i][c]))
            piv = best if abs(rows[best][c]) > eps else None
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        for i in range(r + 1, nrows):
            f = rows[i][c] / rows[r][c]
            if f:
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        r += 1
    return r


def rational_vector(v: Iterable[Any]) -> tuple[Fraction, ...]:
    return tuple(Fraction(x) for x in v)


def line_projector(v: Sequence[Any], exact: bool = True) -> Mat:
    """Rank-1 projector onto the span of ``v``; rational when ``v`` is."""
    if exact:
        w = rational_vector(v)
        n2 = sum(x * x for x in w)
        if n2 == 0:
            raise ValueError("zero vector has no line")
        m = np.empty((len(w), len(w)), dtype=object)
        for i, a in enumerate(w):
            for j, b in enumerate(w):
                m[i, j] = a * b / n2
        return m
    w = np.asarray(v, dtype=complex)
    n2 = np.vdot(w, w).real
    if n2 == 0:
        raise ValueError("zero vector has no line")
    return np.outer(w, w.conj()) / n2


def to_float(m: Mat) -> Mat:
    if is_exact(m):
        return np.array([[float(x) for x in row] for row in m], dtype=float)
    return m


def embed(m: Mat, d: int) -> Mat:
    """Place ``m`` in the top-left block of a d x d zero matrix."""
    k = m.shape[0]
    out = zeros(d, is_exact(m), m.dtype if not is_exact(m) else float)
    out[:k, :k] = m
    return out


def parse_entry(text: str) -> Any:
    """Matrix literal entry: rational ``p/q`` or complex ``a+bi``."""
    t = text.strip()
    if "i" in t or "j" in t:
        return complex(t.replace("i", "j"))
    return Fraction(t)


def parse_matrix(entries: Sequence[str], d: int) -> Mat:
    vals = [parse_entry(e) for e in entries]
    if len(vals) != d * d:
        raise ValueError(f"expected {d * d} entries, found {len(vals)}")
    if any(isinstance(v, complex) for v in vals):
        return np.array(vals, dtype=complex).reshape(d, d)
    m = np.empty((d, d), dtype=object)
    for k, v in enumerate(vals):
        m[k // d, k % d] = v
    return m


# ---------------------------------------------------------------- algebras


class ProjectorOps:
    """Projector pBA on K^d: comm = commute, ~E = I - E, E & F = EF,
    E | F = E + F - EF. Equality and commutation use ``eps`` (Frobenius)."""

    def __init__(self, d: int, field: str = "R", eps: float = DEFAULT_EPS, exact: bool = False):
        if field not in ("R", "C"):
            raise ValueError("field must be R or C")
        if exact and field != "R":
            raise ValueError("the exact backend is real only")
        self.d = d
        self.field = field
        self.exact = exact
        self.eps = 0.0 if exact else eps
        self._dtype = float if field == "R" else complex
        self._one = identity(d, exact, self._dtype)
        self._zero = zeros(d, exact, self._dtype)

    def zero(self) -> Mat:
        return self._zero

    def one(self) -> Mat:
        return self._one

    def comm(self, a: Mat, b: Mat) -> bool:
        return is_zero(commutator(a, b), self.eps)

    def neg(self, a: Mat) -> Mat:
        return self._one - a

    def meet(self, a: Mat, b: Mat) -> Mat:
        return a @ b

    def join(self, a: Mat, b: Mat) -> Mat:
        return a + b - a @ b

    def equal(self, a: Mat, b: Mat) -> bool:
        return mat_equal(a, b, self.eps)

    def is_projector(self, m: Mat) -> bool:
        return m.shape == (self.d, self.d) and is_projector(m, self.eps)

    def check(self, m: Mat) -> Mat:
        """Reject non-projectors before they enter a computation."""
        if not self.is_projector(m):
            raise ValueError("matrix is not a projector at this dimension")
        return m


def projector_ops(d: int, field: str = "R", eps: float = DEFAULT_EPS, exact: bool = False) -> ProjectorOps:
    return ProjectorOps(d, field, eps, exact)


def to_involution(e: Mat) -> Mat:
    """b(E) = I - 2E."""
    return identity(e.shape[0], is_exact(e), e.dtype if not is_exact(e) else float) - 2 * e


def from_involution(a: Mat) -> Mat:
    """Inverse of b: E = (I - A) / 2."""
    if is_exact(a):
        return (identity(a.shape[0], True) - a) * Fraction(1, 2)
    return (np.eye(a.shape[0], dtype=a.dtype) - a) / 2


class InvolutionOps:
    """Self-adjoint involutions on C^d with the projector operations
    transported along b, so b is an isomorphism of operation tables."""

    def __init__(self, d: int, eps: float = DEFAULT_EPS):
        self.d = d
        self.eps = eps
        self._proj = ProjectorOps(d, "C", eps)
        self._one = -np.eye(d, dtype=complex)
        self._zero = np.eye(d, dtype=complex)

    def zero(self) -> Mat:
        return self._zero

    def one(self) -> Mat:
        return self._one

    def comm(self, a: Mat, b: Mat) -> bool:
        return is_zero(commutator(a, b), self.eps)

    def neg(self, a: Mat) -> Mat:
        return -a

    def meet(self, a: Mat, b: Mat) -> Mat:
        return to_involution(self._proj.meet(from_involution(a), from_involution(b)))

    def join(self, a: Mat, b: Mat) -> Mat:
        return to_involution(self._proj.join(from_involution(a), from_involution(b)))

    def xor(self, a: Mat, b: Mat) -> Mat:
        return a @ b

    def equal(self, a: Mat, b: Mat) -> bool:
        return mat_equal(a, b, self.eps)

    def check(self, m: Mat) -> Mat:
        if m.shape != (self.d, self.d) or not is_involution(np.asarray(m, dtype=complex), self.eps):
            raise ValueError("matrix is not a self-adjoint involution at this dimension")
        return m


def involution_ops(d: int, eps: float = DEFAULT_EPS) -> InvolutionOps:
    return InvolutionOps(d, eps)


# ---------------------------------------------------------------- Pauli and cross product

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
I2 = np.eye(2, dtype=complex)


def pauli(v: Sequence[Any]) -> Mat:
    """a1 sx + a2 sy + a3 sz as an explicit 2 x 2 matrix."""
    a1, a2, a3 = (complex(x) for x in v)
    return np.array([[a3, a1 - 1j * a2], [a1 + 1j * a2, -a3]], dtype=complex)


def cross(v: Sequence[Any], w: Sequence[Any]) -> tuple:
    v1, v2, v3 = v
    w1, w2, w3 = w
    return (v2 * w3 - v3 * w2, v3 * w1 - v1 * w3, v1 * w2 - v2 * w1)


def dot(v: Sequence[Any], w: Sequence[Any]) -> Any:
    return sum(a * b for a, b in zip(v, w))


@dataclass(frozen=True)
class ProjLine:
    """A line through the origin, stored as its primitive integer direction
    with first nonzero coordinate positive."""

    coords: tuple[int, ...]

    @classmethod
    def of(cls, v: Sequence[Any]) -> "ProjLine":
        w = rational_vector(v)
        if all(x == 0 for x in w):
            raise ValueError("zero vector has no line")
        den = 1
        for x in w:
            den = den * x.denominator // gcd(den, x.denominator)
        ints = [int(x * den) for x in w]
        g = 0
        for x in ints:
            g = gcd(g, abs(x))
        ints = [x // g for x in ints]
        first = next(x for x in ints if x != 0)
        if first < 0:
            ints = [-x for x in ints]
        return cls(tuple(ints))

    def vector(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(x) for x in self.coords)

    def projector(self) -> Mat:
        return line_projector(self.coords, exact=True)

    def cross(self, other: "ProjLine") -> "ProjLine | None":
        """Line of the cross product, or None when the lines coincide."""
        c = cross(self.coords, other.coords)
        if all(x == 0 for x in c):
            return None
        return ProjLine.of(c)

    def orthogonal(self, other: "ProjLine") -> bool:
        return dot(self.coords, other.coords) == 0

    def __str__(self) -> str:
        return "(" + ",".join(str(x) for x in self.coords) + ")"


def eval_cross_term(t, lines: Mapping[str, ProjLine]):
    """Value of a cross-product term on lines, or Undefined at the first
    subterm that crosses a line with itself."""
    from .graphs import term_subterms
    from .pba import Undefined

    val: dict[Any, ProjLine] = {}
    for s in term_subterms(t):
        if s.is_var():
            if s.name not in lines:
                raise KeyError(f"no line for variable {s.name!r}")
            val[s] = lines[s.name]
        else:
            c = val[s.left].cross(val[s.right])
            if c is None:
                return Undefined(s)
            val[s] = c
    return val[t]


def xsat_satisfied(t, lines: Mapping[str, ProjLine]) -> bool:
    """Is the term defined and equal to the line of x1?"""
    from .pba import Undefined

    v = eval_cross_term(t, lines)
    return not isinstance(v, Undefined) and v == lines["x1"]


# ---------------------------------------------------------------- magic square


def standard_magic(d: int = 4) -> list[list[Mat]]:
    """The two-qubit Pauli table; tensored with I_{d/4} for larger d."""
    if d % 4:
        raise ValueError("d must be a multiple of 4")
    k = np.kron
    table = [
        [k(SIGMA_X, I2), k(I2, SIGMA_X), k(SIGMA_X, SIGMA_X)],
        [k(I2, SIGMA_Z), k(SIGMA_Z, I2), k(SIGMA_Z, SIGMA_Z)],
        [k(SIGMA_X, SIGMA_Z), k(SIGMA_Z, SIGMA_X), k(SIGMA_Y, SIGMA_Y)],
    ]
    if d > 4:
        pad = np.eye(d // 4, dtype=complex)
        table = [[k(m, pad) for m in row] for row in table]
    return table


MAGIC_CONTEXTS: list[tuple[tuple[int, int], ...]] = [
    ((0, 0), (0, 1), (0, 2)),
    ((1, 0), (1, 1), (1, 2)),
    ((2, 0), (2, 1), (2, 2)),
    ((0, 0), (1, 0), (2, 0)),
    ((0, 1), (1, 1), (2, 1)),
    ((0, 2), (1, 2), (2, 2)),
]
# required product of each context: +I except the last column
MAGIC_SIGNS = (1, 1, 1, 1, 1, -1)


def magic_violations(table: Sequence[Sequence[Mat]], d: int, eps: float = DEFAULT_EPS) -> list[str]:
    out = []
    eye = np.eye(d, dtype=complex)
    for r in range(3):
        for c in range(3):
            m = table[r][c]
            if m.shape != (d, d) or not is_involution(np.asarray(m, dtype=complex), eps):
                out.append(f"entry ({r + 1},{c + 1}) is not a self-adjoint involution")
    for ctx, sign in zip(MAGIC_CONTEXTS, MAGIC_SIGNS):
        mats = [table[r][c] for r, c in ctx]
        label = "".join(f"({r + 1},{c + 1})" for r, c in ctx)
        for i in range(3):
            for j in range(i + 1, 3):
                if not is_zero(commutator(mats[i], mats[j]), eps):
                    out.append(f"context {label} does not commute")
        if not mat_equal(mats[0] @ mats[1] @ mats[2], sign * eye, eps):
            out.append(f"context {label} does not multiply to {'+' if sign > 0 else '-'}I")
    return out


def magic_satisfies(table: Sequence[Sequence[Mat]], d: int = 4, eps: float = DEFAULT_EPS) -> bool:
    """Commuting contexts; rows and first two columns give I, last column -I."""
    return not magic_violations(table, d, eps)


class MagicDecodeError(ValueError):
    pass


@dataclass
class DecodedMagic:
    """Recovered qubit frames and the unitary that disentangles them.

    ``frames[j]`` is (X, Y, Z) for qubit j acting on the input space;
    ``unitary`` U satisfies U^dag X_1 U = sx (x) I and so on.
    """

    frames: list[tuple[Mat, Mat, Mat]]
    unitary: Mat


def _hermitian_eigh(m: Mat) -> tuple[np.ndarray, Mat]:
    return np.linalg.eigh((m + m.conj().T) / 2)


def decode_magic(table: Sequence[Sequence[Mat]], d: int = 4, eps: float = DEFAULT_EPS) -> DecodedMagic:
    """Extract two anti-commuting qubit pairs from a magic-square solution."""
    if d != 4:
        raise MagicDecodeError("only d = 4 is supported")
    tol = max(eps, 1e-12) * 10
    A = [[np.asarray(m, dtype=complex) for m in row] for row in table]
    X1, Z1, X2, Z2 = A[0][0], A[1][1], A[0][1], A[1][0]
    eye = np.eye(d, dtype=complex)
    for name, m in (("X1", X1), ("Z1", Z1), ("X2", X2), ("Z2", Z2)):
        if not is_involution(m, tol):
            raise MagicDecodeError(f"{name} is not a self-adjoint involution")
    if not mat_equal(np.linalg.matrix_power(X1 @ Z1, 2), -eye, tol):
        raise MagicDecodeError("X1 and Z1 do not anti-commute: (A11 A22)^2 != -I")
    if not mat_equal(np.linalg.matrix_power(X2 @ Z2, 2), -eye, tol):
        raise MagicDecodeError("X2 and Z2 do not anti-commute: (A12 A21)^2 != -I")
    for a, b, label in ((X1, X2, "X1,X2"), (X1, Z2, "X1,Z2"), (Z1, X2, "Z1,X2"), (Z1, Z2, "Z1,Z2")):
        if not is_zero(commutator(a, b), tol):
            raise MagicDecodeError(f"{label} do not commute")
    # joint +1 eigenvector of Z1 and Z2: diagonalise Z1, then Z2 on its +1 space
    w1, v1 = _hermitian_eigh(Z1)
    plus = v1[:, w1 > 0]
    if plus.shape[1] != 2:
        raise MagicDecodeError("Z1 does not have a 2-dimensional +1 eigenspace")
    w2, v2 = _hermitian_eigh(plus.conj().T @ Z2 @ plus)
    if not (w2.min() < 0 < w2.max()):
        raise MagicDecodeError("Z2 is degenerate on the +1 eigenspace of Z1")
    e00 = plus @ v2[:, np.argmax(w2)]
    e01 = X2 @ e00
    e10 = X1 @ e00
    e11 = X1 @ X2 @ e00
    U = np.column_stack([e00, e01, e10, e11])
    if not mat_equal(U.conj().T @ U, eye, tol):
        raise MagicDecodeError("recovered basis is not orthonormal")
    frames = [(X1, 1j * X1 @ Z1, Z1), (X2, 1j * X2 @ Z2, Z2)]
    return DecodedMagic(frames, U)


def magic_assignment(table: Sequence[Sequence[Mat]] | None = None, as_projectors: bool = False) -> dict[str, Mat]:
    """Map the magic-square variables a..i to the table entries (or their
    projectors b^-1(A))."""
    table = standard_magic() if table is None else table
    out = {}
    for k, name in enumerate("abcdefghi"):
        m = table[k // 3][k % 3]
        out[name] = from_involution(m) if as_projectors else m
    return out


# ---------------------------------------------------------------- padding


def lift_padding_witness(alpha: Mapping[str, Mat], f, d: int, ops: ProjectorOps | None = None) -> dict[str, Mat]:
    """Lift a strong satisfier of ``f`` in dimension d to one of the padding
    formula in dimension d + 1.

    The p-variables go to the top-left block and q_i to E_{e_i}. When ``f``
    is true classically at the all-zero assignment its value picks up the
    padding line, so q_{d+1} is sent to 0 and that line joins q_d instead.
    """
    from .formula import eval_classical, variables
    from .pba import Undefined, meaningful_eval

    ops = ops or ProjectorOps(d)
    val = meaningful_eval(f, alpha, ops)
    if isinstance(val, Undefined) or not ops.equal(val, ops.one()):
        raise ValueError("alpha does not strongly satisfy the formula")
    exact = ops.exact
    out: dict[str, Mat] = {p: embed(alpha[p], d + 1) for p in variables(f)}
    basis = [tuple(1 if i == k else 0 for i in range(d + 1)) for k in range(d + 1)]
    qs = [line_projector(b, exact=True) for b in basis]
    if not exact:
        qs = [to_float(q).astype(ops._dtype) for q in qs]
    if eval_classical(f, {p: 0 for p in variables(f)}):
        qs[d - 1] = qs[d - 1] + qs[d]
        qs[d] = qs[d] - qs[d]
    for k, q in enumerate(qs, 1):
        out[f"q{k}"] = q
    return out
