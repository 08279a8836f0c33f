"""Relational structures and quantum homomorphisms between them."""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .formula import Formula, Not, Var, cnf_clauses, conj, disj, variables
from .numerics import DEFAULT_EPS, Mat, commutator, is_projector, is_zero, mat_equal


@dataclass
class Structure:
    """Finite relational structure over a signature of named relations."""

    signature: dict[str, int]
    universe: list[str]
    relations: dict[str, list[tuple[str, ...]]] = field(default_factory=dict)

    def __post_init__(self):
        if not self.universe:
            raise ValueError("the universe must be nonempty")
        if len(set(self.universe)) != len(self.universe):
            raise ValueError("duplicate universe elements")
        elems = set(self.universe)
        for name in self.signature:
            self.relations.setdefault(name, [])
        for name, tuples in self.relations.items():
            if name not in self.signature:
                raise ValueError(f"relation {name} is not in the signature")
            r = self.signature[name]
            if r < 1:
                raise ValueError(f"relation {name} must have positive arity")
            for t in tuples:
                if len(t) != r:
                    raise ValueError(f"tuple {t} of {name} has arity {len(t)}, expected {r}")
                if not set(t) <= elems:
                    raise ValueError(f"tuple {t} of {name} leaves the universe")
            self.relations[name] = list(dict.fromkeys(tuple(t) for t in tuples))

    def holds(self, name: str, t: Sequence[str]) -> bool:
        return tuple(t) in set(self.relations[name])


def parse_structure(text: str) -> Structure:
    """Lines ``rel <name> <arity>``, ``elem <label>``, ``tuple <name> <label>...``."""
    sig: dict[str, int] = {}
    universe: list[str] = []
    rels: dict[str, list[tuple[str, ...]]] = {}
    for lineno, row in enumerate(text.splitlines(), 1):
        row = row.split("#", 1)[0].split()
        if not row:
            continue
        if row[0] == "rel" and len(row) == 3:
            sig[row[1]] = int(row[2])
        elif row[0] == "elem" and len(row) == 2:
            universe.append(row[1])
        elif row[0] == "tuple" and len(row) >= 3:
            rels.setdefault(row[1], []).append(tuple(row[2:]))
        else:
            raise ValueError(f"line {lineno}: unrecognised record")
    return Structure(sig, universe, rels)


def format_structure(s: Structure, header: str | None = None) -> str:
    out = [f"# {header}"] if header else []
    out += [f"rel {n} {r}" for n, r in s.signature.items()]
    out += [f"elem {e}" for e in s.universe]
    for n in s.signature:
        out += ["tuple " + n + " " + " ".join(t) for t in s.relations[n]]
    return "\n".join(out) + "\n"


def is_homomorphism(h: Mapping[str, str], M: Structure, N: Structure) -> bool:
    for name, tuples in M.relations.items():
        allowed = set(N.relations[name])
        if any(tuple(h[m] for m in t) not in allowed for t in tuples):
            return False
    return True


def classical_homomorphisms(M: Structure, N: Structure):
    """Every homomorphism by brute force."""
    for image in itertools.product(N.universe, repeat=len(M.universe)):
        h = dict(zip(M.universe, image))
        if is_homomorphism(h, M, N):
            yield h


# ---------------------------------------------------------------- quantum homomorphisms

Family = Mapping[tuple[str, str], Mat]


@dataclass(frozen=True)
class QHomReport:
    """Outcome of a check; falsy with the first violated condition."""

    ok: bool
    condition: str = ""
    detail: str = ""

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        return "ok" if self.ok else f"{self.condition}: {self.detail}"


def _entry(F: Family, m: str, n: str, d: int, dtype) -> Mat:
    return F.get((m, n), np.zeros((d, d), dtype=dtype))


def _co_occurring(M: Structure) -> list[tuple[str, str]]:
    pairs: dict[tuple[str, str], None] = {}
    for tuples in M.relations.values():
        for t in tuples:
            for a, b in itertools.product(t, repeat=2):
                pairs[(a, b)] = None
    return list(pairs)


def non_tuples(N: Structure, name: str) -> list[tuple[str, ...]]:
    allowed = set(N.relations[name])
    return [t for t in itertools.product(N.universe, repeat=N.signature[name]) if t not in allowed]


def verify_qhom(M: Structure, N: Structure, F: Family, d: int, eps: float = DEFAULT_EPS) -> QHomReport:
    """Check QH1 (rows sum to I), QH2 (commeasurable whenever the elements of
    M share a tuple, including m = m') and QH3 (products vanish on
    tuple/non-tuple pairs). Missing entries count as 0."""
    if M.signature != N.signature:
        return QHomReport(False, "signature", "M and N have different signatures")
    dtype = complex if any(np.iscomplexobj(v) for v in F.values()) else float
    for (m, n), P in F.items():
        if P.shape != (d, d) or not is_projector(P, eps):
            return QHomReport(False, "projector", f"F[{m},{n}] is not a projector on dimension {d}")
    eye = np.eye(d)
    for m in M.universe:
        total = sum((_entry(F, m, n, d, dtype) for n in N.universe), np.zeros((d, d), dtype=dtype))
        if not mat_equal(np.asarray(total, dtype=complex), eye.astype(complex), eps):
            return QHomReport(False, "QH1", f"row {m} does not sum to I")
    for m, m2 in _co_occurring(M):
        for n, n2 in itertools.product(N.universe, repeat=2):
            if not is_zero(commutator(_entry(F, m, n, d, dtype), _entry(F, m2, n2, d, dtype)), eps):
                return QHomReport(False, "QH2", f"F[{m},{n}] and F[{m2},{n2}] do not commute")
    for name, tuples in M.relations.items():
        bad = non_tuples(N, name)
        for t in tuples:
            for u in bad:
                prod = np.eye(d, dtype=dtype)
                for m, n in zip(t, u):
                    prod = prod @ _entry(F, m, n, d, dtype)
                if not is_zero(prod, eps):
                    return QHomReport(False, "QH3", f"{name}{t} against non-tuple {u} has nonzero product")
    return QHomReport(True)


def indicator_lift(h: Mapping[str, str], M: Structure, N: Structure, d: int = 1) -> dict[tuple[str, str], Mat]:
    """F[m,n] = I when h(m) = n, else 0."""
    return {(m, n): (np.eye(d) if h[m] == n else np.zeros((d, d))) for m in M.universe for n in N.universe}


_SAFE = re.compile(r"[A-Za-z0-9_]+\Z")


def hom_variable_names(M: Structure, N: Structure) -> dict[tuple[str, str], str]:
    """``p_<m>_<n>`` when labels are identifier-safe, else indices."""
    safe = all(_SAFE.match(x) for x in list(M.universe) + list(N.universe))
    out = {}
    for i, m in enumerate(M.universe):
        for j, n in enumerate(N.universe):
            out[(m, n)] = f"p_{m}_{n}" if safe else f"p_{i}_{j}"
    if len(set(out.values())) != len(out):
        out = {(m, n): f"p_{i}_{j}" for i, m in enumerate(M.universe) for j, n in enumerate(N.universe)}
    return out


def hom_formula(M: Structure, N: Structure) -> Formula:
    """Function clauses (one value per element) and relation clauses
    (no tuple of M maps onto a non-tuple of N)."""
    names = hom_variable_names(M, N)
    p = {k: Var(v) for k, v in names.items()}
    rows = []
    for m in M.universe:
        options = []
        for n in N.universe:
            others = [Not(p[m, n2]) for n2 in N.universe if n2 != n]
            options.append(conj([p[m, n], *others]) if others else p[m, n])
        rows.append(disj(options))
    rel = []
    for name, tuples in M.relations.items():
        bad = non_tuples(N, name)
        for t in tuples:
            for u in bad:
                rel.append(Not(conj(p[m, n] for m, n in zip(t, u))))
    return conj(rows + rel)


def family_to_assignment(F: Family, M: Structure, N: Structure, d: int) -> dict[str, Mat]:
    names = hom_variable_names(M, N)
    dtype = complex if any(np.iscomplexobj(v) for v in F.values()) else float
    return {names[m, n]: _entry(F, m, n, d, dtype) for m in M.universe for n in N.universe}


def assignment_to_family(alpha: Mapping[str, Mat], M: Structure, N: Structure) -> dict[tuple[str, str], Mat]:
    names = hom_variable_names(M, N)
    return {k: alpha[v] for k, v in names.items()}


# ---------------------------------------------------------------- CNF to structures


def cnf_to_structures(cnf: Formula) -> tuple[Structure, Structure]:
    """V has the variables as universe and R_c<k> = {scope of clause k};
    T over {0,1} excludes exactly the tuple falsifying clause k."""
    clauses = cnf_clauses(cnf)
    sig: dict[str, int] = {}
    vrels: dict[str, list[tuple[str, ...]]] = {}
    trels: dict[str, list[tuple[str, ...]]] = {}
    for k, clause in enumerate(clauses, 1):
        if any(name is None for name, _ in clause):
            raise ValueError(f"clause {k} mentions the constant T")
        if not 1 <= len(clause) <= 3:
            raise ValueError(f"clause {k} has {len(clause)} literals; expected 1 to 3")
        name = f"R_c{k}"
        r = len(clause)
        sig[name] = r
        vrels[name] = [tuple(n for n, _ in clause)]
        falsifier = tuple("0" if pol else "1" for _, pol in clause)
        trels[name] = [t for t in itertools.product("01", repeat=r) if t != falsifier]
    names = variables(cnf)
    if not names:
        raise ValueError("the formula has no variables")
    return Structure(sig, names, vrels), Structure(dict(sig), ["0", "1"], trels)


def assignment_to_hom(a: Mapping[str, int]) -> dict[str, str]:
    return {k: str(v) for k, v in a.items()}


def pvm_family_from_projectors(alpha: Mapping[str, Mat], V: Structure) -> dict[tuple[str, str], Mat]:
    """F[p,1] = alpha(p), F[p,0] = I - alpha(p)."""
    out = {}
    for p in V.universe:
        P = alpha[p]
        out[(p, "1")] = P
        out[(p, "0")] = np.eye(P.shape[0], dtype=P.dtype) - P
    return out


# ---------------------------------------------------------------- Q_d membership


def qd_related(
    hs: Sequence[Mapping[str, Mat]],
    tuples: Sequence[Sequence[str]],
    universe: Sequence[str],
    d: int,
    eps: float = DEFAULT_EPS,
) -> QHomReport:
    """Is the tuple of labelled PVMs ``hs`` related in Q_d of a relation?

    QR1: all values of all the PVMs commute. QR2: for every label tuple
    outside ``tuples`` the product of the corresponding values is 0.
    """
    for k, h in enumerate(hs):
        total = np.zeros((d, d), dtype=complex)
        for m, P in h.items():
            if not is_projector(P, eps):
                return QHomReport(False, "PVM", f"h{k + 1}({m}) is not a projector")
            total = total + P
        if not mat_equal(total, np.eye(d, dtype=complex), eps):
            return QHomReport(False, "PVM", f"h{k + 1} does not sum to I")
    for (i, hi), (j, hj) in itertools.combinations_with_replacement(enumerate(hs), 2):
        for (m, P), (m2, Q) in itertools.product(hi.items(), hj.items()):
            if not is_zero(commutator(P, Q), eps):
                return QHomReport(False, "QR1", f"h{i + 1}({m}) and h{j + 1}({m2}) do not commute")
    allowed = {tuple(t) for t in tuples}
    for t in itertools.product(universe, repeat=len(hs)):
        if t in allowed:
            continue
        prod = np.eye(d, dtype=complex)
        for h, m in zip(hs, t):
            prod = prod @ h.get(m, np.zeros((d, d)))
        if not is_zero(prod, eps):
            return QHomReport(False, "QR2", f"non-tuple {t} has nonzero product")
    return QHomReport(True)


def family_row(F: Family, m: str, N: Structure, d: int) -> dict[str, Mat]:
    """The labelled PVM n -> F[m,n] (zero entries dropped)."""
    out = {}
    for n in N.universe:
        P = F.get((m, n))
        if P is not None and not is_zero(np.asarray(P, dtype=complex)):
            out[n] = P
    return out


# ---------------------------------------------------------------- magic square instance


def magic_structures() -> tuple[Structure, Structure]:
    """Cells a..i with one ternary relation per row and column; the target
    allows even parity in every context but the last column, which is odd."""
    from .numerics import MAGIC_CONTEXTS, MAGIC_SIGNS

    cells = "abcdefghi"
    sig, mrels, nrels = {}, {}, {}
    for k, (ctx, sign) in enumerate(zip(MAGIC_CONTEXTS, MAGIC_SIGNS), 1):
        name = f"R_m{k}"
        sig[name] = 3
        mrels[name] = [tuple(cells[3 * r + c] for r, c in ctx)]
        parity = 0 if sign > 0 else 1
        nrels[name] = [t for t in itertools.product("01", repeat=3) if sum(map(int, t)) % 2 == parity]
    return Structure(sig, list(cells), mrels), Structure(dict(sig), ["0", "1"], nrels)


def magic_family(table: Sequence[Sequence[Mat]] | None = None) -> dict[tuple[str, str], Mat]:
    """Spectral projectors of each entry: F[x,0] = (I + A)/2, F[x,1] = (I - A)/2."""
    from .numerics import standard_magic

    table = standard_magic() if table is None else table
    out = {}
    for k, x in enumerate("abcdefghi"):
        A = np.asarray(table[k // 3][k % 3], dtype=complex)
        eye = np.eye(A.shape[0], dtype=complex)
        out[(x, "0")] = (eye + A) / 2
        out[(x, "1")] = (eye - A) / 2
    return out
