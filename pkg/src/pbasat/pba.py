"""Finite partial Boolean algebras and meaningful evaluation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Iterable, Mapping, Protocol, Sequence

from .formula import AND, NOT, TOP, VAR, Formula, subformulas


class PBAInterface(Protocol):
    """Operations every algebra backend supplies.

    ``join``/``meet`` may assume their arguments are commeasurable; callers
    check ``comm`` first.
    """

    def zero(self) -> Any: ...
    def one(self) -> Any: ...
    def comm(self, a: Any, b: Any) -> bool: ...
    def neg(self, a: Any) -> Any: ...
    def join(self, a: Any, b: Any) -> Any: ...
    def meet(self, a: Any, b: Any) -> Any: ...
    def equal(self, a: Any, b: Any) -> bool: ...


@dataclass(frozen=True)
class Undefined:
    """Result of evaluating outside the meaningful domain."""

    at: Formula

    def __bool__(self) -> bool:
        return False


def meaningful_eval(f: Formula, alpha: Mapping[str, Any], A: PBAInterface) -> Any:
    """Value of ``f`` under ``alpha`` in ``A``, or Undefined at the first
    binary subformula (post-order) whose arguments are not commeasurable."""
    val: dict[Formula, Any] = {}
    for g in subformulas(f):
        k = g.kind
        if k == TOP:
            val[g] = A.one()
        elif k == VAR:
            if g.name not in alpha:
                raise KeyError(f"no value for variable {g.name!r}")
            val[g] = alpha[g.name]
        elif k == NOT:
            val[g] = A.neg(val[g.child])
        else:
            x, y = val[g.left], val[g.right]
            if not A.comm(x, y):
                return Undefined(g)
            val[g] = A.meet(x, y) if k == AND else A.join(x, y)
    return val[f]


def subformula_values(f: Formula, alpha: Mapping[str, Any], A: PBAInterface) -> dict[Formula, Any]:
    """Values of every subformula; raises ValueError if any step is undefined."""
    val: dict[Formula, Any] = {}
    for g in subformulas(f):
        k = g.kind
        if k == TOP:
            val[g] = A.one()
        elif k == VAR:
            val[g] = alpha[g.name]
        elif k == NOT:
            val[g] = A.neg(val[g.child])
        else:
            x, y = val[g.left], val[g.right]
            if not A.comm(x, y):
                raise ValueError(f"substitution is not meaningful at {g}")
            val[g] = A.meet(x, y) if k == AND else A.join(x, y)
    return val


def leq(A: PBAInterface, a: Any, b: Any) -> bool:
    """a <= b: commeasurable and a & b = a."""
    return A.comm(a, b) and A.equal(A.meet(a, b), a)


# ---------------------------------------------------------------- finite pBAs


class PBAError(ValueError):
    pass


@dataclass(frozen=True)
class Violation:
    kind: str
    detail: str

    def __str__(self) -> str:
        return f"{self.kind}: {self.detail}"


class PBAValidationError(PBAError):
    def __init__(self, violations: list[Violation]):
        super().__init__("; ".join(str(v) for v in violations[:5]))
        self.violations = violations


@dataclass(frozen=True)
class RawPBA:
    """Unvalidated tables keyed by element names."""

    elements: tuple[str, ...]
    zero: str
    one: str
    comm: frozenset[tuple[str, str]]
    neg: Mapping[str, str]
    join: Mapping[tuple[str, str], str]
    meet: Mapping[tuple[str, str], str]


class FinitePBA:
    """Validated finite pBA; elements are the ints 0..n-1, named by ``names``."""

    def __init__(self, names, zero, one, comm, neg, join, meet):
        self.names: tuple[str, ...] = tuple(names)
        self._zero: int = zero
        self._one: int = one
        self.comm_matrix: tuple[tuple[bool, ...], ...] = comm
        self.neg_table: tuple[int, ...] = neg
        self.join_table: tuple[tuple[int, ...], ...] = join
        self.meet_table: tuple[tuple[int, ...], ...] = meet
        self._index = {n: i for i, n in enumerate(self.names)}
        # concrete values when the algebra was closed from a backend
        self.values: tuple | None = None

    def __len__(self) -> int:
        return len(self.names)

    def __repr__(self) -> str:
        return f"FinitePBA({len(self)} elements)"

    @property
    def elements(self) -> range:
        return range(len(self.names))

    def elem(self, name: str) -> int:
        return self._index[name]

    def name(self, a: int) -> str:
        return self.names[a]

    def zero(self) -> int:
        return self._zero

    def one(self) -> int:
        return self._one

    def comm(self, a: int, b: int) -> bool:
        return self.comm_matrix[a][b]

    def neg(self, a: int) -> int:
        return self.neg_table[a]

    def join(self, a: int, b: int) -> int:
        r = self.join_table[a][b]
        if r < 0:
            raise PBAError(f"join undefined on {self.names[a]}, {self.names[b]}")
        return r

    def meet(self, a: int, b: int) -> int:
        r = self.meet_table[a][b]
        if r < 0:
            raise PBAError(f"meet undefined on {self.names[a]}, {self.names[b]}")
        return r

    def equal(self, a: int, b: int) -> bool:
        return a == b

    def is_trivial(self) -> bool:
        return self._zero == self._one

    def raw(self) -> RawPBA:
        n = len(self)
        nm = self.names
        comm = frozenset((nm[a], nm[b]) for a in range(n) for b in range(n) if self.comm_matrix[a][b])
        join = {(nm[a], nm[b]): nm[self.join_table[a][b]] for a in range(n) for b in range(n) if self.comm_matrix[a][b]}
        meet = {(nm[a], nm[b]): nm[self.meet_table[a][b]] for a in range(n) for b in range(n) if self.comm_matrix[a][b]}
        return RawPBA(nm, nm[self._zero], nm[self._one], comm, {nm[a]: nm[self.neg_table[a]] for a in range(n)}, join, meet)

    def maximal_cliques(self) -> list[list[int]]:
        from .graphs import Graph, maximal_cliques

        g = Graph(self.elements, [(a, b) for a in self.elements for b in self.elements if a < b and self.comm(a, b)])
        return maximal_cliques(g)


def _clique_axioms(A_names, idx, clique, neg, join, meet, zero, one) -> list[Violation]:
    """Check closure and the Boolean-algebra axioms on one clique."""
    out: list[Violation] = []
    members = set(clique)
    nm = lambda *xs: ", ".join(A_names[x] for x in xs)  # noqa: E731
    where = "{" + ", ".join(A_names[x] for x in clique) + "}"

    def bad(axiom: str, *witness: int) -> None:
        out.append(Violation("ExtViolated", f"clique {where}, axiom {axiom}, witness ({nm(*witness)})"))

    for a in clique:
        if neg[a] not in members:
            bad("closure under negation", a)
            return out
        for b in clique:
            if join[a][b] not in members or meet[a][b] not in members:
                bad("closure under join and meet", a, b)
                return out
    for a in clique:
        if neg[neg[a]] != a:
            bad("involution", a)
        if join[a][zero] != a or meet[a][one] != a:
            bad("units", a)
        if join[a][neg[a]] != one or meet[a][neg[a]] != zero:
            bad("complements", a)
        for b in clique:
            if join[a][b] != join[b][a] or meet[a][b] != meet[b][a]:
                bad("commutativity", a, b)
            if join[a][meet[a][b]] != a or meet[a][join[a][b]] != a:
                bad("absorption", a, b)
            for c in clique:
                if join[join[a][b]][c] != join[a][join[b][c]] or meet[meet[a][b]][c] != meet[a][meet[b][c]]:
                    bad("associativity", a, b, c)
                if meet[a][join[b][c]] != join[meet[a][b]][meet[a][c]]:
                    bad("distributivity", a, b, c)
                if join[a][meet[b][c]] != meet[join[a][b]][join[a][c]]:
                    bad("distributivity", a, b, c)
        if out:
            return out
    return out


def validate_pba(raw: RawPBA) -> FinitePBA:
    """Validate tables and return the algebra; raises PBAValidationError."""
    from .graphs import Graph, maximal_cliques

    names = list(raw.elements)
    if len(set(names)) != len(names):
        raise PBAValidationError([Violation("Malformed", "duplicate element names")])
    idx = {n: i for i, n in enumerate(names)}
    n = len(names)
    errs: list[Violation] = []
    for label in (raw.zero, raw.one):
        if label not in idx:
            raise PBAValidationError([Violation("Malformed", f"unknown element {label!r}")])
    zero, one = idx[raw.zero], idx[raw.one]

    comm = [[False] * n for _ in range(n)]
    for a, b in raw.comm:
        if a not in idx or b not in idx:
            errs.append(Violation("Malformed", f"comm mentions unknown element in ({a}, {b})"))
            continue
        comm[idx[a]][idx[b]] = True
    for a in range(n):
        if not comm[a][a]:
            errs.append(Violation("NotReflexive", names[a]))
        for b in range(n):
            if comm[a][b] and not comm[b][a]:
                errs.append(Violation("NotSymmetric", f"{names[a]}, {names[b]}"))
    for a in range(n):
        if not (comm[a][zero] and comm[a][one]):
            errs.append(Violation("ExtViolated", f"{names[a]} is not commeasurable with both units"))

    neg = [-1] * n
    for a, b in raw.neg.items():
        if a not in idx or b not in idx:
            errs.append(Violation("Malformed", f"neg mentions unknown element in ({a}, {b})"))
            continue
        neg[idx[a]] = idx[b]
    for a in range(n):
        if neg[a] < 0:
            errs.append(Violation("Malformed", f"neg undefined on {names[a]}"))

    tables = []
    for label, table in (("join", raw.join), ("meet", raw.meet)):
        t = [[-1] * n for _ in range(n)]
        for (a, b), c in table.items():
            if a not in idx or b not in idx or c not in idx:
                errs.append(Violation("Malformed", f"{label} mentions unknown element in ({a}, {b}, {c})"))
                continue
            i, j = idx[a], idx[b]
            if not comm[i][j]:
                errs.append(Violation("OperationOutsideDomain", f"{label} defined on non-commeasurable pair ({a}, {b})"))
                continue
            t[i][j] = idx[c]
        for i in range(n):
            for j in range(n):
                if comm[i][j] and t[i][j] < 0:
                    errs.append(Violation("OperationOutsideDomain", f"{label} missing on commeasurable pair ({names[i]}, {names[j]})"))
        tables.append(t)
    if errs:
        raise PBAValidationError(errs)
    join, meet = tables

    g = Graph(range(n), [(a, b) for a in range(n) for b in range(a + 1, n) if comm[a][b]])
    for clique in maximal_cliques(g):
        errs.extend(_clique_axioms(names, idx, clique, neg, join, meet, zero, one))
    if errs:
        raise PBAValidationError(errs)
    return FinitePBA(
        names,
        zero,
        one,
        tuple(tuple(r) for r in comm),
        tuple(neg),
        tuple(tuple(r) for r in join),
        tuple(tuple(r) for r in meet),
    )


def is_homomorphism(f: Mapping[int, int] | Sequence[int], A: FinitePBA, B: FinitePBA) -> bool:
    """Does ``f`` preserve units, commeasurability, negation, join and meet?"""
    h = [f[a] for a in A.elements]
    if h[A.zero()] != B.zero() or h[A.one()] != B.one():
        return False
    for a in A.elements:
        if h[A.neg(a)] != B.neg(h[a]):
            return False
        for b in A.elements:
            if not A.comm(a, b):
                continue
            if not B.comm(h[a], h[b]):
                return False
            if h[A.join(a, b)] != B.join(h[a], h[b]) or h[A.meet(a, b)] != B.meet(h[a], h[b]):
                return False
    return True


# ---------------------------------------------------------------- builders


def boolean_algebra(atoms: Sequence[str], names: Sequence[str] | None = None) -> RawPBA:
    """Raw tables of the power set of ``atoms``.

    ``names[mask]`` overrides the default element names, which list the
    atoms in braces.
    """
    k = len(atoms)
    full = (1 << k) - 1
    if names is None:
        names = ["{" + ",".join(atoms[i] for i in range(k) if m >> i & 1) + "}" for m in range(1 << k)]
    els = tuple(names)
    comm = frozenset((els[a], els[b]) for a in range(1 << k) for b in range(1 << k))
    neg = {els[m]: els[full ^ m] for m in range(1 << k)}
    join = {(els[a], els[b]): els[a | b] for a in range(1 << k) for b in range(1 << k)}
    meet = {(els[a], els[b]): els[a & b] for a in range(1 << k) for b in range(1 << k)}
    return RawPBA(els, els[0], els[full], comm, neg, join, meet)


def glue(blocks: Sequence[RawPBA]) -> RawPBA:
    """Paste total Boolean algebras along shared element names.

    Commeasurability holds exactly inside each block.
    """
    if not blocks:
        raise PBAError("glue needs at least one block")
    zero, one = blocks[0].zero, blocks[0].one
    elements: list[str] = []
    comm: set[tuple[str, str]] = set()
    neg: dict[str, str] = {}
    join: dict[tuple[str, str], str] = {}
    meet: dict[tuple[str, str], str] = {}
    for blk in blocks:
        if (blk.zero, blk.one) != (zero, one):
            raise PBAError("blocks disagree on the units")
        for e in blk.elements:
            if e not in elements:
                elements.append(e)
        comm |= blk.comm
        for table, target in ((blk.neg, neg),):
            for k, v in table.items():
                if target.setdefault(k, v) != v:
                    raise PBAError(f"blocks disagree on neg {k}")
        for table, target, label in ((blk.join, join, "join"), (blk.meet, meet, "meet")):
            for k, v in table.items():
                if target.setdefault(k, v) != v:
                    raise PBAError(f"blocks disagree on {label} {k}")
    return RawPBA(tuple(elements), zero, one, frozenset(comm), neg, join, meet)


def standard_algebra(kind: str, n: int | None = None, blocks: Sequence[FinitePBA | RawPBA] | None = None, atom: str = "a") -> FinitePBA:
    """Named fixture algebras: ``two``, ``four``, ``powerset`` (n atoms) and ``glued``."""
    if kind == "two":
        return validate_pba(boolean_algebra(["x"], ["0", "1"]))
    if kind == "four":
        return validate_pba(boolean_algebra([atom, "~" + atom], ["0", atom, "~" + atom, "1"]))
    if kind == "powerset":
        if n is None or not 0 <= n <= 4:
            raise PBAError("powerset needs 0 <= n <= 4")
        return validate_pba(boolean_algebra([str(i) for i in range(n)]))
    if kind == "glued":
        if not blocks:
            raise PBAError("glued needs blocks")
        raws = [b.raw() if isinstance(b, FinitePBA) else b for b in blocks]
        return validate_pba(glue(raws))
    raise PBAError(f"unknown algebra kind {kind!r}")


def glued_six() -> FinitePBA:
    """Two four-element blocks sharing only 0 and 1."""
    return standard_algebra("glued", blocks=[standard_algebra("four", atom="a"), standard_algebra("four", atom="b")])


def close_family(ops: PBAInterface, generators: Iterable[Any], limit: int = 256) -> FinitePBA:
    """Finite pBA of elements reachable from ``generators`` by the partial operations.

    Elements are matched with ``ops.equal``. Raises PBAError beyond ``limit``.
    """
    elems: list[Any] = []

    def find(x: Any) -> int:
        for i, y in enumerate(elems):
            if ops.equal(x, y):
                return i
        elems.append(x)
        if len(elems) > limit:
            raise PBAError("family does not close within the element limit")
        return len(elems) - 1

    find(ops.zero())
    find(ops.one())
    for g in generators:
        find(g)
    changed = True
    while changed:
        changed = False
        n = len(elems)
        for i in range(n):
            find(ops.neg(elems[i]))
            for j in range(i, n):
                if ops.comm(elems[i], elems[j]):
                    find(ops.join(elems[i], elems[j]))
                    find(ops.meet(elems[i], elems[j]))
        changed = len(elems) != n
    n = len(elems)
    names = [f"e{i}" for i in range(n)]
    names[0], names[1] = "0", "1"
    comm = frozenset((names[i], names[j]) for i in range(n) for j in range(n) if ops.comm(elems[i], elems[j]))
    neg = {names[i]: names[find(ops.neg(elems[i]))] for i in range(n)}
    join, meet = {}, {}
    for i in range(n):
        for j in range(n):
            if ops.comm(elems[i], elems[j]):
                join[names[i], names[j]] = names[find(ops.join(elems[i], elems[j]))]
                meet[names[i], names[j]] = names[find(ops.meet(elems[i], elems[j]))]
    A = validate_pba(RawPBA(tuple(names), "0", "1", comm, neg, join, meet))
    A.values = tuple(elems)
    return A


# ---------------------------------------------------------------- file format


def parse_pba(text: str) -> RawPBA:
    """Read the line format (elem/zero/one/comm/neg/join/meet, # comments)."""
    elements: list[str] = []
    zero = one = None
    comm: set[tuple[str, str]] = set()
    neg: dict[str, str] = {}
    join: dict[tuple[str, str], str] = {}
    meet: dict[tuple[str, str], str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].split()
        if not line:
            continue
        key, args = line[0], line[1:]
        arity = {"elem": None, "zero": 1, "one": 1, "comm": 2, "neg": 2, "join": 3, "meet": 3}
        if key not in arity:
            raise PBAError(f"line {lineno}: unknown record {key!r}")
        if arity[key] is not None and len(args) != arity[key]:
            raise PBAError(f"line {lineno}: {key} takes {arity[key]} arguments")
        if key == "elem":
            elements.extend(a for a in args if a not in elements)
        elif key == "zero":
            zero = args[0]
        elif key == "one":
            one = args[0]
        elif key == "comm":
            comm.add((args[0], args[1]))
        elif key == "neg":
            neg[args[0]] = args[1]
        elif key == "join":
            join[args[0], args[1]] = args[2]
        else:
            meet[args[0], args[1]] = args[2]
    if zero is None or one is None:
        raise PBAError("missing zero or one record")
    for e in (zero, one):
        if e not in elements:
            elements.append(e)
    # inferred pairs: reflexive, symmetric, and everything with the units
    full = set(comm)
    for a, b in comm:
        full.add((b, a))
    for a in elements:
        for u in (a, zero, one):
            full.add((a, u))
            full.add((u, a))
    # operations on inferred pairs may be omitted when they follow from units
    for a in elements:
        for tbl, unit_rules in ((join, ((zero, a), (one, one))), (meet, ((zero, zero), (one, a)))):
            for u, r in unit_rules:
                tbl.setdefault((a, u), r)
                tbl.setdefault((u, a), r)
        join.setdefault((a, a), a)
        meet.setdefault((a, a), a)
        if a in neg:
            join.setdefault((a, neg[a]), one)
            join.setdefault((neg[a], a), one)
            meet.setdefault((a, neg[a]), zero)
            meet.setdefault((neg[a], a), zero)
    for tbl in (join, meet):
        for (a, b), c in list(tbl.items()):
            tbl.setdefault((b, a), c)
    return RawPBA(tuple(elements), zero, one, frozenset(full), neg, join, meet)


def format_pba(A: FinitePBA, header: str | None = None) -> str:
    lines = [f"# {header}"] if header else []
    nm = A.names
    lines.append("elem " + " ".join(nm))
    lines.append(f"zero {nm[A.zero()]}")
    lines.append(f"one {nm[A.one()]}")
    for a in A.elements:
        lines.append(f"neg {nm[a]} {nm[A.neg(a)]}")
    for a in A.elements:
        for b in A.elements:
            if b < a or not A.comm(a, b):
                continue
            if a != b:
                lines.append(f"comm {nm[a]} {nm[b]}")
            lines.append(f"join {nm[a]} {nm[b]} {nm[A.join(a, b)]}")
            lines.append(f"meet {nm[a]} {nm[b]} {nm[A.meet(a, b)]}")
    return "\n".join(lines) + "\n"
