"""Graphs, cliques, colourings and the contextuality gadgets built on them."""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

from .formula import Formula, Not, Var, Xor, conj, disj
from .numerics import (
    DEFAULT_EPS,
    Mat,
    ProjLine,
    cross,
    is_projector,
    is_zero,
    line_projector,
    mat_equal,
    pauli,
)


class Graph:
    """Simple undirected graph with ordered vertices."""

    def __init__(self, vertices: Iterable[Hashable] = (), edges: Iterable[tuple[Hashable, Hashable]] = ()):
        self.vertices: list[Hashable] = []
        self.adj: dict[Hashable, set[Hashable]] = {}
        self._index: dict[Hashable, int] = {}
        for v in vertices:
            self.add_vertex(v)
        for u, v in edges:
            self.add_edge(u, v)

    def add_vertex(self, v: Hashable) -> None:
        if v not in self.adj:
            self._index[v] = len(self.vertices)
            self.vertices.append(v)
            self.adj[v] = set()

    def add_edge(self, u: Hashable, v: Hashable) -> None:
        if u == v:
            raise ValueError(f"self-loop at {u!r}")
        self.add_vertex(u)
        self.add_vertex(v)
        self.adj[u].add(v)
        self.adj[v].add(u)

    def index(self, v: Hashable) -> int:
        return self._index[v]

    def has_edge(self, u: Hashable, v: Hashable) -> bool:
        return v in self.adj.get(u, ())

    def edges(self) -> list[tuple[Hashable, Hashable]]:
        idx = self._index
        return [(u, v) for u in self.vertices for v in sorted(self.adj[u], key=idx.__getitem__) if idx[u] < idx[v]]

    def __len__(self) -> int:
        return len(self.vertices)

    def __repr__(self) -> str:
        return f"Graph({len(self.vertices)} vertices, {len(self.edges())} edges)"


# ---------------------------------------------------------------- cliques


def maximal_cliques(g: Graph) -> list[list[Hashable]]:
    """Bron-Kerbosch with pivoting, outer loop in degeneracy order.

    Cliques are listed with vertices in graph order, sorted lexicographically
    by vertex index.
    """
    idx = g.index
    adj = g.adj
    out: list[list[Hashable]] = []

    def expand(r: list, p: set, x: set) -> None:
        if not p and not x:
            out.append(sorted(r, key=idx))
            return
        pivot = max(p | x, key=lambda u: len(adj[u] & p))
        for v in list(p - adj[pivot]):
            expand(r + [v], p & adj[v], x & adj[v])
            p.discard(v)
            x.add(v)

    order = _degeneracy_order(g)
    pos = {v: k for k, v in enumerate(order)}
    for v in order:
        later = {u for u in adj[v] if pos[u] > pos[v]}
        earlier = {u for u in adj[v] if pos[u] < pos[v]}
        expand([v], later, earlier)
    out.sort(key=lambda c: [idx(v) for v in c])
    return out


def _degeneracy_order(g: Graph) -> list[Hashable]:
    deg = {v: len(g.adj[v]) for v in g.vertices}
    removed: set = set()
    order = []
    buckets: dict[int, list] = {}
    for v in g.vertices:
        buckets.setdefault(deg[v], []).append(v)
    for _ in range(len(g.vertices)):
        k = min(b for b, vs in buckets.items() if vs)
        v = buckets[k].pop()
        removed.add(v)
        order.append(v)
        for u in g.adj[v]:
            if u not in removed:
                buckets[deg[u]].remove(u)
                deg[u] -= 1
                buckets.setdefault(deg[u], []).append(u)
    return order


def omega(g: Graph) -> list[list[Hashable]]:
    """Maximum cliques."""
    cl = maximal_cliques(g)
    if not cl:
        return []
    size = max(len(c) for c in cl)
    return [c for c in cl if len(c) == size]


def clique_number(g: Graph) -> int:
    return max((len(c) for c in maximal_cliques(g)), default=0)


def is_facet(g: Graph) -> bool:
    """Every maximal clique is a maximum clique."""
    sizes = {len(c) for c in maximal_cliques(g)}
    return len(sizes) <= 1


def is_clique(g: Graph, vs: Sequence[Hashable]) -> bool:
    return all(g.has_edge(u, v) for u, v in itertools.combinations(vs, 2))


# ---------------------------------------------------------------- colourings


def find_nc_colouring(g: Graph, edge_rule: bool = True) -> dict[Hashable, int] | None:
    """0/1 colouring with at most one 1 per edge and exactly one per maximum
    clique, or None. With ``edge_rule`` off only the clique rule is imposed."""
    from .sat import solve_clauses

    num = {v: k + 1 for k, v in enumerate(g.vertices)}
    clauses: list[list[int]] = []
    cliques = omega(g)
    if edge_rule:
        clauses += [[-num[u], -num[v]] for u, v in g.edges()]
    for c in cliques:
        clauses.append([num[v] for v in c])
        if not edge_rule:
            clauses += [[-num[u], -num[v]] for u, v in itertools.combinations(c, 2)]
    model = solve_clauses(len(num), clauses)
    if model is None:
        return None
    return {v: int(model[num[v]]) for v in g.vertices}


def is_nc_colouring(g: Graph, f: Mapping[Hashable, int]) -> bool:
    if any(f[u] + f[v] > 1 for u, v in g.edges()):
        return False
    return all(sum(f[v] for v in c) == 1 for c in omega(g))


def orthogonal_assignment_violations(
    g: Graph, f: Mapping[Hashable, Mat], d: int, eps: float = DEFAULT_EPS, cliques: list | None = None
) -> list[str]:
    out = []
    for v in g.vertices:
        m = f[v]
        if m.shape != (d, d) or not is_projector(m, eps):
            out.append(f"f({v!r}) is not a projector on dimension {d}")
    if out:
        return out
    for u, v in g.edges():
        if not is_zero(f[u] @ f[v], eps):
            out.append(f"O1 fails on edge ({u!r}, {v!r})")
    for c in omega(g) if cliques is None else cliques:
        total = f[c[0]]
        for v in c[1:]:
            total = total + f[v]
        eye = np.eye(d) if total.dtype != object else _exact_identity(d)
        if not mat_equal(total, eye, eps):
            out.append(f"O2 fails on clique {c!r}")
    return out


def _exact_identity(d: int) -> Mat:
    from .numerics import identity

    return identity(d, exact=True)


def verify_orthogonal_assignment(g: Graph, f: Mapping[Hashable, Mat], d: int, eps: float = DEFAULT_EPS) -> bool:
    """O1 (products vanish on edges) and O2 (maximum cliques sum to I)."""
    return not orthogonal_assignment_violations(g, f, d, eps)


def is_ks_proof(g: Graph, f: Mapping[Hashable, Mat], d: int, eps: float = DEFAULT_EPS) -> bool:
    return verify_orthogonal_assignment(g, f, d, eps) and find_nc_colouring(g) is None


# ---------------------------------------------------------------- vector sets


@dataclass
class VectorSet:
    """Named rays in R^3 with optional declared bases."""

    names: list[str]
    lines: list[ProjLine]
    bases: list[tuple[str, str, str]]

    def __post_init__(self):
        seen: dict[ProjLine, str] = {}
        for n, l in zip(self.names, self.lines):
            if l in seen:
                raise ValueError(f"vectors {seen[l]} and {n} span the same line")
            seen[l] = n

    def __len__(self) -> int:
        return len(self.names)

    def line(self, name: str) -> ProjLine:
        return self.lines[self.names.index(name)]

    def is_basis_complete(self) -> bool:
        """Every vector lies in an orthonormal triple of the set."""
        g = orthogonality_graph(self)
        covered = {v for c in maximal_cliques(g) if len(c) == 3 for v in c}
        return covered == set(self.names)

    def canonical_assignment(self) -> dict[str, Mat]:
        """Rank-1 projector onto each vector (exact rationals)."""
        return {n: l.projector() for n, l in zip(self.names, self.lines)}


def parse_vectors(text: str) -> VectorSet:
    names, lines, bases = [], [], []
    for lineno, row in enumerate(text.splitlines(), 1):
        row = row.split("#", 1)[0].split()
        if not row:
            continue
        if row[0] == "vec" and len(row) == 5:
            names.append(row[1])
            lines.append(ProjLine.of([Fraction(x) for x in row[2:]]))
        elif row[0] == "basis" and len(row) == 4:
            bases.append((row[1], row[2], row[3]))
        else:
            raise ValueError(f"line {lineno}: expected 'vec name x y z' or 'basis a b c'")
    vs = VectorSet(names, lines, bases)
    for b in bases:
        for n in b:
            if n not in names:
                raise ValueError(f"basis mentions unknown vector {n}")
        a, b2, c = (vs.line(n) for n in b)
        if not (a.orthogonal(b2) and a.orthogonal(c) and b2.orthogonal(c)):
            raise ValueError(f"declared basis {b} is not orthogonal")
    return vs


def format_vectors(vs: VectorSet, header: Sequence[str] = ()) -> str:
    out = [f"# {h}" for h in header]
    for n, l in zip(vs.names, vs.lines):
        out.append(f"vec {n} " + " ".join(str(x) for x in l.coords))
    for b in vs.bases:
        out.append("basis " + " ".join(b))
    return "\n".join(out) + "\n"


KS_DATA = "ks_grid_rays.vec"


def load_ks(name: str = KS_DATA) -> VectorSet:
    """Load a shipped vector file and check it is a basis-complete KS set."""
    text = resources.files("pbasat.data").joinpath(name).read_text()
    vs = parse_vectors(text)
    g = orthogonality_graph(vs)
    if not vs.is_basis_complete() or not is_facet(g) or clique_number(g) != 3:
        raise ValueError(f"{name} is not a basis-complete facet set")
    if find_nc_colouring(g) is not None:
        raise ValueError(f"{name} admits a non-contextual colouring")
    return vs


def orthogonality_graph(vs: VectorSet) -> Graph:
    """Vertices are vector names; edges join orthogonal vectors (exactly)."""
    g = Graph(vs.names)
    for (a, la), (b, lb) in itertools.combinations(zip(vs.names, vs.lines), 2):
        if la.orthogonal(lb):
            g.add_edge(a, b)
    return g


def float_orthogonality_graph(vectors: Mapping[str, Sequence[complex]], eps: float = DEFAULT_EPS) -> Graph:
    """Orthogonality graph for floating vectors with |<v,w>| <= eps."""
    g = Graph(vectors)
    items = [(k, np.asarray(v, dtype=complex)) for k, v in vectors.items()]
    for (a, va), (b, vb) in itertools.combinations(items, 2):
        if abs(np.vdot(va, vb)) <= eps:
            g.add_edge(a, b)
    return g


# ---------------------------------------------------------------- formulas of graphs

_SAFE = re.compile(r"[A-Za-z0-9_]+\Z")


def default_names(g: Graph, prefix: str = "p") -> dict[Hashable, str]:
    """``p_<label>`` for identifier-safe labels, ``p_<index>`` otherwise."""
    labels = [str(v) if isinstance(v, (str, int)) and _SAFE.match(str(v)) else None for v in g.vertices]
    if None in labels or len(set(labels)) != len(labels):
        return {v: f"{prefix}_{k}" for k, v in enumerate(g.vertices)}
    return {v: f"{prefix}_{lab}" for v, lab in zip(g.vertices, labels)}


def formula_of_graph(g: Graph, names: Mapping[Hashable, str] | None = None) -> Formula:
    """Edge exclusions ~(p_v & p_w) followed by one disjunction per maximum clique."""
    names = default_names(g) if names is None else names
    parts = [Not(Var(names[u]) & Var(names[v])) for u, v in g.edges()]
    for c in omega(g):
        parts.append(disj(Var(names[v]) for v in c))
    return conj(parts)


def complete_graph(d: int, labels: Sequence[Hashable] | None = None) -> Graph:
    labels = list(range(1, d + 1)) if labels is None else list(labels)
    return Graph(labels, itertools.combinations(labels, 2))


def basis_formula(d: int, prefix: str = "p") -> Formula:
    """The formula of K_d over variables <prefix>1 .. <prefix>d."""
    g = complete_graph(d)
    return formula_of_graph(g, {k: f"{prefix}{k}" for k in g.vertices})


# ---------------------------------------------------------------- products and gadgets


def product(g: Graph, h: Graph) -> Graph:
    """Categorical product: (v,v') ~ (w,w') iff v ~ w and v' ~ w'."""
    out = Graph((v, w) for v in g.vertices for w in h.vertices)
    he = h.edges()
    for a, b in g.edges():
        for c, d in he:
            out.add_edge((a, c), (b, d))
            out.add_edge((a, d), (b, c))
    return out


def add_cons(g: Graph, w: Hashable, w2: Hashable, tag: Hashable) -> tuple[Hashable, Hashable]:
    """Attach x, x' adjacent to each other and to both w and w2."""
    x, x2 = ("cons", tag, 0), ("cons", tag, 1)
    g.add_edge(x, x2)
    for a in (x, x2):
        g.add_edge(a, w)
        g.add_edge(a, w2)
    return x, x2


def cons_graph() -> Graph:
    g = Graph(["w", "w'"])
    add_cons(g, "w", "w'", "")
    return g


def cke(g: Graph, ks: VectorSet) -> Graph:
    """G x G_KS plus a consistency gadget for every w and pair of KS vectors."""
    if clique_number(g) != 3 or not is_facet(g):
        raise ValueError("cke needs a facet graph with clique number 3")
    out = product(g, orthogonality_graph(ks))
    for w in g.vertices:
        for u, v in itertools.combinations(ks.names, 2):
            add_cons(out, (w, u), (w, v), (w, u, v))
    return out


def _plane_basis(line: ProjLine) -> tuple[tuple, tuple]:
    w = line.vector()
    for e in ((1, 0, 0), (0, 1, 0), (0, 0, 1)):
        a = cross(w, e)
        if any(x != 0 for x in a):
            return a, cross(w, a)
    raise AssertionError("unreachable")


def cke_assignment(g: Graph, ks: VectorSet, lines: Mapping[Hashable, ProjLine]) -> dict[Hashable, Mat]:
    """Extend a rank-1 orthogonal assignment of G (given as lines) to CKE(G).

    Product vertices copy the line of their G component; the two gadget
    vertices span the plane orthogonal to that line.
    """
    f: dict[Hashable, Mat] = {}
    proj = {v: lines[v].projector() for v in g.vertices}
    planes = {v: tuple(line_projector(x) for x in _plane_basis(lines[v])) for v in g.vertices}
    for w in g.vertices:
        for u in ks.names:
            f[(w, u)] = proj[w]
        for u, v in itertools.combinations(ks.names, 2):
            f[("cons", (w, u, v), 0)] = planes[w][0]
            f[("cons", (w, u, v), 1)] = planes[w][1]
    return f


# ---------------------------------------------------------------- cross-product terms


@dataclass(frozen=True)
class CrossTerm:
    """Either a variable (``name`` set) or the cross product of two terms."""

    name: str | None = None
    left: "CrossTerm | None" = None
    right: "CrossTerm | None" = None

    def is_var(self) -> bool:
        return self.name is not None

    def __str__(self) -> str:
        if self.is_var():
            return self.name
        return f"({self.left} * {self.right})"


def tvar(name: str) -> CrossTerm:
    return CrossTerm(name=name)


def tcross(a: CrossTerm, b: CrossTerm) -> CrossTerm:
    return CrossTerm(left=a, right=b)


def parse_term(text: str) -> CrossTerm:
    """Terms like ``x1 * (x2 * x3)``; ``*`` associates to the left."""
    tokens = re.findall(r"[A-Za-z][A-Za-z0-9_]*|[()*]|\S", text)
    pos = 0

    def atom() -> CrossTerm:
        nonlocal pos
        if pos >= len(tokens):
            raise ValueError("unexpected end of term")
        tok = tokens[pos]
        pos += 1
        if tok == "(":
            t = expr()
            if pos >= len(tokens) or tokens[pos] != ")":
                raise ValueError("missing ')'")
            pos += 1
            return t
        if re.match(r"[A-Za-z]", tok):
            return tvar(tok)
        raise ValueError(f"unexpected token {tok!r}")

    def expr() -> CrossTerm:
        nonlocal pos
        t = atom()
        while pos < len(tokens) and tokens[pos] == "*":
            pos += 1
            t = tcross(t, atom())
        return t

    t = expr()
    if pos != len(tokens):
        raise ValueError(f"unexpected token {tokens[pos]!r}")
    return t


def term_subterms(t: CrossTerm) -> list[CrossTerm]:
    """Distinct subterms in post-order."""
    out: list[CrossTerm] = []
    seen: set[CrossTerm] = set()

    def walk(s: CrossTerm) -> None:
        if s in seen:
            return
        if not s.is_var():
            walk(s.left)
            walk(s.right)
        seen.add(s)
        out.append(s)

    walk(t)
    return out


def term_tags(t: CrossTerm) -> dict[CrossTerm, str]:
    """Variables keep their names; compound subterms become s0, s1, ... ."""
    tags: dict[CrossTerm, str] = {}
    k = 0
    for s in term_subterms(t):
        if s.is_var():
            tags[s] = s.name
        else:
            tags[s] = f"s{k}"
            k += 1
    return tags


def _check_term(t: CrossTerm) -> None:
    if t.is_var():
        raise ValueError("the root of the term must be a cross product")
    if tvar("x1") not in term_subterms(t):
        raise ValueError("variable x1 does not occur in the term")


def term_graph(t: CrossTerm) -> Graph:
    """Parse DAG with the root merged into x1, made undirected, then
    triangle-completed with one fresh vertex per edge."""
    _check_term(t)
    tags = term_tags(t)
    root = tags[t]

    def node(s: CrossTerm) -> str:
        return "x1" if tags[s] == root else tags[s]

    base = Graph(node(s) for s in term_subterms(t))
    for s in term_subterms(t):
        if s.is_var():
            continue
        for c in (s.left, s.right):
            if node(s) != node(c):
                base.add_edge(node(s), node(c))
    out = Graph(base.vertices, base.edges())
    for u, v in base.edges():
        e = f"e_{u}_{v}"
        out.add_edge(e, u)
        out.add_edge(e, v)
    return out


def term_graph_assignment(t: CrossTerm, lines: Mapping[str, ProjLine]) -> dict[str, ProjLine]:
    """Lines on G_t: subterm values, x1's line on the merged root, and the
    cross product of the endpoints on each triangle vertex."""
    _check_term(t)
    from .numerics import eval_cross_term
    from .pba import Undefined

    tags = term_tags(t)
    root = tags[t]
    val: dict[str, ProjLine] = {}
    for s in term_subterms(t):
        if tags[s] == root:
            continue
        v = eval_cross_term(s, lines)
        if isinstance(v, Undefined):
            raise ValueError(f"subterm {s} is undefined on these lines")
        val[tags[s]] = v
    val["x1"] = lines["x1"]
    g = term_graph(t)
    for v in g.vertices:
        if v.startswith("e_"):
            a, b = [u for u in g.adj[v]]
            c = val[a].cross(val[b])
            if c is None:
                raise ValueError(f"lines at {a} and {b} coincide")
            val[v] = c
    return val


def theta(t: CrossTerm, ks: VectorSet) -> Formula:
    """The orthogonal-assignment formula of CKE(G_t)."""
    return formula_of_graph(cke(term_graph(t), ks))


# ---------------------------------------------------------------- magic square formulas

MAGIC_VARS = tuple("abcdefghi")


def _xor3(a: Formula, b: Formula, c: Formula) -> Formula:
    return Xor(Xor(a, b), c)


def magic_formula(cells: Sequence[str] = MAGIC_VARS) -> Formula:
    """Parity clauses of the magic square over cells given row by row.

    A context whose operators multiply to +I has parity 0, so its clause is
    the negated XOR; the last column multiplies to -I and is a plain XOR.
    """
    v = [Var(n) for n in cells]
    clauses = [
        Not(_xor3(v[0], v[1], v[2])),
        Not(_xor3(v[3], v[4], v[5])),
        Not(_xor3(v[6], v[7], v[8])),
        Not(_xor3(v[0], v[3], v[6])),
        Not(_xor3(v[1], v[4], v[7])),
        _xor3(v[2], v[5], v[8]),
    ]
    return conj(clauses)


def vartheta_pairs(t: CrossTerm) -> list[tuple[CrossTerm, CrossTerm]]:
    """Pairs (s, r): s a compound subterm, r one of its immediate children."""
    pairs = []
    for s in term_subterms(t):
        if s.is_var():
            continue
        for r in dict.fromkeys((s.left, s.right)):
            pairs.append((s, r))
    return pairs


def vartheta_cells(t: CrossTerm) -> list[list[str]]:
    """Variable names of each magic-square copy, row by row."""
    _check_term(t)
    tags = term_tags(t)
    root = tags[t]
    ident = {f"p_{root}_1": "p_x1_1", f"p_{root}_{root}": "p_x1_x1", f"p_1_{root}": "p_1_x1"}
    out = []
    for s, r in vartheta_pairs(t):
        S, R = tags[s], tags[r]
        cells = [
            f"p_{R}_1", f"p_1_{R}", f"p_{R}_{R}",
            f"p_1_{S}", f"p_{S}_1", f"p_{S}_{S}",
            f"p_{R}_{S}", f"p_{S}_{R}", f"p_w_{S}_{R}",
        ]
        out.append([ident.get(c, c) for c in cells])
    return out


def vartheta(t: CrossTerm) -> Formula:
    """Conjunction of one magic-square copy per (subterm, child) pair."""
    return conj(magic_formula(cells) for cells in vartheta_cells(t))


def _unit_pauli(line: ProjLine) -> Mat:
    v = np.array([float(x) for x in line.coords])
    return pauli(v / np.linalg.norm(v))


def vartheta_witness(t: CrossTerm, lines: Mapping[str, ProjLine]) -> dict[str, Mat]:
    """Involution assignment for vartheta built from a satisfying line
    assignment of ``t``; raises ValueError if copies disagree."""
    from .numerics import I2, eval_cross_term
    from .pba import Undefined

    tags = term_tags(t)
    val: dict[str, ProjLine] = {}
    for s in term_subterms(t):
        v = eval_cross_term(s, lines)
        if isinstance(v, Undefined):
            raise ValueError(f"subterm {s} is undefined on these lines")
        val[tags[s]] = v
    k = np.kron
    out: dict[str, Mat] = {}
    for (s, r), cells in zip(vartheta_pairs(t), vartheta_cells(t)):
        S, R = val[tags[s]], val[tags[r]]
        W = S.cross(R)
        if W is None:
            raise ValueError("subterm and child span the same line")
        sr, ss, sw = _unit_pauli(R), _unit_pauli(S), _unit_pauli(W)
        mats = [
            k(sr, I2), k(I2, sr), k(sr, sr),
            k(I2, ss), k(ss, I2), k(ss, ss),
            k(sr, ss), k(ss, sr), k(sw, sw),
        ]
        for name, m in zip(cells, mats):
            if name in out and not mat_equal(out[name], m, 1e-9):
                raise ValueError(f"copies disagree on {name}")
            out[name] = m
    return out


# ---------------------------------------------------------------- graph file format


def parse_graph(text: str) -> Graph:
    g = Graph()
    for lineno, row in enumerate(text.splitlines(), 1):
        row = row.split("#", 1)[0].split()
        if not row:
            continue
        if row[0] == "v" and len(row) == 2:
            g.add_vertex(row[1])
        elif row[0] == "e" and len(row) == 3:
            g.add_edge(row[1], row[2])
        else:
            raise ValueError(f"line {lineno}: expected 'v label' or 'e label label'")
    return g


def vertex_label(v: Hashable) -> str:
    if isinstance(v, tuple):
        return "(" + ",".join(vertex_label(x) for x in v) + ")"
    return str(v).replace(" ", "")


def format_graph(g: Graph, header: str | None = None) -> str:
    out = [f"# {header}"] if header else []
    out += [f"v {vertex_label(v)}" for v in g.vertices]
    out += [f"e {vertex_label(u)} {vertex_label(v)}" for u, v in g.edges()]
    return "\n".join(out) + "\n"
