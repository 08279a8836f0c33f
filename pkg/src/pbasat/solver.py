"""VARSAT over finite algebras and certificates of satisfiability in some
non-trivial partial Boolean algebra."""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Mapping, Sequence

from .formula import AND, NOT, OR, TOP, VAR, Formula, conjuncts, subformulas, tseitin, variables
from .pba import FinitePBA, PBAInterface, Undefined, leq, meaningful_eval, standard_algebra
from .sat import UNSAT, sat_classical

DEFAULT_BUDGET = 10_000_000


class BudgetExceeded(RuntimeError):
    """The search hit its node limit before deciding."""

    def __init__(self, budget: int):
        super().__init__(f"search budget of {budget} nodes exhausted")
        self.budget = budget


class No:
    """Singleton answer for a decided negative instance."""

    _instance: "No | None" = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "NO"

    def __bool__(self) -> bool:
        return False


NO = No()


class WitnessInvalid(ValueError):
    pass


# ---------------------------------------------------------------- VARSAT


def _variable_order(f: Formula) -> list[str]:
    """Most frequently occurring variables first; ties by first occurrence."""
    counts: Counter[str] = Counter()
    stack = [f]
    while stack:
        g = stack.pop()
        if g.kind == VAR:
            counts[g.name] += 1
        stack.extend(g.children)
    first = {n: k for k, n in enumerate(variables(f))}
    return sorted(first, key=lambda n: (-counts[n], first[n]))


def _search(
    A: PBAInterface,
    universe: Sequence[Any],
    f: Formula,
    accept: Callable[[Any], bool],
    budget: int,
    strong_one: bool,
) -> dict[str, Any] | No:
    order = _variable_order(f)
    pos = {n: k for k, n in enumerate(order)}
    subs = subformulas(f)
    index = {g: k for k, g in enumerate(subs)}
    # ready[g]: the depth after which every variable of g is bound
    ready: list[int] = []
    for g in subs:
        if g.kind == TOP:
            ready.append(-1)
        elif g.kind == VAR:
            ready.append(pos[g.name])
        else:
            ready.append(max(ready[index[c]] for c in g.children))
    layers: list[list[int]] = [[] for _ in range(len(order) + 1)]
    for k, r in enumerate(ready):
        layers[r + 1].append(k)
    kinds = [g.kind for g in subs]
    kids = [[index[c] for c in g.children] for g in subs]
    names = [g.name for g in subs]
    checked = set()
    if strong_one:
        checked = {index[c] for c in conjuncts(f)}
    one = A.one()
    val: list[Any] = [None] * len(subs)
    comm, neg, meet, join, equal = A.comm, A.neg, A.meet, A.join, A.equal
    alpha: dict[str, Any] = {}
    nodes = 0

    def settle(layer: int) -> bool:
        for k in layers[layer]:
            kind = kinds[k]
            if kind == TOP:
                val[k] = one
            elif kind == VAR:
                val[k] = alpha[names[k]]
            elif kind == NOT:
                val[k] = neg(val[kids[k][0]])
            else:
                x, y = val[kids[k][0]], val[kids[k][1]]
                if not comm(x, y):
                    return False
                val[k] = meet(x, y) if kind == AND else join(x, y)
            if k in checked and not equal(val[k], one):
                return False
        return True

    if not settle(0):
        return NO
    if not order:
        return {} if accept(val[-1]) else NO

    # iterative backtracking over variable depth
    choice = [0] * len(order)
    depth = 0
    while depth >= 0:
        if choice[depth] >= len(universe):
            choice[depth] = 0
            depth -= 1
            if depth >= 0:
                choice[depth] += 1
            continue
        nodes += 1
        if nodes > budget:
            raise BudgetExceeded(budget)
        alpha[order[depth]] = universe[choice[depth]]
        if not settle(depth + 1):
            choice[depth] += 1
            continue
        if depth + 1 == len(order):
            if accept(val[-1]):
                return {n: alpha[n] for n in variables(f)}
            choice[depth] += 1
            continue
        depth += 1
    return NO


def _universe(A: PBAInterface, universe: Sequence[Any] | None) -> Sequence[Any]:
    if universe is not None:
        return list(universe)
    if isinstance(A, FinitePBA):
        return list(A.elements)
    if getattr(A, "values", None) is not None:
        return list(A.values)
    raise ValueError("a universe of candidate elements is required for this backend")


def varsat(
    A: PBAInterface,
    target: Any,
    f: Formula,
    budget: int = DEFAULT_BUDGET,
    universe: Sequence[Any] | None = None,
) -> dict[str, Any] | No:
    """Meaningful substitution sending ``f`` to ``target``, or NO.

    Variables are tried most-frequent first over the universe (all elements
    of a FinitePBA, or an explicit pool for matrix backends). Raises
    BudgetExceeded after ``budget`` search nodes.
    """
    pool = _universe(A, universe)
    strong = A.equal(target, A.one())
    return _search(A, pool, f, lambda v: A.equal(v, target), budget, strong)


def varsat_weak(
    A: PBAInterface,
    f: Formula,
    budget: int = DEFAULT_BUDGET,
    universe: Sequence[Any] | None = None,
) -> dict[str, Any] | No:
    """Meaningful substitution with a nonzero value, or NO."""
    pool = _universe(A, universe)
    zero = A.zero()
    return _search(A, pool, f, lambda v: not A.equal(v, zero), budget, False)


def strong_satisfiers(A: PBAInterface, f: Formula, universe: Sequence[Any] | None = None) -> Iterable[dict[str, Any]]:
    """Every strong satisfier by brute force; an oracle for the search."""
    pool = _universe(A, universe)
    names = variables(f)
    for combo in itertools.product(pool, repeat=len(names)):
        alpha = dict(zip(names, combo))
        v = meaningful_eval(f, alpha, A)
        if not isinstance(v, Undefined) and A.equal(v, A.one()):
            yield alpha


# ---------------------------------------------------------------- certificates

CONSTS = ("0", "1")
EQ_ARITY = {"and": 3, "or": 3, "not": 2, "one": 1, "zero": 1, "eq": 2}


@dataclass
class NonTrivCert:
    """Commeasurability graph on tagged subformula values, a clique cover
    with the height-1 equations of each clique, order claims, and
    separating 0/1 valuations per clique.

    ``tags[k]`` is the vertex of the k-th subformula in post-order.
    ``seps[i][(a, b)]`` lists the 0/1 value of each vertex of clique i.
    """

    vertices: list[str]
    tags: list[str]
    edges: set[frozenset[str]]
    rel: set[tuple[str, str]]
    cliques: list[list[str]]
    eqs: list[list[tuple[str, ...]]]
    seps: list[dict[tuple[str, str], tuple[int, ...]]] = field(default_factory=list)

    def size(self) -> int:
        return (
            len(self.vertices)
            + len(self.edges)
            + len(self.rel)
            + sum(len(c) for c in self.cliques)
            + sum(len(e) for e in self.eqs)
            + sum(len(s) * len(c) for s, c in zip(self.seps, self.cliques))
        )


def _edge(a: str, b: str) -> frozenset[str]:
    return frozenset((a, b))


def required_equations(f: Formula, tags: Sequence[str]) -> list[tuple[str, ...]]:
    """The equation e_psi of every non-variable subformula, then root = 1."""
    subs = subformulas(f)
    index = {g: k for k, g in enumerate(subs)}
    out = []
    for k, g in enumerate(subs):
        if g.kind == TOP:
            out.append(("one", tags[k]))
        elif g.kind == NOT:
            out.append(("not", tags[k], tags[index[g.child]]))
        elif g.kind in (AND, OR):
            out.append((g.kind, tags[k], tags[index[g.left]], tags[index[g.right]]))
    out.append(("one", tags[-1]))
    return out


def _respects(nu: Mapping[str, int], eqs: Iterable[tuple[str, ...]]) -> bool:
    for e in eqs:
        k = e[0]
        if k == "and":
            ok = nu[e[1]] == (nu[e[2]] & nu[e[3]])
        elif k == "or":
            ok = nu[e[1]] == (nu[e[2]] | nu[e[3]])
        elif k == "not":
            ok = nu[e[1]] == 1 - nu[e[2]]
        elif k == "one":
            ok = nu[e[1]] == 1
        elif k == "zero":
            ok = nu[e[1]] == 0
        else:
            ok = nu[e[1]] == nu[e[2]]
        if not ok:
            return False
    return True


def cert_problems(cert: NonTrivCert, f: Formula) -> list[str]:
    """Every reason the certificate fails for ``f``; empty means valid."""
    out: list[str] = []
    subs = subformulas(f)
    V = list(cert.vertices)
    vset = set(V)
    if len(vset) != len(V) or vset & set(CONSTS):
        out.append("vertex names must be distinct and differ from 0 and 1")
    if len(cert.tags) != len(subs):
        return out + [f"expected {len(subs)} tags, found {len(cert.tags)}"]
    if any(t not in vset for t in cert.tags):
        return out + ["a tag names an unknown vertex"]
    if set(cert.tags) != vset:
        out.append("some vertex carries no subformula tag")
    for e in cert.edges:
        if len(e) != 2 or not e <= vset:
            out.append(f"edge {sorted(e)} is not a pair of vertices")
    if not cert.cliques:
        return out + ["the clique cover is empty"]
    if not (len(cert.cliques) == len(cert.eqs) == len(cert.seps)):
        return out + ["cliques, equations and separators differ in length"]
    # cliques: genuine, maximal, covering
    for i, c in enumerate(cert.cliques):
        if not c or len(set(c)) != len(c) or not set(c) <= vset:
            out.append(f"clique {i} is malformed")
            continue
        if any(_edge(a, b) not in cert.edges for a, b in itertools.combinations(c, 2)):
            out.append(f"clique {i} is not a clique of the graph")
            continue
        cs = set(c)
        for v in V:
            if v not in cs and all(_edge(v, u) in cert.edges for u in c):
                out.append(f"clique {i} is not maximal (extends by {v})")
                break
    covered = {_edge(a, b) for c in cert.cliques for a, b in itertools.combinations(c, 2)}
    for e in cert.edges:
        if e not in covered:
            out.append(f"edge {sorted(e)} is not covered by a clique")
    # subformula structure
    index = {g: k for k, g in enumerate(subs)}
    t = cert.tags
    for k, g in enumerate(subs):
        if g.kind in (AND, OR):
            a, b = t[index[g.left]], t[index[g.right]]
            for x, y in ((a, b), (t[k], a), (t[k], b)):
                if x != y and _edge(x, y) not in cert.edges:
                    out.append(f"missing edge {x} - {y} for subformula {k}")
        elif g.kind == NOT:
            a = t[index[g.child]]
            if a != t[k] and _edge(a, t[k]) not in cert.edges:
                out.append(f"missing edge {t[k]} - {a} for subformula {k}")
    eqsets = [set(e) for e in cert.eqs]
    for e in required_equations(f, t):
        if not any(e in s for s in eqsets):
            out.append(f"no clique records the equation {' '.join(e)}")
    # equations only over their clique
    for i, (c, eqs) in enumerate(zip(cert.cliques, cert.eqs)):
        cs = set(c)
        for e in eqs:
            if e[0] not in EQ_ARITY or len(e) != EQ_ARITY[e[0]] + 1:
                out.append(f"clique {i}: malformed equation {e}")
            elif not set(e[1:]) <= cs:
                out.append(f"clique {i}: equation {' '.join(e)} leaves the clique")
    # order claims and separators
    dom = vset | set(CONSTS)
    if any(a not in dom or b not in dom for a, b in cert.rel):
        out.append("an order claim mentions an unknown vertex")
    if ("1", "0") in cert.rel:
        out.append("the order claims 1 <= 0")
    for i, (c, eqs, seps) in enumerate(zip(cert.cliques, cert.eqs, cert.seps)):
        pool = list(c) + list(CONSTS)
        local_rel = [(a, b) for a, b in cert.rel if a in pool and b in pool and a != b]
        for key, bits in seps.items():
            if len(bits) != len(c) or any(x not in (0, 1) for x in bits):
                out.append(f"clique {i}: separator {key} has the wrong shape")
        for a, b in itertools.permutations(pool, 2):
            if (a, b) in cert.rel:
                continue
            bits = seps.get((a, b))
            if bits is None:
                out.append(f"clique {i}: no separator for {a} not<= {b}")
                continue
            if len(bits) != len(c):
                continue
            nu = dict(zip(c, bits))
            nu["0"], nu["1"] = 0, 1
            if nu[a] != 1 or nu[b] != 0:
                out.append(f"clique {i}: separator for ({a}, {b}) does not separate")
            elif not _respects(nu, eqs):
                out.append(f"clique {i}: separator for ({a}, {b}) breaks an equation")
            elif any(nu[x] > nu[y] for x, y in local_rel):
                out.append(f"clique {i}: separator for ({a}, {b}) breaks an order claim")
    return out


def cert_verify(cert: NonTrivCert, f: Formula) -> bool:
    """Check the certificate in time polynomial in |f| + |cert|."""
    return not cert_problems(cert, f)


class _Values:
    """Distinct backend values up to the backend's equality."""

    def __init__(self, A: PBAInterface):
        self.A = A
        self.items: list[Any] = []
        self._hashable = isinstance(A, FinitePBA)
        self._index: dict[Any, int] = {}

    def find(self, x: Any) -> int | None:
        if self._hashable:
            return self._index.get(x)
        for k, y in enumerate(self.items):
            if self.A.equal(x, y):
                return k
        return None

    def add(self, x: Any) -> int:
        k = self.find(x)
        if k is None:
            k = len(self.items)
            self.items.append(x)
            if self._hashable:
                self._index[x] = k
        return k


def _atom_patterns(A: PBAInterface, members: Sequence[Any]) -> list[tuple[int, ...]]:
    """Sign patterns of the atoms of the Boolean algebra generated by
    ``members``: one 0/1 tuple per nonzero meet of members or complements."""
    zero = A.zero()
    out: list[tuple[int, ...]] = []
    stack: list[tuple[Any, tuple[int, ...]]] = [(A.one(), ())]
    while stack:
        m, bits = stack.pop()
        if len(bits) == len(members):
            out.append(bits)
            continue
        c = members[len(bits)]
        for b, lit in ((0, A.neg(c)), (1, c)):
            nxt = A.meet(m, lit)
            if not A.equal(nxt, zero):
                stack.append((nxt, bits + (b,)))
    out.sort()
    return out


def _grow_clique(seed: Sequence[int], adj: list[set[int]], n: int) -> list[int]:
    members = list(dict.fromkeys(seed))
    common = set(range(n))
    for v in members:
        common &= adj[v] | {v}
    for v in range(n):
        if v in common and v not in members:
            members.append(v)
            common &= adj[v] | {v}
    return sorted(members)


def cert_from_witness(A: PBAInterface, alpha: Mapping[str, Any], f: Formula) -> NonTrivCert:
    """Certificate read off a strong satisfier ``alpha`` in a non-trivial ``A``."""
    if A.equal(A.zero(), A.one()):
        raise WitnessInvalid("the algebra is trivial")
    v = meaningful_eval(f, alpha, A)
    if isinstance(v, Undefined):
        raise WitnessInvalid(f"substitution is not meaningful at {v.at}")
    if not A.equal(v, A.one()):
        raise WitnessInvalid("the formula does not evaluate to 1")
    subs = subformulas(f)
    index = {g: k for k, g in enumerate(subs)}
    vals = _Values(A)
    sub_vertex: list[int] = []
    for g in subs:
        if g.kind == TOP:
            x = A.one()
        elif g.kind == VAR:
            x = alpha[g.name]
        elif g.kind == NOT:
            x = A.neg(vals.items[sub_vertex[index[g.child]]])
        else:
            a, b = (vals.items[sub_vertex[index[c]]] for c in g.children)
            x = A.meet(a, b) if g.kind == AND else A.join(a, b)
        sub_vertex.append(vals.add(x))
    items = vals.items
    n = len(items)
    names = [f"v{k}" for k in range(n)]
    adj = [set() for _ in range(n)]
    for i, j in itertools.combinations(range(n), 2):
        if A.comm(items[i], items[j]):
            adj[i].add(j)
            adj[j].add(i)
    # seeds: each connective's triple, each negation pair, the root and T
    seeds: list[list[int]] = []
    for k, g in enumerate(subs):
        if g.kind in (AND, OR, NOT):
            seeds.append([sub_vertex[k]] + [sub_vertex[index[c]] for c in g.children])
        elif g.kind == TOP:
            seeds.append([sub_vertex[k]])
    seeds.append([sub_vertex[-1]])
    cliques: list[list[int]] = []
    for s in seeds:
        c = _grow_clique(s, adj, n)
        if c not in cliques:
            cliques.append(c)
    covered = {(a, b) for c in cliques for a, b in itertools.combinations(c, 2)}
    for i in range(n):
        for j in sorted(adj[i]):
            if i < j and (i, j) not in covered:
                c = _grow_clique([i, j], adj, n)
                cliques.append(c)
                covered |= set(itertools.combinations(c, 2))
    edges = {_edge(names[i], names[j]) for i in range(n) for j in adj[i] if i < j}
    one, zero = A.one(), A.zero()
    # order claims over vertices and constants, wherever commeasurable
    ext = list(items) + [zero, one]
    ext_names = names + ["0", "1"]
    rel: set[tuple[str, str]] = set()
    for i, j in itertools.permutations(range(n + 2), 2):
        if (i < n and j < n and j not in adj[i]):
            continue
        if leq(A, ext[i], ext[j]):
            rel.add((ext_names[i], ext_names[j]))
    required = required_equations(f, [names[k] for k in sub_vertex])
    eqs_all: list[list[tuple[str, ...]]] = []
    seps_all: list[dict[tuple[str, str], tuple[int, ...]]] = []
    for c in cliques:
        cn = [names[i] for i in c]
        cs = set(cn)
        eqs: list[tuple[str, ...]] = []
        for x in c:
            if A.equal(items[x], one):
                eqs.append(("one", names[x]))
            if A.equal(items[x], zero):
                eqs.append(("zero", names[x]))
        for x, y in itertools.permutations(c, 2):
            if A.equal(items[x], A.neg(items[y])):
                eqs.append(("not", names[x], names[y]))
        for y, z in itertools.combinations(c, 2):
            m = A.meet(items[y], items[z])
            j = A.join(items[y], items[z])
            for x in c:
                if A.equal(items[x], m):
                    eqs.append(("and", names[x], names[y], names[z]))
                if A.equal(items[x], j):
                    eqs.append(("or", names[x], names[y], names[z]))
        for e in required:
            if set(e[1:]) <= cs and e not in eqs:
                eqs.append(e)
        patterns = _atom_patterns(A, [items[i] for i in c])
        pool = cn + ["0", "1"]
        seps: dict[tuple[str, str], tuple[int, ...]] = {}
        for a, b in itertools.permutations(pool, 2):
            if (a, b) in rel:
                continue
            for bits in patterns:
                nu = dict(zip(cn, bits))
                nu["0"], nu["1"] = 0, 1
                if nu[a] == 1 and nu[b] == 0:
                    seps[(a, b)] = bits
                    break
            else:
                raise WitnessInvalid(f"no separating valuation for {a}, {b}")
        eqs_all.append(eqs)
        seps_all.append(seps)
    return NonTrivCert(
        vertices=names,
        tags=[names[k] for k in sub_vertex],
        edges=edges,
        rel=rel,
        cliques=[[names[i] for i in c] for c in cliques],
        eqs=eqs_all,
        seps=seps_all,
    )


# ---------------------------------------------------------------- All-SAT


def _two_valued_certificate(f: Formula) -> NonTrivCert | None:
    model = sat_classical(tseitin(f))
    if model is UNSAT:
        return None
    two = standard_algebra("two")
    alpha = {n: two.elem(str(model.get(n, 0))) for n in variables(f)}
    return cert_from_witness(two, alpha, f)


def forced_commeasurability(f: Formula) -> list[set[int]]:
    """Adjacency over subformula indices: the pairs every meaningful
    substitution makes commeasurable, closed under the pBA rules."""
    subs = subformulas(f)
    n = len(subs)
    index = {g: k for k, g in enumerate(subs)}
    adj = [set() for _ in range(n)]

    def link(a: int, b: int) -> bool:
        if a == b or b in adj[a]:
            return False
        adj[a].add(b)
        adj[b].add(a)
        return True

    tops = [k for k, g in enumerate(subs) if g.kind == TOP]
    for k, g in enumerate(subs):
        if g.kind in (AND, OR):
            a, b = index[g.left], index[g.right]
            link(a, b)
            link(k, a)
            link(k, b)
        elif g.kind == NOT:
            link(k, index[g.child])
    for t in tops:
        for k in range(n):
            link(t, k)
    changed = True
    while changed:
        changed = False
        for k, g in enumerate(subs):
            if g.kind in (AND, OR):
                a, b = index[g.left], index[g.right]
                for y in list(adj[a] & adj[b]):
                    changed |= link(k, y)
            elif g.kind == NOT:
                a = index[g.child]
                for y in list(adj[a]):
                    changed |= link(k, y)
                for y in list(adj[k]):
                    changed |= link(a, y)
    return adj


def _local_models(
    clique: Sequence[int], subs: Sequence[Formula], index: Mapping[Formula, int], root: int, tick: Callable[[], None]
) -> list[tuple[int, ...]]:
    """0/1 valuations of the clique satisfying every equation it contains."""
    pos = {v: i for i, v in enumerate(clique)}
    checks: list[list[Callable[[list[int]], bool]]] = [[] for _ in clique]

    def at(*vs: int) -> int:
        return max(pos[v] for v in vs)

    for v in clique:
        g = subs[v]
        if g.kind == TOP:
            checks[pos[v]].append(lambda nu, i=pos[v]: nu[i] == 1)
        elif g.kind == NOT and index[g.child] in pos:
            i, j = pos[v], pos[index[g.child]]
            checks[at(v, index[g.child])].append(lambda nu, i=i, j=j: nu[i] == 1 - nu[j])
        elif g.kind in (AND, OR) and index[g.left] in pos and index[g.right] in pos:
            i, j, k = pos[v], pos[index[g.left]], pos[index[g.right]]
            if g.kind == AND:
                fn = lambda nu, i=i, j=j, k=k: nu[i] == (nu[j] & nu[k])  # noqa: E731
            else:
                fn = lambda nu, i=i, j=j, k=k: nu[i] == (nu[j] | nu[k])  # noqa: E731
            checks[at(v, index[g.left], index[g.right])].append(fn)
        if v == root:
            checks[pos[v]].append(lambda nu, i=pos[v]: nu[i] == 1)
    out: list[tuple[int, ...]] = []
    nu: list[int] = []

    def extend() -> None:
        tick()
        d = len(nu)
        if d == len(clique):
            out.append(tuple(nu))
            return
        for b in (0, 1):
            nu.append(b)
            if all(ch(nu) for ch in checks[d]):
                extend()
            nu.pop()

    extend()
    return out


def allsat(f: Formula, budget: int = DEFAULT_BUDGET) -> NonTrivCert | No:
    """Decide satisfiability of ``f`` in some non-trivial pBA.

    A classical model gives a certificate over the two-element algebra.
    Otherwise the forced commeasurability pattern on the subformulas is
    covered by its maximal cliques; each clique gets its 0/1 local models,
    which are pruned until every pair of cliques agrees on its overlap. An
    emptied clique proves NO; otherwise the surviving models yield the
    separators of a certificate.
    """
    cert = _two_valued_certificate(f)
    if cert is not None:
        return cert
    from .graphs import Graph, maximal_cliques

    subs = subformulas(f)
    n = len(subs)
    index = {g: k for k, g in enumerate(subs)}
    adj = forced_commeasurability(f)
    g = Graph(range(n), [(a, b) for a in range(n) for b in adj[a] if a < b])
    cliques = maximal_cliques(g)
    spent = 0

    def tick() -> None:
        nonlocal spent
        spent += 1
        if spent > budget:
            raise BudgetExceeded(budget)

    models = [_local_models(c, subs, index, n - 1, tick) for c in cliques]
    # pairwise projection consistency to a fixpoint
    overlaps = []
    for i, j in itertools.combinations(range(len(cliques)), 2):
        shared = sorted(set(cliques[i]) & set(cliques[j]))
        if shared:
            pi = [cliques[i].index(v) for v in shared]
            pj = [cliques[j].index(v) for v in shared]
            overlaps.append((i, j, pi, pj))
    changed = True
    while changed:
        changed = False
        for i, j, pi, pj in overlaps:
            tick()
            si = {tuple(m[k] for k in pi) for m in models[i]}
            sj = {tuple(m[k] for k in pj) for m in models[j]}
            both = si & sj
            if both != si:
                models[i] = [m for m in models[i] if tuple(m[k] for k in pi) in both]
                changed = True
            if both != sj:
                models[j] = [m for m in models[j] if tuple(m[k] for k in pj) in both]
                changed = True
        if any(not m for m in models):
            return NO
    names = [f"v{k}" for k in range(n)]
    rel: set[tuple[str, str]] = set()
    for c, ms in zip(cliques, models):
        pool = [names[v] for v in c] + ["0", "1"]
        cols = [list(col) for col in zip(*ms)] + [[0] * len(ms), [1] * len(ms)]
        for a, b in itertools.permutations(range(len(pool)), 2):
            if all(x <= y for x, y in zip(cols[a], cols[b])):
                rel.add((pool[a], pool[b]))
    required = required_equations(f, names)
    eqs_all, seps_all = [], []
    for c, ms in zip(cliques, models):
        cn = [names[v] for v in c]
        cs = set(cn)
        eqs_all.append([e for e in dict.fromkeys(required) if set(e[1:]) <= cs])
        seps: dict[tuple[str, str], tuple[int, ...]] = {}
        pool = cn + ["0", "1"]
        for a, b in itertools.permutations(pool, 2):
            if (a, b) in rel:
                continue
            for m in ms:
                nu = dict(zip(cn, m))
                nu["0"], nu["1"] = 0, 1
                if nu[a] == 1 and nu[b] == 0:
                    seps[(a, b)] = m
                    break
        seps_all.append(seps)
    return NonTrivCert(
        vertices=names,
        tags=names,
        edges={_edge(names[a], names[b]) for a in range(n) for b in adj[a] if a < b},
        rel=rel,
        cliques=[[names[v] for v in c] for c in cliques],
        eqs=eqs_all,
        seps=seps_all,
    )


# ---------------------------------------------------------------- serialization


def format_cert(cert: NonTrivCert, header: str | None = None) -> str:
    """Line records: vertex, tag, edge, leq, clique, eq, sep."""
    order = {v: k for k, v in enumerate(cert.vertices)}
    key = lambda x: order.get(x, len(order) + int(x == "1"))  # noqa: E731
    out = [f"# {header}"] if header else []
    out += [f"vertex {v}" for v in cert.vertices]
    out += [f"tag {k} {v}" for k, v in enumerate(cert.tags)]
    for e in sorted(cert.edges, key=lambda e: sorted(map(key, e))):
        a, b = sorted(e, key=key)
        out.append(f"edge {a} {b}")
    for a, b in sorted(cert.rel, key=lambda p: (key(p[0]), key(p[1]))):
        out.append(f"leq {a} {b}")
    for i, c in enumerate(cert.cliques):
        out.append(f"clique {i} " + " ".join(c))
    for i, eqs in enumerate(cert.eqs):
        out += [f"eq {i} " + " ".join(e) for e in eqs]
    for i, seps in enumerate(cert.seps):
        for (a, b), bits in sorted(seps.items(), key=lambda kv: (key(kv[0][0]), key(kv[0][1]))):
            out.append(f"sep {i} {a} {b} " + ("".join(map(str, bits)) or "-"))
    return "\n".join(out) + "\n"


class CertFormatError(ValueError):
    pass


def parse_cert(text: str) -> NonTrivCert:
    vertices: list[str] = []
    tags: dict[int, str] = {}
    edges: set[frozenset[str]] = set()
    rel: set[tuple[str, str]] = set()
    cliques: dict[int, list[str]] = {}
    eqs: dict[int, list[tuple[str, ...]]] = {}
    seps: dict[int, dict[tuple[str, str], tuple[int, ...]]] = {}
    for lineno, row in enumerate(text.splitlines(), 1):
        row = row.split("#", 1)[0].split()
        if not row:
            continue
        try:
            kind, args = row[0], row[1:]
            if kind == "vertex" and len(args) == 1:
                vertices.append(args[0])
            elif kind == "tag" and len(args) == 2:
                tags[int(args[0])] = args[1]
            elif kind == "edge" and len(args) == 2:
                edges.add(_edge(*args))
            elif kind == "leq" and len(args) == 2:
                rel.add((args[0], args[1]))
            elif kind == "clique" and len(args) >= 2:
                cliques[int(args[0])] = args[1:]
            elif kind == "eq" and len(args) >= 3:
                eqs.setdefault(int(args[0]), []).append(tuple(args[1:]))
            elif kind == "sep" and len(args) == 4:
                bits = () if args[3] == "-" else tuple(int(b) for b in args[3])
                seps.setdefault(int(args[0]), {})[(args[1], args[2])] = bits
            else:
                raise CertFormatError(f"line {lineno}: unrecognised record")
        except ValueError as exc:
            raise CertFormatError(f"line {lineno}: {exc}") from None
    k = len(cliques)
    if sorted(cliques) != list(range(k)) or any(i >= k for i in list(eqs) + list(seps)):
        raise CertFormatError("clique indices must run 0..k-1")
    if sorted(tags) != list(range(len(tags))):
        raise CertFormatError("tag indices must run 0..n-1")
    return NonTrivCert(
        vertices=vertices,
        tags=[tags[i] for i in range(len(tags))],
        edges=edges,
        rel=rel,
        cliques=[cliques[i] for i in range(k)],
        eqs=[eqs.get(i, []) for i in range(k)],
        seps=[seps.get(i, {}) for i in range(k)],
    )
