import itertools
from math import comb

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pbasat.formula import And, Not, Or, Var, eval_classical, assignments, variables
from pbasat.graphs import (
    Graph,
    VectorSet,
    basis_formula,
    cke,
    cke_assignment,
    clique_number,
    complete_graph,
    cons_graph,
    find_nc_colouring,
    format_graph,
    format_vectors,
    formula_of_graph,
    is_facet,
    is_ks_proof,
    is_nc_colouring,
    load_ks,
    magic_formula,
    maximal_cliques,
    omega,
    orthogonality_graph,
    parse_graph,
    parse_term,
    parse_vectors,
    product,
    term_graph,
    term_graph_assignment,
    vartheta,
    vartheta_cells,
    vartheta_witness,
    verify_orthogonal_assignment,
)
from pbasat.numerics import ProjLine, identity, involution_ops, line_projector, projector_ops, xsat_satisfied
from pbasat.pba import meaningful_eval
from pbasat.solver import NO, varsat


@pytest.fixture(scope="module")
def ks():
    return load_ks()


def lines(*vs):
    return [ProjLine.of(v) for v in vs]


def vset(*vs):
    return VectorSet([f"u{i}" for i in range(len(vs))], lines(*vs), [])


# ---------------------------------------------------------------- cliques


def brute_maximal_cliques(g):
    vs = list(g.vertices)
    cliques = [
        set(c)
        for k in range(1, len(vs) + 1)
        for c in itertools.combinations(vs, k)
        if all(g.has_edge(a, b) for a, b in itertools.combinations(c, 2))
    ]
    return {frozenset(c) for c in cliques if not any(c < d for d in cliques)}


@st.composite
def small_graphs(draw):
    n = draw(st.integers(1, 7))
    pairs = list(itertools.combinations(range(n), 2))
    mask = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return Graph(range(n), [p for p, keep in zip(pairs, mask) if keep])


@settings(max_examples=200)
@given(small_graphs())
def test_bron_kerbosch_matches_brute_force(g):
    assert {frozenset(c) for c in maximal_cliques(g)} == brute_maximal_cliques(g)


@given(small_graphs())
def test_clique_output_is_order_normalized(g):
    h = Graph(reversed(list(g.vertices)), list(reversed(g.edges())))
    assert sorted(map(sorted, maximal_cliques(g))) == sorted(map(sorted, maximal_cliques(h)))


def test_clique_examples():
    k3 = complete_graph(3)
    assert [sorted(c) for c in maximal_cliques(k3)] == [[1, 2, 3]]
    p3 = Graph("abc", [("a", "b"), ("b", "c")])
    assert len(maximal_cliques(p3)) == 2 and clique_number(p3) == 2 and is_facet(p3)
    pendant = Graph("abcd", [("a", "b"), ("b", "c"), ("a", "c"), ("c", "d")])
    assert not is_facet(pendant)
    assert len(omega(pendant)) == 1


# ---------------------------------------------------------------- orthogonality and colourings


def test_orthogonality_graph_examples():
    g = orthogonality_graph(vset((1, 0, 0), (0, 1, 0), (0, 0, 1)))
    assert len(g.edges()) == 3
    assert orthogonality_graph(vset((1, 0, 0), (1, 1, 0))).edges() == []


def test_vector_set_rejects_duplicate_lines():
    with pytest.raises(ValueError):
        vset((1, 2, 0), (-2, -4, 0))


def test_vector_file_round_trip(ks):
    again = parse_vectors(format_vectors(ks, ["pbasat test"]))
    assert again.names == ks.names and again.lines == ks.lines and again.bases == ks.bases


def test_vector_file_accepts_fractions():
    vs = parse_vectors("vec a 1/2 0 0\nvec b 0 2/3 0\nvec c 0 0 -1\nbasis a b c\n")
    assert vs.line("a") == ProjLine.of((1, 0, 0)) and vs.is_basis_complete()


def test_colouring_examples():
    k3 = complete_graph(3)
    f = find_nc_colouring(k3)
    assert sorted(f.values()) == [0, 0, 1]
    c4 = Graph(range(4), [(0, 1), (1, 2), (2, 3), (3, 0)])
    f = find_nc_colouring(c4)
    assert f[0] == f[2] != f[1] == f[3]
    assert is_nc_colouring(c4, f)


def test_shipped_ks_set(ks):
    g = orthogonality_graph(ks)
    assert len(ks) == 49 and len(ks.bases) == len(omega(g)) == 36
    assert is_facet(g) and clique_number(g) == 3
    assert find_nc_colouring(g) is None


def test_basis_complete_colouring_needs_only_cliques(ks):
    # for a basis-complete set the edge rule is implied by the clique rule
    g = orthogonality_graph(ks)
    assert find_nc_colouring(g, edge_rule=False) is None
    sub = VectorSet(ks.names[:12], ks.lines[:12], [])
    if sub.is_basis_complete():
        h = orthogonality_graph(sub)
        assert (find_nc_colouring(h) is None) == (find_nc_colouring(h, edge_rule=False) is None)


def test_orthogonal_assignment_examples():
    k3 = complete_graph(3)
    e = [line_projector(v) for v in [(1, 0, 0), (0, 1, 0), (0, 0, 1)]]
    assert verify_orthogonal_assignment(k3, dict(enumerate(e, 1)), 3)
    assert not verify_orthogonal_assignment(k3, {1: e[0], 2: e[0], 3: e[2]}, 3)
    assert not is_ks_proof(k3, dict(enumerate(e, 1)), 3)
    single = Graph(["v"])
    assert not is_ks_proof(single, {"v": identity(3, exact=True)}, 3)


def test_cons_gadget_assignment():
    g = cons_graph()
    e1, e2, e3 = (line_projector(v) for v in [(1, 0, 0), (0, 1, 0), (0, 0, 1)])
    x, x2 = [v for v in g.vertices if v not in ("w", "w'")]
    assert verify_orthogonal_assignment(g, {"w": e3, "w'": e3, x: e1, x2: e2}, 3)
    assert not verify_orthogonal_assignment(g, {"w": e3, "w'": e1, x: e1, x2: e2}, 3)


def test_ks_canonical_assignment_is_a_proof(ks):
    g = orthogonality_graph(ks)
    f = ks.canonical_assignment()
    assert is_ks_proof(g, f, 3)
    # parity of ranks is not a colouring: every basis gets three rank-1 values
    parity = {v: 1 for v in f}
    assert not is_nc_colouring(g, parity)


# ---------------------------------------------------------------- formulas of graphs


def test_formula_of_single_edge():
    g = Graph(["v", "w"], [("v", "w")])
    pv, pw = Var("p_v"), Var("p_w")
    assert formula_of_graph(g) is And(Not(And(pv, pw)), Or(pv, pw))


def test_formula_of_edgeless_graph():
    g = Graph(["v", "w"])
    f = formula_of_graph(g)
    assert set(variables(f)) == {"p_v", "p_w"}
    assert [a for a in assignments(["p_v", "p_w"]) if eval_classical(f, a)] == [{"p_v": 1, "p_w": 1}]


def test_basis_formula_captures_bases():
    P = projector_ops(3, exact=True)
    alpha = {f"p{i + 1}": line_projector(v) for i, v in enumerate([(1, 0, 0), (0, 1, 0), (0, 0, 1)])}
    assert P.equal(meaningful_eval(basis_formula(3), alpha, P), P.one())
    alpha["p3"] = line_projector((0, 1, 0))
    v = meaningful_eval(basis_formula(3), alpha, P)
    assert not P.equal(v, P.one())


def brute_orthogonal_assignment(g, pool, d):
    vs = list(g.vertices)
    for combo in itertools.product(pool, repeat=len(vs)):
        if verify_orthogonal_assignment(g, dict(zip(vs, combo)), d):
            return True
    return False


def test_orthogonal_assignments_are_strong_satisfiers():
    P = projector_ops(2, exact=True)
    e1, e2 = line_projector((1, 0)), line_projector((0, 1))
    f1, f2 = line_projector((1, 1)), line_projector((1, -1))
    pool = [P.zero(), P.one(), e1, e2, f1, f2]
    graphs = [
        complete_graph(2),
        complete_graph(3),
        Graph("abc", [("a", "b"), ("b", "c")]),
        Graph(range(4), [(0, 1), (1, 2), (2, 3), (3, 0)]),
        Graph(range(5), [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]),
        Graph(["v", "w"]),
    ]
    for g in graphs:
        found = varsat(P, P.one(), formula_of_graph(g), universe=pool) is not NO
        assert found == brute_orthogonal_assignment(g, pool, 2)


# ---------------------------------------------------------------- products and CKE


def test_product_examples():
    k2 = complete_graph(2)
    pr = product(k2, k2)
    assert len(pr.vertices) == 4 and len(pr.edges()) == 2
    k3 = complete_graph(3, "abc")
    t = product(k3, complete_graph(3, "xyz"))
    assert all(t.has_edge(u, v) for u, v in itertools.combinations([("a", "x"), ("b", "y"), ("c", "z")], 2))


def test_cke_size_and_assignment(ks):
    t = parse_term("x1*x2")
    g = term_graph(t)
    big = cke(g, ks)
    n = len(ks)
    assert len(big.vertices) == len(g.vertices) * n + len(g.vertices) * comb(n, 2) * 2
    ls = term_graph_assignment(t, {"x1": ProjLine.of((1, 0, 0)), "x2": ProjLine.of((0, 1, 0))})
    assert verify_orthogonal_assignment(big, cke_assignment(g, ks, ls), 3)


def test_cke_rejects_non_facet_input(ks):
    with pytest.raises(ValueError):
        cke(complete_graph(2), ks)


def test_cke_colourings_follow_the_base_graph(ks):
    # the consistency gadgets force a constant colour along the KS coordinate,
    # so CKE(G) is colourable exactly when G is
    g = complete_graph(3, ["a", "b", "c"])
    f = find_nc_colouring(cke(g, ks))
    assert f is not None
    for w in g.vertices:
        assert len({f[(w, u)] for u in ks.names}) == 1
    assert sum(f[(w, ks.names[0])] for w in g.vertices) == 1


# ---------------------------------------------------------------- cross-product terms


TERMS = ["x1*x2", "(x1*x2)*x2", "x2*(x3*x1)", "(x2*x3)*(x3*x1)", "((x1*x2)*x3)*x2"]


def test_term_graph_of_single_product_is_a_triangle():
    g = term_graph(parse_term("x1*x2"))
    assert sorted(g.vertices) == ["e_x1_x2", "x1", "x2"]
    assert len(g.edges()) == 3


@pytest.mark.parametrize("text", TERMS)
def test_term_graphs_are_3_facet(text):
    from pbasat.graphs import term_subterms

    t = parse_term(text)
    g = term_graph(t)
    assert is_facet(g) and clique_number(g) == 3
    base = [v for v in g.vertices if not str(v).startswith("e_")]
    assert len(g.vertices) <= len(term_subterms(t)) + (len(g.vertices) - len(base))


def test_term_without_x1_or_bare_root_is_rejected():
    with pytest.raises(ValueError):
        term_graph(parse_term("x2*x3"))
    with pytest.raises(ValueError):
        term_graph(parse_term("x1"))


def test_satisfied_term_gives_orthogonal_assignment():
    t = parse_term("(x1*x2)*x2")
    ls = {"x1": ProjLine.of((1, 0, 0)), "x2": ProjLine.of((0, 1, 0))}
    assert xsat_satisfied(t, ls)
    g = term_graph(t)
    f = {v: l.projector() for v, l in term_graph_assignment(t, ls).items()}
    assert verify_orthogonal_assignment(g, f, 3)


# ---------------------------------------------------------------- magic square formulas


def test_magic_formula_shape_and_unsatisfiability():
    mu = magic_formula()
    assert variables(mu) == list("abcdefghi")
    assert not any(eval_classical(mu, a) for a in assignments(list("abcdefghi")))


def test_vartheta_copies_share_the_subterm_row():
    cells = vartheta_cells(parse_term("x1*x2"))
    assert len(cells) == 2
    assert cells[0][3:6] == cells[1][3:6] == ["p_1_x1", "p_x1_1", "p_x1_x1"]


def test_vartheta_witness_from_satisfied_term():
    t = parse_term("(x1*x2)*x2")
    w = vartheta_witness(t, {"x1": ProjLine.of((1, 0, 0)), "x2": ProjLine.of((0, 1, 0))})
    ops = involution_ops(4)
    assert ops.equal(meaningful_eval(vartheta(t), w, ops), ops.one())


def test_graph_file_round_trip():
    g = term_graph(parse_term("(x1*x2)*x2"))
    h = parse_graph(format_graph(g, header="pbasat test"))
    assert h.vertices == g.vertices and sorted(h.edges()) == sorted(g.edges())
