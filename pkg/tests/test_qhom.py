import itertools
import random

import numpy as np
import pytest

from pbasat.formula import Var, assignments, eval_classical, parse, variables
from pbasat.numerics import line_projector, projector_ops, standard_magic
from pbasat.pba import Undefined, meaningful_eval
from pbasat.qhom import (
    Structure,
    assignment_to_family,
    assignment_to_hom,
    classical_homomorphisms,
    cnf_to_structures,
    family_row,
    family_to_assignment,
    format_structure,
    hom_formula,
    indicator_lift,
    is_homomorphism,
    magic_family,
    magic_structures,
    parse_structure,
    pvm_family_from_projectors,
    qd_related,
    verify_qhom,
)


def k2():
    return Structure({"E": 2}, ["0", "1"], {"E": [("0", "1"), ("1", "0")]})


def k3():
    vs = ["0", "1", "2"]
    return Structure({"E": 2}, vs, {"E": [(a, b) for a in vs for b in vs if a != b]})


def strongly_satisfies(M, N, F, d, field="R"):
    ops = projector_ops(d, field)
    v = meaningful_eval(hom_formula(M, N), family_to_assignment(F, M, N, d), ops)
    return not isinstance(v, Undefined) and ops.equal(v, ops.one())


def random_3cnf(rng, n_vars, n_clauses):
    names = [f"x{i}" for i in range(1, n_vars + 1)]
    clauses = []
    for _ in range(n_clauses):
        k = rng.randint(1, min(3, n_vars))
        lits = [(v, rng.random() < 0.5) for v in rng.sample(names, k)]
        clauses.append(" | ".join(v if pos else f"~{v}" for v, pos in lits))
    return parse(" & ".join(f"({c})" for c in clauses))


# ---------------------------------------------------------------- structures


def test_structure_validation():
    with pytest.raises(ValueError):
        Structure({"E": 2}, ["a"], {"E": [("a",)]})
    with pytest.raises(ValueError):
        Structure({"E": 2}, ["a"], {"E": [("a", "b")]})
    with pytest.raises(ValueError):
        Structure({}, [])


def test_structure_file_round_trip():
    M, N = magic_structures()
    for s in (M, N, k3()):
        again = parse_structure(format_structure(s, header="pbasat test"))
        assert again == s


def test_k2_homomorphisms():
    assert len(list(classical_homomorphisms(k2(), k2()))) == 2
    assert len(list(classical_homomorphisms(k3(), k2()))) == 0
    assert is_homomorphism({"0": "1", "1": "0"}, k2(), k2())
    assert not is_homomorphism({"0": "1", "1": "1"}, k2(), k2())


# ---------------------------------------------------------------- verify_qhom


def test_single_vertex():
    M = Structure({}, ["v"])
    assert verify_qhom(M, M, {("v", "v"): np.eye(2)}, 2)
    assert not verify_qhom(M, M, {("v", "v"): np.zeros((2, 2))}, 2)


def test_indicator_lifts_of_homomorphisms():
    for M, N in ((k2(), k2()), (k2(), k3()), (k3(), k3())):
        for h in classical_homomorphisms(M, N):
            assert verify_qhom(M, N, indicator_lift(h, M, N, 2), 2)
    h = {"0": "0", "1": "0"}
    r = verify_qhom(k2(), k2(), indicator_lift(h, k2(), k2()), 1)
    assert not r and r.condition == "QH3"


def test_magic_family_is_a_quantum_homomorphism():
    M, N = magic_structures()
    assert not list(classical_homomorphisms(M, N))
    assert verify_qhom(M, N, magic_family(), 4)


def test_conditions_are_reported():
    E = line_projector((1, 0), exact=False)
    F = {("0", "0"): E, ("0", "1"): E, ("1", "0"): np.eye(2) - E, ("1", "1"): E}
    r = verify_qhom(k2(), k2(), F, 2)
    assert not r and r.condition == "QH1"
    G = line_projector((1, 1), exact=False)
    F = {("0", "0"): E, ("0", "1"): np.eye(2) - E, ("1", "0"): G, ("1", "1"): np.eye(2) - G}
    r = verify_qhom(k2(), k2(), F, 2)
    assert not r and r.condition == "QH2"


# ---------------------------------------------------------------- formula bridge


def test_hom_formula_shape():
    one = Structure({}, ["m"])
    tgt = Structure({}, ["n"])
    assert hom_formula(one, tgt) is Var("p_m_n")
    M, N = k3(), k2()
    assert len(variables(hom_formula(M, N))) == 6


def test_hom_formula_satisfiers_are_homomorphisms():
    M, N = k2(), k2()
    f = hom_formula(M, N)
    names = variables(f)
    sols = [a for a in assignments(names) if eval_classical(f, a)]
    homs = [
        {m: n for (m, n), v in assignment_to_family(a, M, N).items() if v}
        for a in sols
    ]
    assert sorted(map(sorted, (h.items() for h in homs))) == sorted(
        map(sorted, (h.items() for h in classical_homomorphisms(M, N)))
    )


def fixture_families():
    E, G = line_projector((1, 0), exact=False), line_projector((1, 1), exact=False)
    eye = np.eye(2)
    out = [
        (Structure({}, ["v"]), Structure({}, ["v"]), {("v", "v"): eye}, 2, "R"),
        (k2(), k2(), {("0", "0"): E, ("0", "1"): eye - E, ("1", "0"): eye - E, ("1", "1"): E}, 2, "R"),
        (k2(), k2(), {("0", "0"): E, ("0", "1"): eye - E, ("1", "0"): E, ("1", "1"): eye - E}, 2, "R"),
        (k2(), k2(), {("0", "0"): E, ("0", "1"): eye - E, ("1", "0"): G, ("1", "1"): eye - G}, 2, "R"),
        (k2(), k3(), indicator_lift({"0": "2", "1": "0"}, k2(), k3(), 2), 2, "R"),
        (k3(), k2(), indicator_lift({"0": "0", "1": "1", "2": "0"}, k3(), k2(), 1), 1, "R"),
    ]
    M, N = magic_structures()
    out.append((M, N, magic_family(), 4, "C"))
    broken = [list(r) for r in standard_magic()]
    broken[2][2] = -broken[2][2]
    out.append((M, N, magic_family(broken), 4, "C"))
    return out


@pytest.mark.parametrize("k", range(8))
def test_qhom_iff_strong_satisfier_on_fixtures(k):
    M, N, F, d, field = fixture_families()[k]
    assert bool(verify_qhom(M, N, F, d)) == strongly_satisfies(M, N, F, d, field)


def test_qh2_gap_counterexample():
    # with a full target relation nothing in the formula forces the two rows to
    # commute, so a strong satisfier need not meet the commeasurability condition
    M = Structure({"R": 2}, ["x", "y"], {"R": [("x", "y")]})
    N = Structure({"R": 2}, ["0", "1"], {"R": list(itertools.product("01", repeat=2))})
    E, G = line_projector((1, 0), exact=False), line_projector((1, 1), exact=False)
    eye = np.eye(2)
    F = {("x", "0"): E, ("x", "1"): eye - E, ("y", "0"): G, ("y", "1"): eye - G}
    assert strongly_satisfies(M, N, F, 2)
    r = verify_qhom(M, N, F, 2)
    assert not r and r.condition == "QH2"


# ---------------------------------------------------------------- CNF structures


def test_cnf_structure_examples():
    V, T = cnf_to_structures(parse("(p | q) & ~p"))
    assert V.signature == {"R_c1": 2, "R_c2": 1}
    assert V.relations["R_c1"] == [("p", "q")]
    assert set(itertools.product("01", repeat=2)) - set(T.relations["R_c1"]) == {("0", "0")}
    assert T.relations["R_c2"] == [("0",)]


def test_cnf_structures_reject_wide_clauses():
    with pytest.raises(ValueError):
        cnf_to_structures(parse("p | q | r | s"))


def test_satisfiability_matches_homomorphisms():
    rng = random.Random(2024)
    for _ in range(40):
        f = random_3cnf(rng, 4, rng.randint(1, 9))
        V, T = cnf_to_structures(f)
        names = variables(f)
        sat = any(eval_classical(f, a) for a in assignments(names))
        assert sat == any(True for _ in classical_homomorphisms(V, T))
        for a in assignments(names):
            F = indicator_lift(assignment_to_hom(a), V, T, 1)
            assert bool(verify_qhom(V, T, F, 1)) == bool(eval_classical(f, a))


def test_commuting_projector_witness_gives_pvm_family():
    f = parse("(x1 | x2) & (~x1 | ~x2) & (x2 | x3)")
    V, T = cnf_to_structures(f)
    # diagonal witness mixing the two classical models x1 x2 x3 = 100+1 and 011
    alpha = {"x1": np.diag([1.0, 0.0]), "x2": np.diag([0.0, 1.0]), "x3": np.diag([1.0, 1.0])}
    ops = projector_ops(2)
    assert ops.equal(meaningful_eval(f, alpha, ops), ops.one())
    assert verify_qhom(V, T, pvm_family_from_projectors(alpha, V), 2)


# ---------------------------------------------------------------- Q_d membership


def test_qd_indicator_tuple():
    eye, zero = np.eye(2), np.zeros((2, 2))
    hs = [{"0": eye, "1": zero}, {"0": zero, "1": eye}]
    assert qd_related(hs, [("0", "1"), ("1", "0")], ["0", "1"], 2)


def test_qd_non_commuting_supports():
    E, G = line_projector((1, 0), exact=False), line_projector((1, 1), exact=False)
    eye = np.eye(2)
    hs = [{"0": E, "1": eye - E}, {"0": G, "1": eye - G}]
    r = qd_related(hs, list(itertools.product("01", repeat=2)), ["0", "1"], 2)
    assert not r and r.condition == "QR1"


def test_qd_empty_relation():
    E = np.diag([1.0, 0.0])
    hs = [{"0": E, "1": np.eye(2) - E}]
    r = qd_related(hs, [], ["0", "1"], 2)
    assert not r and r.condition == "QR2"


def test_qhom_rows_are_related_in_qd():
    M, N = magic_structures()
    F = magic_family()
    for name, tuples in M.relations.items():
        for t in tuples:
            hs = [family_row(F, m, N, 4) for m in t]
            assert qd_related(hs, N.relations[name], N.universe, 4)
