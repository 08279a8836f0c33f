import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pbasat.er import (
    build_system,
    check_witness,
    emit_smt,
    flatten_witness,
    format_values,
    parse_values,
    poly_degree,
    scalarize,
    zero_values,
)
from pbasat.formula import AND, NOT, OR, TOP, VAR, parse, subformulas, variables
from pbasat.graphs import basis_formula, magic_formula
from pbasat.numerics import line_projector, magic_assignment, projector_ops


def standard_witness(d):
    return {f"p{k + 1}": line_projector([1 if i == k else 0 for i in range(d)], exact=False) for k in range(d)}


def kinds(f):
    subs = subformulas(f)
    return {k: sum(g.kind == k for g in subs) for k in (TOP, VAR, NOT, AND, OR)}


def test_system_of_a_variable():
    s = build_system(parse("p"))
    assert s.text().splitlines() == ["(P_p * P_p) = P_p", "P_p = P_p^T", "P_p = 1"]
    assert s.variables == ["P_p"]


def test_system_of_a_negation():
    s = build_system(parse("~p"))
    assert "Z_1 = (1 + (0 - P_p))" in s.text().splitlines()


@pytest.mark.parametrize("text", ["p", "~p", "p & ~q", "(p | q) & ~(p & r)", "T & ~~p"])
def test_equation_count(text):
    f = parse(text)
    k = kinds(f)
    expected = 2 * k[VAR] + 2 * (k[AND] + k[OR]) + k[NOT] + k[TOP] + 1
    assert build_system(f).constraint_count == expected


def test_identity_unfolding():
    s = scalarize(build_system(parse("p")), 2, "R")
    assert [a.smt() for a in s.atoms[:4]] == [
        "(= P_p_1_1 1)",
        "(= P_p_1_2 0)",
        "(= P_p_2_1 0)",
        "(= P_p_2_2 1)",
    ]


def test_idempotent_scalar():
    s = scalarize(build_system(parse("p")), 1, "R")
    idem = [a for a in s.atoms if a.degree() == 2]
    assert [a.smt() for a in idem] == ["(= (* P_p_1_1 P_p_1_1) P_p_1_1)"]
    assert "(assert (= (* P_p_1_1 P_p_1_1) P_p_1_1))" in emit_smt(s)
    for x, ok in ((0.0, True), (1.0, True), (0.5, False)):
        assert idem[0].holds({"P_p_1_1": x}, 1e-9) == ok


@pytest.mark.parametrize("text", ["p", "p & ~q", "(p | q) & ~(p & r)"])
def test_variable_count(text):
    f = parse(text)
    n = len(variables(f))
    m = len([g for g in subformulas(f) if g.kind != VAR])
    assert len(scalarize(build_system(f), 3, "R").variables) == 9 * (n + m)
    assert len(scalarize(build_system(f), 3, "C").variables) == 18 * (n + m)


def test_degree_bound():
    for f in (basis_formula(3), magic_formula()):
        s = scalarize(build_system(f), 2, "C")
        assert s.max_degree() <= 2
        assert all(poly_degree(a.lhs_poly) <= 2 for a in s.atoms)


def test_basis_witness_round_trip():
    f = basis_formula(3)
    sys_ = build_system(f)
    s = scalarize(sys_, 3, "R")
    assert check_witness(s, flatten_witness(sys_, standard_witness(3), projector_ops(3)))
    report = check_witness(s, zero_values(s))
    assert not report and report.index == 0
    assert report.atom.origin.endswith("= 1")


def test_magic_witness_round_trip():
    mu = magic_formula()
    sys_ = build_system(mu)
    s = scalarize(sys_, 4, "C")
    alpha = magic_assignment(as_projectors=True)
    assert check_witness(s, flatten_witness(sys_, alpha, projector_ops(4, "C"), "C"))
    assert not check_witness(s, zero_values(s))


def test_weak_and_strong_diverge_on_rank_one():
    f = parse("p")
    alpha = {"p": line_projector((1, 0), exact=False)}
    ops = projector_ops(2)
    strong, weak = build_system(f, "strong"), build_system(f, "weak")
    assert not check_witness(scalarize(strong, 2, "R"), flatten_witness(strong, alpha, ops))
    assert check_witness(scalarize(weak, 2, "R"), flatten_witness(weak, alpha, ops))
    assert not check_witness(scalarize(weak, 2, "R"), flatten_witness(weak, {"p": np.zeros((2, 2))}, ops))


def test_contradiction_has_no_zero_witness():
    s = scalarize(build_system(parse("p & ~p")), 3, "R")
    assert not check_witness(s, zero_values(s))


def test_emission_is_deterministic_and_headed():
    f = parse("(p | q) & ~p")
    a = emit_smt(scalarize(build_system(f), 2, "C"), comment="test")
    b = emit_smt(scalarize(build_system(parse("(p | q) & ~p")), 2, "C"), comment="test")
    assert a == b
    lines = a.splitlines()
    assert lines[0] == "; pbasat 0.1.0" and "(set-logic QF_NRA)" in lines and lines[-1] == "(check-sat)"
    assert sum(x.startswith("(declare-const") for x in lines) == 2 * 4 * 5


def test_values_round_trip():
    s = scalarize(build_system(basis_formula(2)), 2, "R")
    vals = flatten_witness(build_system(basis_formula(2)), standard_witness(2), projector_ops(2))
    again = parse_values(format_values(vals))
    assert again == pytest.approx(vals)
    assert check_witness(s, again)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 20))
def test_random_commuting_witnesses_round_trip(seed):
    # diagonal projectors commute, so any formula evaluates meaningfully on them
    from pbasat.pba import meaningful_eval

    rng = np.random.default_rng(seed)
    f = parse("(p | q) & ~(p & r) | ~q")
    d = 3
    alpha = {n: np.diag(rng.integers(0, 2, size=d).astype(float)) for n in "pqr"}
    ops = projector_ops(d)
    target_one = ops.equal(meaningful_eval(f, alpha, ops), ops.one())
    sys_ = build_system(f)
    assert bool(check_witness(scalarize(sys_, d, "R"), flatten_witness(sys_, alpha, ops))) == target_one
