import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pbasat.formula import (
    And,
    FormulaSyntaxError,
    NameCollision,
    Not,
    NotCNF,
    Or,
    Top,
    Var,
    assignments,
    cnf_clauses,
    conj,
    connective_count,
    disj,
    eval_classical,
    is_classically_satisfiable,
    pad_formula,
    parse,
    rename,
    scaffold,
    subformulas,
    to_dimacs,
    to_text,
    tseitin,
    tseitin_parts,
    variables,
)

NAMES = ["p", "q", "r"]


def formula_strategy(names=NAMES, max_leaves=12):
    leaves = st.one_of(st.just(Top()), st.sampled_from(names).map(Var))
    return st.recursive(
        leaves,
        lambda kids: st.one_of(
            kids.map(Not),
            st.tuples(kids, kids).map(lambda ab: And(*ab)),
            st.tuples(kids, kids).map(lambda ab: Or(*ab)),
        ),
        max_leaves=max_leaves,
    )


def test_hash_consing_gives_identity():
    assert And(Var("p"), Var("q")) is And(Var("p"), Var("q"))
    assert parse("p & q") is And(Var("p"), Var("q"))


def test_precedence_and_derived_connectives():
    assert parse("p | q & r") is Or(Var("p"), And(Var("q"), Var("r")))
    assert parse("~p & q") is And(Not(Var("p")), Var("q"))
    p, q = Var("p"), Var("q")
    assert parse("p -> q") is Or(Not(p), q)
    for a in assignments(["p", "q"]):
        assert eval_classical(parse("p <-> q"), a) == int(a["p"] == a["q"])
        assert eval_classical(parse("p ^ q"), a) == int(a["p"] != a["q"])


def test_top_and_bottom():
    assert eval_classical(parse("T"), {}) == 1
    assert eval_classical(parse("~T"), {}) == 0


@pytest.mark.parametrize("text, offset", [("p &", 3), ("(p", 2), ("p $ q", 2), ("p q", 2)])
def test_syntax_errors_report_offset(text, offset):
    with pytest.raises(FormulaSyntaxError) as info:
        parse(text)
    assert info.value.offset == offset


@given(formula_strategy())
def test_print_parse_round_trip(f):
    assert parse(to_text(f)) is f


@given(formula_strategy())
def test_subformulas_are_post_order_and_distinct(f):
    subs = subformulas(f)
    assert subs[-1] is f
    assert len(set(map(id, subs))) == len(subs)
    seen = set()
    for g in subs:
        assert all(id(c) in seen for c in g.children)
        seen.add(id(g))


def test_unbound_variable_is_an_error():
    with pytest.raises(KeyError):
        eval_classical(parse("p & q"), {"p": 1})


def test_conj_disj_are_balanced():
    xs = [Var(f"x{i}") for i in range(8)]
    c = conj(xs)
    # balanced: depth log2(8) = 3 binary levels
    depth = lambda g: 0 if not g.children else 1 + max(depth(k) for k in g.children)  # noqa: E731
    assert depth(c) == 3
    assert conj([]) is Top()
    assert eval_classical(disj([]), {}) == 0


def test_rename():
    f = parse("p & ~q")
    assert rename(f, {"p": "a"}) is parse("a & ~q")


def test_connective_count():
    assert connective_count(parse("~(p & q) | r")) == 3
    assert connective_count(Var("p")) == 0


# ---------------------------------------------------------------- tseitin


def test_tseitin_is_cnf_with_fresh_names():
    f = parse("q1 & ~(q1 | p)")
    t = tseitin(f)
    cnf_clauses(t)  # does not raise
    fresh = set(variables(t)) - set(variables(f))
    assert fresh and not fresh & {"q1", "p"}


def test_tseitin_of_literal_is_itself():
    assert tseitin(Var("p")) is Var("p")
    assert tseitin(Top()) is Top()


@settings(max_examples=150)
@given(formula_strategy())
def test_tseitin_equisatisfiable_classically(f):
    assert is_classically_satisfiable(f) == is_classically_satisfiable(tseitin(f))


@settings(max_examples=80)
@given(formula_strategy())
def test_tseitin_models_extend(f):
    # every model of f extends, through the subformula literals, to a model of tseitin(f)
    cnf, _, lit = tseitin_parts(f)
    names = variables(f)
    for a in assignments(names):
        if not eval_classical(f, a):
            continue
        ext = dict(a)
        for g, x in lit.items():
            if x.kind == "var" and x.name not in ext:
                ext[x.name] = eval_classical(g, a)
        assert eval_classical(cnf, ext) == 1


def test_not_cnf_rejected():
    with pytest.raises(NotCNF):
        cnf_clauses(parse("~(p & q)"))


def test_dimacs_output():
    text = to_dimacs(parse("(p | ~q) & q"), header="pbasat test")
    lines = text.splitlines()
    assert lines[0] == "c pbasat test"
    assert "p cnf 2 2" in lines
    assert lines[-2:] == ["1 -2 0", "2 0"]


# ---------------------------------------------------------------- scaffold, padding


@settings(max_examples=60)
@given(formula_strategy())
def test_scaffold_preserves_classical_models(f):
    for cnf in (False, True):
        s = scaffold(f, cnf=cnf)
        for a in assignments(variables(f)):
            assert eval_classical(s, a) == eval_classical(f, a)


def test_scaffold_cnf_mode_is_cnf():
    s = scaffold(parse("p & q & r"), cnf=True)
    assert len(cnf_clauses(s)) == 3 + 6


def test_pad_formula_classical_models():
    # in 2 either q_{d+1} = 1 with every p = 0, or q_{d+1} = 0 and f true
    for f in (Top(), parse("p & ~p"), parse("p | q")):
        assert is_classically_satisfiable(pad_formula(f, 2))


def test_pad_formula_name_collision():
    with pytest.raises(NameCollision):
        pad_formula(parse("q1 & p"), 2)


def test_pad_formula_shape():
    f = pad_formula(parse("p"), 2)
    assert set(variables(f)) == {"p", "q1", "q2", "q3"}
    assert eval_classical(f, {"p": 0, "q1": 1, "q2": 0, "q3": 0}) == 0
    assert eval_classical(f, {"p": 1, "q1": 1, "q2": 0, "q3": 0}) == 1
