import pytest

from pbasat.formula import And, Not, Or, Top, Var
from pbasat.numerics import line_projector, projector_ops
from pbasat.pba import close_family, glued_six, standard_algebra


def formulas_upto(max_connectives, names):
    """Every formula over T and ``names`` with at most ``max_connectives`` connectives."""
    by_size = {0: [Top()] + [Var(n) for n in names]}
    for c in range(1, max_connectives + 1):
        out = [Not(f) for f in by_size[c - 1]]
        for a in range(c):
            for x in by_size[a]:
                for y in by_size[c - 1 - a]:
                    out.append(And(x, y))
                    out.append(Or(x, y))
        by_size[c] = out
    return [f for c in range(max_connectives + 1) for f in by_size[c]]


def proj2():
    # three pairwise non-commuting lines in the plane and everything they generate
    gens = [line_projector(v) for v in [(1, 0), (1, 1), (1, 2)]]
    return close_family(projector_ops(2, exact=True), gens)


def fixture_algebras():
    return {
        "two": standard_algebra("two"),
        "four": standard_algebra("four"),
        "glued": glued_six(),
        "proj2": proj2(),
    }


@pytest.fixture(scope="session")
def algebras():
    return fixture_algebras()


ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
