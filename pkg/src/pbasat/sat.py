"""Classical DPLL with unit propagation (two watched literals)."""

from __future__ import annotations

from typing import Sequence

from .formula import Formula, cnf_clauses


class Unsat:
    """Singleton marker for an unsatisfiable CNF."""

    _instance: "Unsat | None" = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "UNSAT"

    def __bool__(self) -> bool:
        return False


UNSAT = Unsat()


def solve_clauses(n: int, clauses: Sequence[Sequence[int]]) -> list[bool] | None:
    """Model over variables 1..n (index 0 unused) or None.

    Branching picks the lowest-index unassigned variable and tries True
    first; unconstrained variables end up False.
    """
    assign: list[bool | None] = [None] * (n + 1)
    trail: list[int] = []
    watches: dict[int, list[list[int]]] = {}
    occurs: list[list[list[int]]] = [[] for _ in range(n + 1)]
    units: list[int] = []
    for raw in clauses:
        lits: list[int] = []
        tautology = False
        for lit in raw:
            if -lit in lits:
                tautology = True
                break
            if lit not in lits:
                lits.append(lit)
        if tautology:
            continue
        if not lits:
            return None
        for lit in lits:
            occurs[abs(lit)].append(lits)
        if len(lits) == 1:
            units.append(lits[0])
            continue
        watches.setdefault(lits[0], []).append(lits)
        watches.setdefault(lits[1], []).append(lits)

    def value(lit: int) -> bool | None:
        a = assign[abs(lit)]
        if a is None:
            return None
        return a if lit > 0 else not a

    def enqueue(lit: int) -> bool:
        v = value(lit)
        if v is not None:
            return v
        assign[abs(lit)] = lit > 0
        trail.append(lit)
        return True

    qhead = 0

    def propagate() -> bool:
        nonlocal qhead
        while qhead < len(trail):
            false_lit = -trail[qhead]
            qhead += 1
            watching = watches.get(false_lit)
            if not watching:
                continue
            keep: list[list[int]] = []
            conflict = False
            i = 0
            while i < len(watching):
                c = watching[i]
                i += 1
                if conflict:
                    keep.append(c)
                    continue
                if c[0] == false_lit:
                    c[0], c[1] = c[1], c[0]
                if value(c[0]) is True:
                    keep.append(c)
                    continue
                moved = False
                for k in range(2, len(c)):
                    if value(c[k]) is not False:
                        c[1], c[k] = c[k], c[1]
                        watches.setdefault(c[1], []).append(c)
                        moved = True
                        break
                if moved:
                    continue
                keep.append(c)
                if not enqueue(c[0]):
                    conflict = True
            watches[false_lit] = keep
            if conflict:
                return False
        return True

    for u in units:
        if not enqueue(u):
            return None
    if not propagate():
        return None

    # decision stack entries: (variable, trail length before decision, flipped)
    def needed(v: int) -> bool:
        return any(not any(value(lit) is True for lit in c) for c in occurs[v])

    decisions: list[tuple[int, int, bool]] = []
    next_var = 1
    while True:
        # variables whose clauses are all satisfied stay unassigned (False)
        while next_var <= n and (assign[next_var] is not None or not needed(next_var)):
            next_var += 1
        if next_var > n:
            return [bool(a) for a in assign]
        decisions.append((next_var, len(trail), False))
        enqueue(next_var)
        ok = propagate()
        while not ok:
            while decisions and decisions[-1][2]:
                _, mark, _ = decisions.pop()
                _undo(assign, trail, mark)
            if not decisions:
                return None
            var, mark, _ = decisions.pop()
            _undo(assign, trail, mark)
            qhead = len(trail)
            decisions.append((var, mark, True))
            enqueue(-var)
            ok = propagate()
            next_var = 1


def _undo(assign: list, trail: list[int], mark: int) -> None:
    while len(trail) > mark:
        assign[abs(trail.pop())] = None


def sat_classical(cnf: Formula) -> dict[str, int] | Unsat:
    """Satisfying 0/1 assignment of a CNF formula, or UNSAT.

    Variables are numbered by first occurrence. Raises NotCNF otherwise.
    """
    numbering: dict[str, int] = {}
    clauses: list[list[int]] = []
    for clause in cnf_clauses(cnf):
        lits: list[int] = []
        satisfied = False
        for name, pol in clause:
            if name is None:
                if pol:
                    satisfied = True
                continue
            k = numbering.setdefault(name, len(numbering) + 1)
            lits.append(k if pol else -k)
        if not satisfied:
            clauses.append(lits)
    model = solve_clauses(len(numbering), clauses)
    if model is None:
        return UNSAT
    return {name: int(model[k]) for name, k in numbering.items()}
