"""Propositional formulas over the connectives T, ~, | and &.

Nodes are hash-consed: two formulas are structurally equal exactly when
they are the same object, so equality and hashing are O(1) and deep
formulas never hit the recursion limit through ``__eq__``.
"""

from __future__ import annotations

import itertools
import re
from typing import Iterable, Iterator, Mapping

TOP = "top"
VAR = "var"
NOT = "not"
OR = "or"
AND = "and"

_IDENT = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")


class Formula:
    """Immutable formula node. Build with Top(), Var(), Not(), Or(), And()."""

    __slots__ = ("kind", "name", "children", "_size", "__weakref__")
    _table: dict[tuple, "Formula"] = {}

    kind: str
    name: str | None
    children: tuple["Formula", ...]

    def __new__(cls, kind: str, name: str | None = None, children: tuple = ()):
        key = (kind, name, tuple(id(c) for c in children))
        node = cls._table.get(key)
        if node is None:
            node = object.__new__(cls)
            object.__setattr__(node, "kind", kind)
            object.__setattr__(node, "name", name)
            object.__setattr__(node, "children", children)
            object.__setattr__(node, "_size", 1 + sum(c._size for c in children))
            cls._table[key] = node
        return node

    def __setattr__(self, key, value):
        raise AttributeError("Formula is immutable")

    def __reduce__(self):
        return (Formula, (self.kind, self.name, self.children))

    @property
    def size(self) -> int:
        """Number of nodes in the tree (counting repeated subtrees)."""
        return self._size

    @property
    def left(self) -> "Formula":
        return self.children[0]

    @property
    def right(self) -> "Formula":
        return self.children[1]

    @property
    def child(self) -> "Formula":
        return self.children[0]

    def is_binary(self) -> bool:
        return self.kind in (OR, AND)

    def __str__(self) -> str:
        return to_text(self)

    def __repr__(self) -> str:
        return f"Formula({to_text(self)!r})"

    def __and__(self, other: "Formula") -> "Formula":
        return And(self, other)

    def __or__(self, other: "Formula") -> "Formula":
        return Or(self, other)

    def __invert__(self) -> "Formula":
        return Not(self)


def Top() -> Formula:
    return Formula(TOP)


def Var(name: str) -> Formula:
    if not isinstance(name, str) or not _IDENT.match(name):
        raise ValueError(f"invalid variable name {name!r}")
    return Formula(VAR, name)


def Not(f: Formula) -> Formula:
    return Formula(NOT, None, (f,))


def Or(a: Formula, b: Formula) -> Formula:
    return Formula(OR, None, (a, b))


def And(a: Formula, b: Formula) -> Formula:
    return Formula(AND, None, (a, b))


def Bottom() -> Formula:
    return Not(Top())


def Xor(a: Formula, b: Formula) -> Formula:
    return Or(And(a, Not(b)), And(Not(a), b))


def Iff(a: Formula, b: Formula) -> Formula:
    return Or(And(a, b), And(Not(a), Not(b)))


def Implies(a: Formula, b: Formula) -> Formula:
    return Or(Not(a), b)


def _balanced(items: list[Formula], op) -> Formula:
    # Split with the larger half on the left so that up to three items
    # come out left-associated, matching what the parser produces.
    if len(items) == 1:
        return items[0]
    mid = (len(items) + 1) // 2
    return op(_balanced(items[:mid], op), _balanced(items[mid:], op))


def conj(items: Iterable[Formula]) -> Formula:
    """Conjunction of ``items``; T when empty. Long lists give a balanced tree."""
    items = list(items)
    if not items:
        return Top()
    return _balanced(items, And)


def disj(items: Iterable[Formula]) -> Formula:
    """Disjunction of ``items``; ~T when empty."""
    items = list(items)
    if not items:
        return Bottom()
    return _balanced(items, Or)


def leq_formula(p: Formula, q: Formula) -> Formula:
    """The order formula (p & q) <-> p."""
    return Iff(And(p, q), p)


# ---------------------------------------------------------------- traversal


def subformulas(f: Formula) -> list[Formula]:
    """Structurally distinct subformulas in post-order (children first)."""
    out: list[Formula] = []
    seen: set[int] = set()
    stack: list[tuple[Formula, bool]] = [(f, False)]
    while stack:
        node, expanded = stack.pop()
        if id(node) in seen:
            continue
        if expanded or not node.children:
            seen.add(id(node))
            out.append(node)
            continue
        stack.append((node, True))
        for c in reversed(node.children):
            if id(c) not in seen:
                stack.append((c, False))
    return out


def variables(f: Formula) -> list[str]:
    """Variable names in order of first occurrence (left to right)."""
    names: list[str] = []
    seen: set[str] = set()
    for g in subformulas(f):
        if g.kind == VAR and g.name not in seen:
            seen.add(g.name)
            names.append(g.name)
    return names


def connective_count(f: Formula) -> int:
    return sum(1 for _ in _nodes(f) if _.kind in (NOT, OR, AND))


def _nodes(f: Formula) -> Iterator[Formula]:
    stack = [f]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(node.children)


def conjuncts(f: Formula) -> list[Formula]:
    """Flatten the top-level &-spine into its conjuncts, left to right."""
    out: list[Formula] = []
    stack = [f]
    while stack:
        node = stack.pop()
        if node.kind == AND:
            stack.append(node.right)
            stack.append(node.left)
        else:
            out.append(node)
    return out


def disjuncts(f: Formula) -> list[Formula]:
    out: list[Formula] = []
    stack = [f]
    while stack:
        node = stack.pop()
        if node.kind == OR:
            stack.append(node.right)
            stack.append(node.left)
        else:
            out.append(node)
    return out


def rename(f: Formula, mapping: Mapping[str, str]) -> Formula:
    """Rename variables; names missing from ``mapping`` are kept."""
    memo: dict[Formula, Formula] = {}
    for g in subformulas(f):
        if g.kind == VAR:
            memo[g] = Var(mapping.get(g.name, g.name))
        elif g.kind == TOP:
            memo[g] = g
        elif g.kind == NOT:
            memo[g] = Not(memo[g.child])
        else:
            memo[g] = Formula(g.kind, None, (memo[g.left], memo[g.right]))
    return memo[f]


# ---------------------------------------------------------------- printing

_SYMBOL = {OR: "|", AND: "&"}


def to_text(f: Formula) -> str:
    """Fully parenthesised text that parses back to the same formula."""
    memo: dict[Formula, str] = {}
    for g in subformulas(f):
        if g.kind == TOP:
            memo[g] = "T"
        elif g.kind == VAR:
            memo[g] = g.name
        elif g.kind == NOT:
            memo[g] = "~" + memo[g.child]
        else:
            memo[g] = f"({memo[g.left]} {_SYMBOL[g.kind]} {memo[g.right]})"
    return memo[f]


# ---------------------------------------------------------------- parsing


class FormulaSyntaxError(ValueError):
    """Raised with the byte offset of the offending token."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


_TOKEN = re.compile(
    r"\s*(?:(?P<op><->|->|[~&|^()])|(?P<ident>[A-Za-z][A-Za-z0-9_]*)|(?P<bad>\S))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:  # only trailing whitespace left
            break
        start = m.start(m.lastgroup)
        if m.lastgroup == "bad":
            raise FormulaSyntaxError(f"unknown operator token {m.group('bad')!r}", start)
        kind = "op" if m.lastgroup == "op" else "ident"
        tokens.append((kind, m.group(m.lastgroup), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.i]

    def take(self) -> tuple[str, str, int]:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str) -> None:
        kind, val, off = self.take()
        if val != value or kind != "op":
            raise FormulaSyntaxError(f"expected {value!r}, found {val or 'end of input'!r}", off)

    def chain(self, symbol: str, sub, combine) -> Formula:
        f = sub()
        while self.peek()[0] == "op" and self.peek()[1] == symbol:
            self.take()
            f = combine(f, sub())
        return f

    def form(self) -> Formula:
        return self.chain("<->", self.imp, Iff)

    def imp(self) -> Formula:
        return self.chain("->", self.xor, Implies)

    def xor(self) -> Formula:
        return self.chain("^", self.disj, Xor)

    def disj(self) -> Formula:
        return self.chain("|", self.conj, Or)

    def conj(self) -> Formula:
        return self.chain("&", self.lit, And)

    def lit(self) -> Formula:
        kind, val, off = self.take()
        if kind == "op" and val == "~":
            return Not(self.lit())
        if kind == "op" and val == "(":
            f = self.form()
            self.expect(")")
            return f
        if kind == "ident":
            return Top() if val == "T" else Var(val)
        raise FormulaSyntaxError(f"unexpected {val or 'end of input'!r}", off)


def parse(text: str) -> Formula:
    """Parse formula source; derived connectives are expanded on the fly."""
    p = _Parser(text)
    f = p.form()
    kind, val, off = p.peek()
    if kind != "end":
        raise FormulaSyntaxError(f"unexpected {val!r}", off)
    return f


# ---------------------------------------------------------------- semantics


def eval_classical(f: Formula, assignment: Mapping[str, int]) -> int:
    """Two-valued evaluation; raises KeyError naming an unbound variable."""
    val: dict[Formula, int] = {}
    for g in subformulas(f):
        if g.kind == TOP:
            val[g] = 1
        elif g.kind == VAR:
            if g.name not in assignment:
                raise KeyError(f"no value for variable {g.name!r}")
            val[g] = 1 if assignment[g.name] else 0
        elif g.kind == NOT:
            val[g] = 1 - val[g.child]
        elif g.kind == AND:
            val[g] = val[g.left] & val[g.right]
        else:
            val[g] = val[g.left] | val[g.right]
    return val[f]


def assignments(names: list[str]) -> Iterator[dict[str, int]]:
    for bits in itertools.product((0, 1), repeat=len(names)):
        yield dict(zip(names, bits))


def is_classically_satisfiable(f: Formula) -> bool:
    """Truth-table check; only sensible for a handful of variables."""
    names = variables(f)
    return any(eval_classical(f, a) for a in assignments(names))


# ---------------------------------------------------------------- transforms


def fresh_names(prefix: str, count: int, taken: Iterable[str], start: int = 1) -> list[str]:
    """``count`` names ``<prefix><k>`` avoiding ``taken``; the prefix grows on clash."""
    taken = set(taken)
    while True:
        names = [f"{prefix}{k}" for k in range(start, start + count)]
        if not taken.intersection(names):
            return names
        prefix += "_"


def tseitin(f: Formula) -> Formula:
    """Equisatisfiable CNF: q_f & clauses, one fresh q per non-variable subformula."""
    return tseitin_parts(f)[0]


def tseitin_parts(f: Formula) -> tuple[Formula, list[Formula], dict[Formula, Formula]]:
    """Return (cnf, clause list, map from subformula to its literal)."""
    if f.kind in (TOP, VAR):
        return f, [], {f: f}
    subs = subformulas(f)
    inner = [g for g in subs if g.kind not in (TOP, VAR)]
    names = fresh_names("q", len(inner), variables(f))
    v: dict[Formula, Formula] = {}
    it = iter(names)
    for g in subs:
        v[g] = g if g.kind in (TOP, VAR) else Var(next(it))
    clauses: list[Formula] = []
    for g in inner:
        x = v[g]
        if g.kind == NOT:
            y = v[g.child]
            clauses += [Or(Not(x), Not(y)), Or(x, y)]
        elif g.kind == OR:
            y, z = v[g.left], v[g.right]
            clauses += [Or(Or(Not(x), y), z), Or(x, Not(y)), Or(x, Not(z))]
        else:
            y, z = v[g.left], v[g.right]
            clauses += [Or(Or(x, Not(y)), Not(z)), Or(Not(x), y), Or(Not(x), z)]
    return conj([v[f]] + clauses), clauses, v


def _literal_name(lit: Formula) -> tuple[str | None, bool]:
    if lit.kind == NOT:
        inner = lit.child
        if inner.kind == VAR:
            return inner.name, False
        if inner.kind == TOP:
            return None, False
    elif lit.kind == VAR:
        return lit.name, True
    elif lit.kind == TOP:
        return None, True
    raise ValueError(f"not a literal: {to_text(lit)}")


class NotCNF(ValueError):
    pass


def cnf_clauses(f: Formula) -> list[list[tuple[str | None, bool]]]:
    """Clauses as lists of (name, polarity); name None stands for T."""
    out = []
    for c in conjuncts(f):
        clause = []
        for lit in disjuncts(c):
            try:
                clause.append(_literal_name(lit))
            except ValueError as exc:
                raise NotCNF(str(exc)) from None
        out.append(clause)
    return out


def to_dimacs(f: Formula, header: str | None = None) -> str:
    """DIMACS text for a CNF formula; variables numbered by first occurrence."""
    numbering: dict[str, int] = {}
    rows: list[str] = []
    for clause in cnf_clauses(f):
        if any(name is None and pol for name, pol in clause):
            continue  # contains T
        lits = []
        for name, pol in clause:
            if name is None:
                continue  # ~T contributes nothing
            k = numbering.setdefault(name, len(numbering) + 1)
            lits.append(str(k if pol else -k))
        rows.append(" ".join(lits + ["0"]))
    lines = []
    if header:
        lines.append(f"c {header}")
    for name, k in numbering.items():
        lines.append(f"c var {k} {name}")
    lines.append(f"p cnf {len(numbering)} {len(rows)}")
    lines.extend(rows)
    return "\n".join(lines) + "\n"


def scaffold(f: Formula, cnf: bool = False) -> Formula:
    """f & psi, where psi forces every pair of variables to be commeasurable."""
    names = sorted(variables(f))
    parts = []
    for a, b in itertools.combinations(names, 2):
        p, q = Var(a), Var(b)
        if cnf:
            parts.append(Or(Not(p), Or(p, q)))
            parts.append(Or(Not(q), Or(q, p)))
        else:
            parts.append(
                Or(Or(Or(And(p, q), And(Not(p), q)), And(p, Not(q))), And(Not(p), Not(q)))
            )
    if not parts:
        return f
    return And(f, conj(parts))


class NameCollision(ValueError):
    pass


def pad_formula(f: Formula, d: int) -> Formula:
    """Dimension-padding formula with fresh q1..q_{d+1}."""
    from .graphs import basis_formula

    if d < 1:
        raise ValueError("d must be at least 1")
    names = variables(f)
    qs = [f"q{k}" for k in range(1, d + 2)]
    clash = sorted(set(names) & set(qs))
    if clash:
        raise NameCollision(f"variables {clash} collide with padding variables")
    last = Not(Var(qs[-1]))
    parts = [basis_formula(d + 1, prefix="q")]
    parts += [leq_formula(Var(p), last) for p in sorted(names)]
    parts.append(Iff(f, last))
    return conj(parts)
