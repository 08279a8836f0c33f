"""Command-line front end.

Exit codes: 0 when the answer is yes, 1 when it is no, 2 on errors or an
exhausted budget. Errors are reported as one JSON line on stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Callable, Sequence

from . import __version__
from .formula import FormulaSyntaxError, parse, pad_formula, to_dimacs, to_text, tseitin
from .pba import Undefined, meaningful_eval, parse_pba, validate_pba

YES, NOFLAG, ERROR = 0, 1, 2
HEADER = f"pbasat {__version__}"


class CLIError(Exception):
    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise CLIError("io", f"cannot read {path}: {exc.strerror}") from None


def _formula(text: str):
    if text.startswith("@"):
        # formula files may carry '#' header lines, as gadget output does
        lines = _read(text[1:]).splitlines()
        text = "\n".join(x for x in lines if not x.lstrip().startswith("#"))
    return parse(text)


def _pba(path: str):
    return validate_pba(parse_pba(_read(path)))


def _write(out: str | None, text: str) -> None:
    """Print or write the finished artifact in one step."""
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    tmp = f"{out}.tmp{os.getpid()}"
    Path(tmp).write_text(text)
    os.replace(tmp, out)


def _assignment(text: str) -> dict[str, str]:
    out = {}
    for part in text.replace(",", " ").split():
        if "=" not in part:
            raise CLIError("usage", f"bad assignment {part!r}; expected name=value")
        k, v = part.split("=", 1)
        out[k] = v
    return out


# ---------------------------------------------------------------- subcommands


def cmd_eval(args) -> int:
    f = _formula(args.formula)
    A = _pba(args.pba)
    named = _assignment(args.assign)
    try:
        alpha = {k: A.elem(v) for k, v in named.items()}
    except KeyError as exc:
        raise CLIError("usage", f"unknown element {exc.args[0]}") from None
    v = meaningful_eval(f, alpha, A)
    if isinstance(v, Undefined):
        print(f"undefined at {to_text(v.at)}")
        return NOFLAG
    print(A.name(v))
    return YES


def cmd_varsat(args) -> int:
    from .solver import NO, varsat, varsat_weak

    f = _formula(args.formula)
    A = _pba(args.pba)
    if args.weak:
        res = varsat_weak(A, f, budget=args.budget)
    else:
        if args.target is None:
            raise CLIError("usage", "give --target or --weak")
        try:
            target = A.elem(args.target)
        except KeyError:
            raise CLIError("usage", f"unknown element {args.target}") from None
        res = varsat(A, target, f, budget=args.budget)
    if res is NO:
        print("no")
        return NOFLAG
    print(" ".join(f"{k}={A.name(v)}" for k, v in res.items()) or "(no variables)")
    return YES


def cmd_allsat(args) -> int:
    from .solver import NO, allsat, format_cert

    f = _formula(args.formula)
    res = allsat(f, budget=args.budget)
    if res is NO:
        print("no")
        return NOFLAG
    text = format_cert(res, HEADER + " certificate for " + to_text(f))
    if args.out:
        _write(args.out, text)
        print(f"yes: certificate written to {args.out}")
    else:
        sys.stdout.write(text)
    return YES


def cmd_cert_verify(args) -> int:
    from .solver import CertFormatError, cert_problems, parse_cert

    f = _formula(args.formula)
    try:
        cert = parse_cert(_read(args.cert))
    except CertFormatError as exc:
        raise CLIError("format", str(exc)) from None
    problems = cert_problems(cert, f)
    if problems:
        print("invalid: " + problems[0])
        return NOFLAG
    print("valid")
    return YES


def cmd_tseitin(args) -> int:
    f = _formula(args.formula)
    _write(args.out, to_dimacs(tseitin(f), HEADER))
    return YES


def cmd_gadget(args) -> int:
    from . import graphs

    kind = args.kind
    ks = graphs.parse_vectors(_read(args.ks)) if args.ks else None
    text: str
    if kind == "phi-g":
        g = graphs.parse_graph(_read(_need(args.graph, "--graph")))
        text = to_text(graphs.formula_of_graph(g))
    elif kind == "basis":
        text = to_text(graphs.basis_formula(_need(args.d, "--d")))
    elif kind == "magic":
        text = to_text(graphs.magic_formula())
    elif kind == "pad":
        text = to_text(pad_formula(_formula(_need(args.input, "a formula")), _need(args.d, "--d")))
    elif kind in ("term-graph", "theta", "vartheta"):
        t = graphs.parse_term(_need(args.input, "a term"))
        if kind == "term-graph":
            g = graphs.term_graph(t)
            _write(args.out, graphs.format_graph(g, HEADER))
            return YES
        if kind == "vartheta":
            text = to_text(graphs.vartheta(t))
        else:
            text = to_text(graphs.theta(t, ks or graphs.load_ks()))
    elif kind == "cke":
        g = graphs.parse_graph(_read(_need(args.graph, "--graph")))
        _write(args.out, graphs.format_graph(graphs.cke(g, ks or graphs.load_ks()), HEADER))
        return YES
    else:  # pragma: no cover - argparse restricts choices
        raise CLIError("usage", f"unknown gadget {kind}")
    _write(args.out, f"# {HEADER}\n{text}\n")
    return YES


def _need(value, what: str):
    if value is None:
        raise CLIError("usage", f"this gadget needs {what}")
    return value


def cmd_ks_check(args) -> int:
    from . import graphs

    vs = graphs.parse_vectors(_read(args.vectors))
    g = graphs.orthogonality_graph(vs)
    facet = graphs.is_facet(g)
    w = graphs.clique_number(g)
    assignment_ok = graphs.verify_orthogonal_assignment(g, vs.canonical_assignment(), 3)
    colouring = graphs.find_nc_colouring(g)
    print(f"vectors: {len(vs)}")
    print(f"edges: {len(g.edges())}")
    print(f"omega: {w}")
    print(f"facet: {'yes' if facet else 'no'}")
    print(f"orthogonal assignment: {'ok' if assignment_ok else 'fails'}")
    print("colouring: " + ("none" if colouring is None else "found"))
    return YES if assignment_ok and colouring is None else NOFLAG


def _sentence(args):
    from .er import build_system, scalarize

    f = _formula(args.formula)
    return f, scalarize(build_system(f, args.mode), args.d, args.field)


def cmd_encode_er(args) -> int:
    from .er import emit_smt

    f, s = _sentence(args)
    note = f"{args.mode} satisfiability of {to_text(f)} in dimension {args.d} over {args.field}"
    _write(args.out, emit_smt(s, note))
    return YES


def cmd_witness_check(args) -> int:
    from .er import check_witness, parse_values, zero_values

    _, s = _sentence(args)
    if args.zero:
        values = zero_values(s)
    elif args.values:
        values = parse_values(_read(args.values))
    else:
        raise CLIError("usage", "give --values FILE or --zero")
    try:
        report = check_witness(s, values, args.eps)
    except KeyError as exc:
        raise CLIError("format", str(exc.args[0])) from None
    print(str(report))
    return YES if report else NOFLAG


def _family(text: str, d: int):
    from .numerics import parse_matrix

    fam = {}
    for lineno, row in enumerate(text.splitlines(), 1):
        row = row.split("#", 1)[0].split()
        if not row:
            continue
        if row[0] != "F" or len(row) != 3 + d * d:
            raise CLIError("format", f"line {lineno}: expected 'F m n' and {d * d} entries")
        fam[(row[1], row[2])] = parse_matrix(row[3:], d)
    return fam


def cmd_qhom_verify(args) -> int:
    import numpy as np

    from .numerics import to_float
    from .qhom import parse_structure, verify_qhom

    M = parse_structure(_read(args.source))
    N = parse_structure(_read(args.target))
    fam = {k: np.asarray(to_float(v)) for k, v in _family(_read(args.family), args.d).items()}
    report = verify_qhom(M, N, fam, args.d, args.eps)
    print(str(report))
    return YES if report else NOFLAG


def cmd_cnf_to_structures(args) -> int:
    from .qhom import cnf_to_structures, format_structure

    V, T = cnf_to_structures(_formula(args.formula))
    vt, tt = format_structure(V, HEADER + " V"), format_structure(T, HEADER + " T")
    if args.out_v and args.out_t:
        _write(args.out_v, vt)
        _write(args.out_t, tt)
    else:
        sys.stdout.write(vt + tt)
    return YES


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pbasat", description="Satisfiability over partial Boolean algebras.")
    p.add_argument("--version", action="version", version=HEADER)
    p.add_argument("--seed", type=int, default=0, help="seed for randomised helpers (unused by deterministic paths)")
    sub = p.add_subparsers(dest="command", required=True)
    formula_help = "formula text, or @FILE to read it from a file"

    def add(name: str, fn: Callable, help: str) -> argparse.ArgumentParser:
        sp = sub.add_parser(name, help=help, description=help)
        sp.set_defaults(fn=fn)
        return sp

    sp = add("eval", cmd_eval, "evaluate a formula in a pBA file under an assignment")
    sp.add_argument("formula", help=formula_help)
    sp.add_argument("--pba", required=True, help="pBA file")
    sp.add_argument("--assign", default="", help="assignment such as 'p=a,q=1'")

    sp = add("varsat", cmd_varsat, "find a substitution sending the formula to a target element")
    sp.add_argument("formula", help=formula_help)
    sp.add_argument("--pba", required=True)
    sp.add_argument("--target", help="element name")
    sp.add_argument("--weak", action="store_true", help="accept any nonzero value")
    sp.add_argument("--budget", type=int, default=10_000_000)

    sp = add("allsat", cmd_allsat, "decide satisfiability in some non-trivial pBA; emit a certificate")
    sp.add_argument("formula", help=formula_help)
    sp.add_argument("--out", help="certificate file (default: stdout)")
    sp.add_argument("--budget", type=int, default=10_000_000)

    sp = add("cert-verify", cmd_cert_verify, "check a certificate against a formula")
    sp.add_argument("formula", help=formula_help)
    sp.add_argument("cert")

    sp = add("tseitin", cmd_tseitin, "emit the Tseitin CNF as DIMACS")
    sp.add_argument("formula", help=formula_help)
    sp.add_argument("--out")

    sp = add("gadget", cmd_gadget, "build a gadget formula or graph")
    sp.add_argument("kind", choices=["phi-g", "basis", "cke", "term-graph", "theta", "magic", "vartheta", "pad"])
    sp.add_argument("input", nargs="?", help="term (term-graph, theta, vartheta) or formula (pad)")
    sp.add_argument("--graph", help="graph file (phi-g, cke)")
    sp.add_argument("--ks", help="vector file (cke, theta); defaults to the shipped set")
    sp.add_argument("--d", type=int, help="dimension (basis, pad)")
    sp.add_argument("--out")

    sp = add("ks-check", cmd_ks_check, "check that a vector file is a Kochen-Specker set")
    sp.add_argument("vectors")

    for name, fn, help in (
        ("encode-er", cmd_encode_er, "write the real-arithmetic sentence as SMT-LIB2"),
        ("witness-check", cmd_witness_check, "substitute values into the real-arithmetic sentence"),
    ):
        sp = add(name, fn, help)
        sp.add_argument("formula", help=formula_help)
        sp.add_argument("--d", type=int, required=True)
        sp.add_argument("--field", choices=["R", "C"], default="R")
        sp.add_argument("--mode", choices=["strong", "weak"], default="strong")
        if name == "encode-er":
            sp.add_argument("--out")
        else:
            sp.add_argument("--values", help="file of 'name value' lines")
            sp.add_argument("--zero", action="store_true", help="use the all-zeros assignment")
            sp.add_argument("--eps", type=float, default=1e-9)

    sp = add("qhom-verify", cmd_qhom_verify, "check a projector family against QH1-QH3")
    sp.add_argument("source", help="structure file M")
    sp.add_argument("target", help="structure file N")
    sp.add_argument("family", help="file of 'F m n' lines with d*d row-major entries")
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--eps", type=float, default=1e-9)

    sp = add("cnf-to-structures", cmd_cnf_to_structures, "build the structures V and T of a CNF")
    sp.add_argument("formula", help=formula_help)
    sp.add_argument("--out-v")
    sp.add_argument("--out-t")
    return p


def _error(kind: str, message: str) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")
    return ERROR


def main(argv: Sequence[str] | None = None) -> int:
    from .solver import BudgetExceeded

    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and ERROR
    for flag in ("d", "budget"):
        v = getattr(args, flag, None)
        if v is not None and v < 1:
            return _error("usage", f"--{flag} must be positive")
    try:
        return args.fn(args)
    except CLIError as exc:
        return _error(exc.kind, str(exc))
    except FormulaSyntaxError as exc:
        return _error("syntax", str(exc))
    except BudgetExceeded as exc:
        return _error("budget", str(exc))
    except (ValueError, KeyError) as exc:
        return _error("input", str(exc))


def main_exit() -> None:
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    main_exit()
