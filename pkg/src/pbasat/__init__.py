"""Satisfiability over partial Boolean algebras and its quantum gadgets."""

__version__ = "0.1.0"

from .formula import Formula, parse, to_text, eval_classical, tseitin, scaffold, pad_formula  # noqa: E402
from .pba import FinitePBA, Undefined, meaningful_eval, leq, validate_pba, standard_algebra  # noqa: E402
from .sat import UNSAT, sat_classical  # noqa: E402
from .solver import NO, BudgetExceeded, NonTrivCert, allsat, cert_from_witness, cert_verify, varsat  # noqa: E402

__all__ = [
    "__version__",
    "Formula",
    "parse",
    "to_text",
    "eval_classical",
    "tseitin",
    "scaffold",
    "pad_formula",
    "FinitePBA",
    "Undefined",
    "meaningful_eval",
    "leq",
    "validate_pba",
    "standard_algebra",
    "UNSAT",
    "sat_classical",
    "NO",
    "BudgetExceeded",
    "NonTrivCert",
    "allsat",
    "cert_from_witness",
    "cert_verify",
    "varsat",
]
