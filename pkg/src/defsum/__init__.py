"""defsum: exponential sums over first-order definable subsets of finite fields."""

from . import characters, decomp, defset, expsum, gf, jobs, lab, ringlang, spectrum
from .defset import BudgetExceeded, DEFAULT_BUDGET
from .expsum import SumSpec, SumReport
from .gf import FieldCtx, make_extension
from .ringlang import Formula, RationalMap, Term, parse_formula, parse_term

__version__ = "0.1.0"

__all__ = [
    "characters", "decomp", "defset", "expsum", "gf", "jobs", "lab",
    "ringlang", "spectrum", "BudgetExceeded", "DEFAULT_BUDGET", "SumSpec",
    "SumReport", "FieldCtx", "make_extension", "Formula", "RationalMap",
    "Term", "parse_formula", "parse_term", "__version__",
]
