"""A small probabilistic programming language with incremental MH inference.

Programs are s-expressions.  Four inference engines share one interpreter
and differ in how much of the program they re-run per proposal: the whole
program, the whole program with callsite caching, the tail after the changed
choice, or the tail with caching and early exit.
"""

from .errors import C3Error, EnumerationError, ErpParamError, InitializationFailure
from .infer import (
    ENGINES, compare_engines, enumerate_program, make_engine, run_chain, tv_distance,
)
from .lang import ParseError, eval_direct, parse
from .models import build_model

__all__ = [
    "C3Error", "ENGINES", "EnumerationError", "ErpParamError", "InitializationFailure",
    "ParseError", "build_model", "compare_engines", "enumerate_program", "eval_direct",
    "make_engine", "parse", "run_chain", "tv_distance",
]
__version__ = "0.1.0"
