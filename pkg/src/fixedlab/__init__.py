"""Certify contraction conditions on b-metric spaces and iterate them.

The package parses small one- and two-variable expressions, checks
b-metric axioms and comparison-function laws on seeded samples, tests
window and convex contraction conditions pair by pair, and runs Picard
iteration with step, window, and rate diagnostics.  Numeric kernels run
on a compiled backend when the extension module is available and on a
bit-identical pure Python backend otherwise.
"""

from ._core import available_engines, engine_info, get_engine, set_engine
from ._core.program import CompiledExpr
from .catalog import BUILTIN_NAMES, builtin_lookup
from .certify import (Certificate, MonotoneReport, SelfMap, Violation,
                      certify_convex_contraction, certify_m_step, certify_pair,
                      monotone_M_check, orbit, window_max)
from .comparison import (ComparisonFunction, PhiReport, PhiWitness,
                         convex_to_comparison, default_radii, iterate_phi,
                         validate_convex_coefficients, verify_comparison)
from .errors import (DomainEscapeError, EvaluationError, ExprSyntaxError,
                     FixedlabError, TraceTooShortError, UnknownBuiltinError,
                     ValidationError)
from .expr import format_float, parse, to_source
from .sampling import PairSampler, splitmix64, splitmix64_uniform
from .solve import (PicardTrace, RateReport, StopCriteria, estimate_rate,
                    picard_iterate)
from .space import (AxiomReport, AxiomWitness, BMetricSpace, Domain, Metric,
                    Tolerance, chained_bound, min_b_constant, verify_axioms)

__version__ = "0.1.0"

__all__ = [
    "AxiomReport", "AxiomWitness", "BMetricSpace", "BUILTIN_NAMES",
    "Certificate", "ComparisonFunction", "CompiledExpr", "Domain",
    "DomainEscapeError", "EvaluationError", "ExprSyntaxError", "FixedlabError",
    "Metric", "MonotoneReport", "PairSampler", "PhiReport", "PhiWitness",
    "PicardTrace", "RateReport", "SelfMap", "StopCriteria", "Tolerance",
    "TraceTooShortError", "UnknownBuiltinError", "ValidationError", "Violation",
    "available_engines", "builtin_lookup", "certify_convex_contraction",
    "certify_m_step", "certify_pair", "chained_bound", "convex_to_comparison",
    "default_radii", "engine_info", "estimate_rate", "format_float",
    "get_engine", "iterate_phi", "min_b_constant", "monotone_M_check", "orbit",
    "parse", "picard_iterate", "set_engine", "splitmix64", "splitmix64_uniform",
    "to_source", "validate_convex_coefficients", "verify_axioms",
    "verify_comparison", "window_max",
]
