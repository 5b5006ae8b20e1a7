"""Exact Fock-space toolkit for the M-mode permutation-invariant oscillator algebra.

Layers:

- ``scalar``: rationals and rational functions of the coupling nu.
- ``fock``: occupation states and the deformed operator actions.
- ``singlemode``: the one-mode deformed oscillator and its expansion series.
- ``gram``: inner-product matrices, exact rank, spectra, critical point.
- ``opexpr``: normally ordered expressions, expansion fitting, relation checks.
- ``cli``: the ``calofock`` command.
"""

from .scalar import NU, NuPoly, NuScalar, Rat, to_float
from .fock import AlgebraParams, FockState, Guards, params
from .singlemode import SingleModeAlgebra, algebra, series
from .gram import GramMatrix, build_gram, critical_check, eigen_numeric, positivity_scan, rank_exact
from .opexpr import FitProblem, OperatorExpr, b_block, fit_expansion, verify_relation

__all__ = [
    "NU",
    "NuPoly",
    "NuScalar",
    "Rat",
    "to_float",
    "AlgebraParams",
    "FockState",
    "Guards",
    "params",
    "SingleModeAlgebra",
    "algebra",
    "series",
    "GramMatrix",
    "build_gram",
    "critical_check",
    "eigen_numeric",
    "positivity_scan",
    "rank_exact",
    "FitProblem",
    "OperatorExpr",
    "b_block",
    "fit_expansion",
    "verify_relation",
]

__version__ = "0.1.0"
