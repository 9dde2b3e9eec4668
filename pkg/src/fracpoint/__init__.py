"""Subordinated and fractional Poisson processes.

Marginal laws, hitting probabilities, samplers, renewal diagnostics and
Erdelyi-Kober fractional operators, plus the ``fracpoint`` experiment runner.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .specfun import AccuracyError, EvalResult, mittag_leffler, ml, m_wright
from .bernstein import BernsteinFunction, Gamma, Linear, Stable, TemperedStable, parse_bernstein
from .processes import (
    BernsteinPoisson,
    GgbmTime,
    MultiSubordinated,
    PmfTable,
    SpaceFractional,
    SpaceTime,
    TimeFractional,
    parse_process,
    pgf,
    pmf_table,
)
from .samplers import RngStream
from .hitting import HittingResult, hitting_prob_exact
from .fracops import OperatorSpec

__all__ = [
    "__version__",
    "AccuracyError",
    "EvalResult",
    "mittag_leffler",
    "ml",
    "m_wright",
    "BernsteinFunction",
    "Linear",
    "Stable",
    "TemperedStable",
    "Gamma",
    "parse_bernstein",
    "SpaceFractional",
    "TimeFractional",
    "SpaceTime",
    "BernsteinPoisson",
    "MultiSubordinated",
    "GgbmTime",
    "PmfTable",
    "parse_process",
    "pgf",
    "pmf_table",
    "RngStream",
    "HittingResult",
    "hitting_prob_exact",
    "OperatorSpec",
]
