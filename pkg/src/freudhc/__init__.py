"""Weighted hyperbolic-cross polynomial approximation for exponential weights."""

__version__ = "0.1.0"

from .weights import WeightParams, RateExponents, rate_exponents, weight_value  # noqa: F401
from .orthopoly import (  # noqa: F401
    RecurrenceTable,
    QuadratureRule,
    build_table,
    gauss_rule,
    hermite_recurrence,
    stieltjes_recurrence,
)
from .spectral import CoeffTensor, Multiplier1D  # noqa: F401
