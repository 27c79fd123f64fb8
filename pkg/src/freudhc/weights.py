"""Tensor-product exponential weights and the scalar exponents of their rate formulas.

The generating univariate weight is exp(-a*|x|**lam + b) with lam > 1; the
d-variate weight is the product of one copy per coordinate.  Everything that
enters a convergence-rate statement (the smoothness exponent, the norm-index
penalty, the Freud and Mhaskar-Rakhmanov-Saff scaling numbers) lives here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParamsError

INF = math.inf


def _inv(p: float) -> float:
    # convention 1/inf = 0
    return 0.0 if math.isinf(p) else 1.0 / p


@dataclass(frozen=True)
class WeightParams:
    """Weight and problem parameters (lam, a, b, d, r, p, q).

    ``lam`` and ``a`` shape the exponential decay, ``b`` is a normalization
    offset, ``d`` the dimension, ``r`` the mixed-smoothness order, and
    ``p``/``q`` the source/target norm indices (``math.inf`` is the admitted
    sentinel for an infinite index).
    """

    lam: float
    a: float
    b: float = 0.0
    d: int = 1
    r: int = 1
    p: float = 2.0
    q: float = 2.0

    def __post_init__(self) -> None:
        if not isinstance(self.d, int) or self.d < 1:
            raise InvalidParamsError(f"d must be a positive integer, got {self.d!r}")
        if not isinstance(self.r, int) or self.r < 1:
            raise InvalidParamsError(f"r must be a positive integer, got {self.r!r}")
        if not (isinstance(self.lam, (int, float)) and self.lam > 1.0):
            raise InvalidParamsError(f"lam must be > 1, got {self.lam!r}")
        if not self.a > 0.0:
            raise InvalidParamsError(f"a must be > 0, got {self.a!r}")
        if not math.isfinite(self.b):
            raise InvalidParamsError(f"b must be finite, got {self.b!r}")
        for name in ("p", "q"):
            v = getattr(self, name)
            if not v >= 1.0:
                raise InvalidParamsError(f"{name} must lie in [1, inf], got {v!r}")

    def with_indices(self, p: float, q: float) -> "WeightParams":
        return WeightParams(self.lam, self.a, self.b, self.d, self.r, p, q)


@dataclass(frozen=True)
class RateExponents:
    """Rate triple: smoothness exponent, norm-index penalty, and their difference."""

    r_lambda: float
    delta: float
    r_lambda_pq: float


def rate_exponents(params: WeightParams) -> RateExponents:
    """Exponents governing every convergence rate for the given parameters.

    r_lambda = (1 - 1/lam) * r; delta is (1 - 1/lam)(1/p - 1/q) when p <= q
    and (1/lam)(1/q - 1/p) when p > q, with 1/inf = 0.
    """
    r_lam = (1.0 - 1.0 / params.lam) * params.r
    ip, iq = _inv(params.p), _inv(params.q)
    if params.p <= params.q:
        delta = (1.0 - 1.0 / params.lam) * (ip - iq)
    else:
        delta = (1.0 / params.lam) * (iq - ip)
    return RateExponents(r_lam, delta, r_lam - delta)


def weight_value(params: WeightParams, x) -> float:
    """Value of the d-variate weight at a single point."""
    pt = np.atleast_1d(np.asarray(x, dtype=float))
    if pt.shape != (params.d,):
        raise InvalidParamsError(f"point has shape {pt.shape}, expected ({params.d},)")
    return float(np.exp(np.sum(-params.a * np.abs(pt) ** params.lam + params.b)))


def univariate_weight(params: WeightParams, x: np.ndarray) -> np.ndarray:
    """Generating univariate weight evaluated on an array (vectorized)."""
    x = np.asarray(x, dtype=float)
    return np.exp(-params.a * np.abs(x) ** params.lam + params.b)


def freud_number(params: WeightParams, m: int) -> float:
    """Freud scaling number (m / (a*lam))**(1/lam)."""
    if m < 1:
        raise InvalidParamsError(f"m must be >= 1, got {m}")
    return (m / (params.a * params.lam)) ** (1.0 / params.lam)


def mrs_number(params: WeightParams, m: int) -> float:
    """Mhaskar-Rakhmanov-Saff number (nu_lam * m)**(1/lam)."""
    if m < 1:
        raise InvalidParamsError(f"m must be >= 1, got {m}")
    lam = params.lam
    nu = 2.0 ** (lam - 1.0) * math.gamma(lam / 2.0) ** 2 / math.gamma(lam)
    return (nu * m) ** (1.0 / lam)


_JSON_KEYS = ("lambda", "a", "b", "d", "r", "p", "q")


def params_from_json(obj: dict) -> WeightParams:
    """Build WeightParams from a JSON-style mapping; the string "inf" encodes infinity."""
    if not isinstance(obj, dict):
        raise InvalidParamsError(f"expected a mapping, got {type(obj).__name__}")
    unknown = set(obj) - set(_JSON_KEYS)
    if unknown:
        raise InvalidParamsError(f"unknown parameter keys: {sorted(unknown)}")
    if "lambda" not in obj or "a" not in obj:
        raise InvalidParamsError("parameter object needs at least 'lambda' and 'a'")

    def num(key, default):
        v = obj.get(key, default)
        if isinstance(v, str):
            if v.lower() == "inf":
                return INF
            raise InvalidParamsError(f"non-numeric value for {key!r}: {v!r}")
        return v

    return WeightParams(
        lam=float(num("lambda", None)),
        a=float(num("a", None)),
        b=float(num("b", 0.0)),
        d=int(obj.get("d", 1)),
        r=int(obj.get("r", 1)),
        p=float(num("p", 2.0)),
        q=float(num("q", 2.0)),
    )


def params_to_json(params: WeightParams) -> dict:
    """Inverse of params_from_json (infinite indices map back to "inf")."""
    enc = lambda v: "inf" if math.isinf(v) else v
    return {
        "lambda": params.lam,
        "a": params.a,
        "b": params.b,
        "d": params.d,
        "r": params.r,
        "p": enc(params.p),
        "q": enc(params.q),
    }
