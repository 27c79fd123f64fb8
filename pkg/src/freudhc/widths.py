"""Exact diagonal n-widths of the coefficient-weighted unit ball.

In the orthonormal basis the unit ball of the smoothness space maps to an
axis-aligned ellipsoid with semi-axes 1/rho_k, rho_k = prod (k_j+1)^r_lambda,
so the width of order n is the (n+1)-st largest semi-axis.  The module
enumerates the product multiset exactly and compares against the predicted
n^(-r_lambda) (log n)^(r_lambda (d-1)) envelope.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import spectral as sp
from .errors import InvalidParamsError, NonConvergenceError


@dataclass(frozen=True)
class WidthRow:
    n: int
    d_n: float
    theory: float
    ratio: float


@dataclass(frozen=True)
class WidthTable:
    dim: int
    r_lambda: float
    rows: tuple[WidthRow, ...]


def _product_multiset(d: int, bound: int) -> np.ndarray:
    """Sorted multiset of products prod (k_j + 1) over k in N_0^d, values <= bound."""
    if d == 1:
        return np.arange(1, bound + 1, dtype=np.int64)
    out = []

    def descend(prefix_prod, dims):
        if dims == 1:
            top = bound // prefix_prod
            out.extend(prefix_prod * v for v in range(1, top + 1))
            return
        v = 1
        while prefix_prod * v <= bound:
            descend(prefix_prod * v, dims - 1)
            v += 1

    descend(1, d)
    arr = np.array(out, dtype=np.int64)
    arr.sort()
    return arr


def sorted_semi_axis_products(d: int, n_max: int) -> np.ndarray:
    """First n_max+1 sorted products, with the enumeration bound validated by doubling."""
    bound = 4
    while True:
        prods = _product_multiset(d, bound)
        if len(prods) >= n_max + 1 and prods[n_max] < bound:
            confirm = _product_multiset(d, 2 * bound)
            if not np.array_equal(prods[: n_max + 1], confirm[: n_max + 1]):
                raise NonConvergenceError("enumeration bound validation failed")
            return prods[: n_max + 1]
        bound *= 2


def diagonal_width(d: int, r_lambda: float, n: int) -> float:
    """Width of order n: the (n+1)-st largest semi-axis rho^(-1)."""
    if n < 0:
        raise InvalidParamsError(f"n must be >= 0, got {n}")
    prods = sorted_semi_axis_products(d, n)
    return float(prods[n]) ** (-r_lambda)


def theory_rate(n: int, d: int, r_lambda: float) -> float:
    """Predicted width envelope n^(-r_lambda) (log n)^(r_lambda (d-1)), natural log."""
    if n < 2:
        raise InvalidParamsError(f"theory rate needs n >= 2, got {n}")
    return float(n) ** (-r_lambda) * math.log(n) ** (r_lambda * (d - 1))


def exact_diagonal_widths(d: int, r_lambda: float, n_max: int) -> WidthTable:
    """Width table for n = 2..n_max with the theory envelope and their ratio."""
    if n_max < 2:
        raise InvalidParamsError(f"n_max must be >= 2, got {n_max}")
    if r_lambda <= 0:
        raise InvalidParamsError(f"r_lambda must be > 0, got {r_lambda}")
    prods = sorted_semi_axis_products(d, n_max)
    rows = []
    for n in range(2, n_max + 1):
        d_n = float(prods[n]) ** (-r_lambda)
        th = theory_rate(n, d, r_lambda)
        rows.append(WidthRow(n, d_n, th, d_n / th))
    return WidthTable(d, r_lambda, tuple(rows))


def cross_parameter_sequence(n_list, family: str, d: int, r_lambda: float | None = None):
    """Largest admissible operator parameter for each rank budget in n_list."""
    out = []
    for n in n_list:
        out.append(sp.largest_cross_parameter(int(n), family, d, r_lambda))
    return out
