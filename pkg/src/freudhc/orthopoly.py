"""Orthonormal polynomials for the univariate weight exp(-2a|x|^lam + 2b).

The basis is encoded by the variances beta[0..N] of the monic three-term
recurrence (the diagonal coefficients vanish because the weight is even);
beta[0] is the total mass of the measure.  The orthonormal recurrence is

    x p_k = sqrt(beta[k+1]) p_{k+1} + sqrt(beta[k]) p_{k-1},
    p_{-1} = 0,  p_0 = beta[0]**(-1/2).

Gauss rules, pointwise evaluation and the derivative connection matrix all
derive from the table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.linalg import eigh_tridiagonal

from . import _dd as dd
from .errors import InvalidParamsError, NonConvergenceError
from .weights import WeightParams, mrs_number

MAX_TABLE_SIZE = 1200

# order of the local Gauss-Legendre panels in the discretization grid
_PANEL_ORDER = 24
# geometric grading depth toward the |x|^lam kink at the origin
_GRADE_LEVELS = 48


@dataclass(frozen=True)
class RecurrenceTable:
    """Monic recurrence variances beta[0..N] for the weight exp(-2a|x|^lam + 2b)."""

    lam: float
    a: float
    b: float
    beta: np.ndarray = field(repr=False)

    def __post_init__(self):
        beta = np.asarray(self.beta, dtype=float)
        if beta.ndim != 1 or beta.size < 1:
            raise InvalidParamsError("beta must be a one-dimensional array")
        if not np.all(beta > 0):
            raise InvalidParamsError("all recurrence variances must be positive")
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "_sqrt_beta", np.sqrt(beta))

    @property
    def size(self) -> int:
        """Largest polynomial degree the table can evaluate."""
        return len(self.beta) - 1

    @property
    def zeroth_norm(self) -> float:
        return float(math.sqrt(self.beta[0]))

    def sqrt_beta(self) -> np.ndarray:
        return self._sqrt_beta


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights for the measure w^2(x) dx, exact up to degree_exact."""

    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    degree_exact: int

    def __len__(self) -> int:
        return len(self.nodes)


def hermite_recurrence(params: WeightParams, n: int) -> RecurrenceTable:
    """Closed-form table for lam = 2: beta_0 = e^{2b} sqrt(pi/(2a)), beta_k = k/(4a)."""
    if params.lam != 2:
        raise InvalidParamsError(f"closed form requires lam = 2, got {params.lam}")
    _check_size(n)
    beta = np.arange(n + 1, dtype=float) / (4.0 * params.a)
    beta[0] = math.exp(2.0 * params.b) * math.sqrt(math.pi / (2.0 * params.a))
    return RecurrenceTable(params.lam, params.a, params.b, beta)


def stieltjes_recurrence(
    params: WeightParams,
    n: int,
    *,
    stability_rtol: float = 1e-12,
    max_refinements: int = 5,
) -> RecurrenceTable:
    """Recurrence table for any lam > 1 by a discretized Stieltjes procedure.

    The measure is discretized on [-R, R], R = 3 * a_n, with composite
    Gauss-Legendre panels graded geometrically toward the origin; the node
    count doubles until every beta_k is stable to ``stability_rtol`` in
    relative terms.  The three-term iteration runs in double-double
    arithmetic so that accumulation error stays far below the
    discretization error even past degree 100.
    """
    _check_size(n)
    prev = None
    for level in range(max_refinements + 1):
        x, mu = _discretization_grid(params, n, level)
        beta = _stieltjes_dd(x, mu, n)
        if prev is not None:
            rel = np.max(np.abs(beta - prev) / beta)
            if rel < stability_rtol:
                return RecurrenceTable(params.lam, params.a, params.b, beta)
        prev = beta
    raise NonConvergenceError(
        f"recurrence coefficients not stable to {stability_rtol:g} after "
        f"{max_refinements} grid doublings (lam={params.lam}, n={n})"
    )


def build_table(params: WeightParams, n: int) -> RecurrenceTable:
    """Closed form when available (lam = 2), discretized Stieltjes otherwise."""
    if params.lam == 2:
        return hermite_recurrence(params, n)
    return stieltjes_recurrence(params, n)


def string_equation_residual(table: RecurrenceTable, n_max: int | None = None) -> float:
    """Max residual of Freud's string relation for lam = 4, after rescaling.

    With t = (2a)**(1/4) x the weight becomes exp(-t^4) and the rescaled
    variances bt_k = sqrt(2a) beta_k satisfy 4 bt_n (bt_{n-1} + bt_n +
    bt_{n+1}) = n for n >= 1, where bt_0 enters as 0 (the mass stored in
    beta[0] is a normalization, not a recurrence coefficient).
    """
    if table.lam != 4:
        raise InvalidParamsError(f"string relation requires lam = 4, got {table.lam}")
    if table.size < 2:
        raise InvalidParamsError("need at least beta[0..2] for the string relation")
    last = table.size - 1 if n_max is None else min(n_max, table.size - 1)
    bt = math.sqrt(2.0 * table.a) * table.beta
    worst = 0.0
    for k in range(1, last + 1):
        left = bt[k - 1] if k > 1 else 0.0
        worst = max(worst, abs(4.0 * bt[k] * (left + bt[k] + bt[k + 1]) - k))
    return worst


def gauss_rule(table: RecurrenceTable, n: int) -> QuadratureRule:
    """n-point Gauss rule: Jacobi-matrix eigenvalues as nodes, Christoffel weights.

    Weights come from the reciprocal Christoffel sum with the weight folded
    into the evaluated basis; unlike squared first eigenvector components,
    this keeps the tiny extreme-node weights relatively accurate, which
    matters as soon as they multiply large polynomial values.
    """
    if not 1 <= n <= table.size:
        raise InvalidParamsError(f"need 1 <= n <= {table.size}, got {n}")
    if n == 1:
        return QuadratureRule(np.zeros(1), np.array([table.beta[0]]), 1)
    off = table.sqrt_beta()[1:n]
    try:
        nodes = eigh_tridiagonal(np.zeros(n), off, eigvals_only=True)
    except Exception as exc:  # scipy raises LinAlgError on failure
        raise NonConvergenceError(f"tridiagonal eigensolver failed for n={n}") from exc
    # the even weight forces an exactly symmetric rule
    nodes = 0.5 * (nodes - nodes[::-1])
    wb = weighted_basis_matrix(table, n - 1, nodes)
    w2 = np.exp(2.0 * (-table.a * np.abs(nodes) ** table.lam + table.b))
    if np.any(w2 == 0.0):
        raise InvalidParamsError(
            f"extreme-node weights underflow double precision for n={n}; "
            "use a smaller rule for this weight"
        )
    weights = w2 / np.sum(wb * wb, axis=0)
    weights = 0.5 * (weights + weights[::-1])
    return QuadratureRule(nodes, weights, 2 * n - 1)


def eval_orthonormal(table: RecurrenceTable, k: int, x) -> np.ndarray | float:
    """p_k(x) by the three-term recurrence.

    Allowed to leave double range for huge k*|x| (inf or nan); the scaled
    variant below is the contract-bearing API in that regime.
    """
    scalar = np.isscalar(x)
    with np.errstate(over="ignore", invalid="ignore"):
        out = basis_matrix(table, k, np.atleast_1d(np.asarray(x, dtype=float)))[k]
    return float(out[0]) if scalar else out


def basis_matrix(table: RecurrenceTable, k_max: int, x: np.ndarray) -> np.ndarray:
    """Matrix of values p_k(x_s) for k = 0..k_max, shape (k_max+1, len(x))."""
    if k_max > table.size:
        raise InvalidParamsError(f"k_max={k_max} exceeds table size {table.size}")
    x = np.asarray(x, dtype=float)
    sb = table.sqrt_beta()
    out = np.empty((k_max + 1, x.size))
    out[0] = 1.0 / sb[0]
    if k_max >= 1:
        out[1] = x * out[0] / sb[1]
    for j in range(1, k_max):
        out[j + 1] = (x * out[j] - sb[j] * out[j - 1]) / sb[j + 1]
    return out


def eval_orthonormal_scaled(
    table: RecurrenceTable, k: int, x
) -> tuple[np.ndarray, np.ndarray]:
    """Overflow-safe evaluation: returns (mantissa, exponent) with p_k = m * 2**e.

    Mantissas are renormalized whenever they exceed 2**500, so huge magnitudes
    at large |x| never saturate to inf.
    """
    if k > table.size:
        raise InvalidParamsError(f"k={k} exceeds table size {table.size}")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    sb = table.sqrt_beta()
    expo = np.zeros(x.shape, dtype=np.int64)
    prev = np.zeros_like(x)
    cur = np.full_like(x, 1.0 / sb[0])
    for j in range(k):
        prev, cur = cur, (x * cur - sb[j] * prev) / sb[j + 1]
        big = np.abs(cur) > 2.0**500
        if np.any(big):
            cur[big] = np.ldexp(cur[big], -512)
            prev[big] = np.ldexp(prev[big], -512)
            expo[big] += 512
    return cur, expo


def weighted_basis_matrix(
    table: RecurrenceTable, k_max: int, x: np.ndarray, *, half_weight: bool = True
) -> np.ndarray:
    """Values of p_k(x) * w(x) where w = exp(-a|x|^lam + b) (the single weight).

    Folding the weight into the starting value keeps every iterate of the
    recurrence bounded, so the products never overflow; with
    ``half_weight=False`` the full measure weight w^2 is folded instead.
    """
    if k_max > table.size:
        raise InvalidParamsError(f"k_max={k_max} exceeds table size {table.size}")
    x = np.asarray(x, dtype=float)
    power = 1.0 if half_weight else 2.0
    w = np.exp(power * (-table.a * np.abs(x) ** table.lam + table.b))
    sb = table.sqrt_beta()
    out = np.empty((k_max + 1, x.size))
    out[0] = w / sb[0]
    if k_max >= 1:
        out[1] = x * out[0] / sb[1]
    for j in range(1, k_max):
        out[j + 1] = (x * out[j] - sb[j] * out[j - 1]) / sb[j + 1]
    return out


def differentiation_matrix(table: RecurrenceTable, n: int) -> np.ndarray:
    """Connection array D with p_k' = sum_{j<k} D[j, k] p_j, for k <= n.

    Entries are inner products <p_k', p_j> against w^2 dx computed with a
    rule of degree_exact >= 2n, so they are exact up to roundoff; the j >= k
    block is identically zero by degree counting.
    """
    if n + 1 > table.size:
        raise InvalidParamsError(
            f"differentiation up to degree {n} needs a table of size >= {n + 1}"
        )
    rule = gauss_rule(table, n + 1)
    vals = basis_matrix(table, n, rule.nodes)
    derivs = _derivative_matrix_values(table, n, rule.nodes, vals)
    d_mat = (vals * rule.weights) @ derivs.T
    # strictly upper in (j, k): zero the noise at j >= k
    d_mat[np.tril_indices_from(d_mat)] = 0.0
    return d_mat


def _derivative_matrix_values(
    table: RecurrenceTable, k_max: int, x: np.ndarray, vals: np.ndarray
) -> np.ndarray:
    """Values p_k'(x) for k = 0..k_max, differentiating the recurrence."""
    sb = table.sqrt_beta()
    out = np.zeros_like(vals)
    if k_max >= 1:
        out[1] = vals[0] / sb[1]
    for j in range(1, k_max):
        out[j + 1] = (vals[j] + x * out[j] - sb[j] * out[j - 1]) / sb[j + 1]
    return out


def _check_size(n: int) -> None:
    if not 0 <= n <= MAX_TABLE_SIZE:
        raise InvalidParamsError(f"table size must lie in [0, {MAX_TABLE_SIZE}], got {n}")


def _discretization_grid(params: WeightParams, n: int, level: int):
    """Symmetric composite quadrature grid approximating the measure w^2 dx.

    Panels are uniform on [0, R] at a density tied to the oscillation count
    of degree-n polynomials, with a geometric grading of the innermost panel
    (the weight has an |x|^lam kink at 0 for non-even lam); the whole grid is
    mirrored so the discrete measure is exactly even.
    """
    deg = max(n, 1)
    # the scaling radius covers the polynomial mass; the second term makes the
    # plain weight tail itself fall below 1e-19 so small-n tables are unbiased
    rad = max(3.0 * mrs_number(params, deg), (45.0 / (2.0 * params.a)) ** (1.0 / params.lam))
    bulk = (max(10, math.ceil(0.7 * deg)) + 2) * 2**level
    edges = np.linspace(0.0, rad, bulk + 1)
    first = edges[1]
    graded = first * 0.5 ** np.arange(_GRADE_LEVELS + 4 * level, 0, -1)
    edges = np.concatenate([[0.0], graded, edges[1:]])

    gl_x, gl_w = leggauss(_PANEL_ORDER)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    x_pos = (mid[:, None] + half[:, None] * gl_x[None, :]).ravel()
    w_pos = (half[:, None] * gl_w[None, :]).ravel()
    mu_pos = w_pos * np.exp(-2.0 * params.a * x_pos**params.lam + 2.0 * params.b)

    x = np.concatenate([-x_pos[::-1], x_pos])
    mu = np.concatenate([mu_pos[::-1], mu_pos])
    return x, mu


def _stieltjes_dd(x: np.ndarray, mu: np.ndarray, n: int) -> np.ndarray:
    """Recurrence variances beta[0..n] of the discrete measure sum mu_s delta_{x_s}.

    Orthonormal Lanczos on the multiplication operator, vectors carried in
    double-double; the diagonal coefficients are identically zero because the
    grid is exactly symmetric, so they are never formed.
    """
    beta = np.empty(n + 1)
    mass_h, mass_l = dd.dd_sum(mu, np.zeros_like(mu))
    beta[0] = float(mass_h) + float(mass_l)

    inv_h, inv_l = dd.dd_recip_scalar(*dd.dd_sqrt_scalar(mass_h, mass_l))
    q = np.sqrt(mu)
    v_h, v_l = dd.dd_mul_f(np.full_like(mu, float(inv_h)), np.full_like(mu, float(inv_l)), q)

    pv_h = np.zeros_like(mu)
    pv_l = np.zeros_like(mu)
    sb_h, sb_l = np.float64(0.0), np.float64(0.0)
    for k in range(1, n + 1):
        w_h, w_l = dd.dd_mul_f(v_h, v_l, x)
        if k > 1:
            t_h, t_l = dd.dd_mul(pv_h, pv_l, np.full_like(mu, float(sb_h)), np.full_like(mu, float(sb_l)))
            w_h, w_l = dd.dd_sub(w_h, w_l, t_h, t_l)
        b_h, b_l = dd.dd_dot(w_h, w_l, w_h, w_l)
        beta[k] = float(b_h) + float(b_l)
        if beta[k] <= 0.0:
            raise NonConvergenceError(f"breakdown at step {k}: beta = {beta[k]}")
        sb_h, sb_l = dd.dd_sqrt_scalar(b_h, b_l)
        r_h, r_l = dd.dd_recip_scalar(sb_h, sb_l)
        pv_h, pv_l = v_h, v_l
        v_h, v_l = dd.dd_mul(w_h, w_l, np.full_like(mu, float(r_h)), np.full_like(mu, float(r_l)))
    return beta
