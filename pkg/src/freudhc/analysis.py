"""Weighted norms, expansion coefficients, approximation errors, and rate fits.

The q = 2 geometry is exact through coefficient sums; every other norm is
quadrature on the weighted integrand |f w|^q over a truncated box, with the
weight folded into the evaluated basis so that nothing overflows.  Power-law
coefficient corpora additionally get closed tail sums through Hurwitz zeta
values, which makes the cross-operator errors exact for those functions.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import zeta as hurwitz_zeta

from . import spectral as sp
from .errors import InvalidParamsError, NonConvergenceError, TailDominationError
from .orthopoly import (
    RecurrenceTable,
    QuadratureRule,
    basis_matrix,
    build_table,
    differentiation_matrix,
    gauss_rule,
    weighted_basis_matrix,
)
from .weights import WeightParams, mrs_number, rate_exponents


@dataclass
class Basis:
    """Weight parameters plus the univariate recurrence table and its caches.

    Shared by all axes (the weight is a tensor power of one generating
    weight).  Construction is single-threaded; afterwards the object is
    treated as immutable and safe to share.
    """

    params: WeightParams
    table: RecurrenceTable
    _rules: dict = field(default_factory=dict, repr=False)
    _diffs: dict = field(default_factory=dict, repr=False)

    @classmethod
    def build(cls, params: WeightParams, max_degree: int) -> "Basis":
        return cls(params, build_table(params, max_degree + 1))

    def rule(self, n: int) -> QuadratureRule:
        r = self._rules.get(n)
        if r is None:
            r = self._rules[n] = gauss_rule(self.table, n)
        return r

    def diff_matrix(self, n: int) -> np.ndarray:
        d = self._diffs.get(n)
        if d is None:
            d = self._diffs[n] = differentiation_matrix(self.table, n)
        return d

    def truncation_radius(self, degree: int) -> float:
        """Radius beyond which degree-M weighted integrands are negligible.

        Twice the scaling number covers the polynomial factor; the floor makes
        the single-weight tail itself drop below 1e-14 so that low degrees are
        not truncated early.
        """
        p = self.params
        return max(
            2.0 * mrs_number(p, max(degree, 1)),
            (33.0 / p.a) ** (1.0 / p.lam),
        )


@dataclass
class FunctionOracle:
    """A function known through point values, coefficients, or a coefficient law.

    ``eval_fn`` takes an (n, dim) array of points; ``deriv_fn`` additionally
    takes a multi-index.  ``law_decay = s`` declares the product power law
    f_hat(k) = prod (k_j + 1)**(-s), for which error tails are exact.
    ``tail_sq_fn(K)`` returns the coefficient mass outside the box [0, K]^dim.
    """

    dim: int
    label: str = ""
    eval_fn: Callable | None = None
    deriv_fn: Callable | None = None
    exact_coeffs: sp.CoeffTensor | None = None
    law_decay: float | None = None
    poly_degree: int | None = None
    tail_sq_fn: Callable | None = None
    smoothness_tag: str = ""

    def law_coeffs(self, box: tuple[int, ...]) -> sp.CoeffTensor:
        """Materialize a power-law member on a finite degree box."""
        if self.law_decay is None:
            raise InvalidParamsError("not a coefficient-law oracle")
        entries = {}
        for idx in itertools.product(*(range(b + 1) for b in box)):
            v = 1.0
            for k in idx:
                v *= (k + 1.0) ** (-self.law_decay)
            entries[idx] = v
        return sp.CoeffTensor(self.dim, entries)


@dataclass(frozen=True)
class RateFit:
    """Least-squares exponents of e_n ~ n^alpha (log n)^gamma."""

    alpha: float
    gamma: float
    residual: float
    intercept: float = 0.0


# ---------------------------------------------------------------------------
# coefficients from point values


def expansion_coefficients(
    basis: Basis,
    oracle: FunctionOracle,
    degree_box,
    *,
    rtol: float = 1e-10,
    max_doublings: int = 6,
) -> sp.CoeffTensor:
    """Expansion coefficients on a degree box by tensor Gauss quadrature.

    Polynomial oracles (declared via ``poly_degree``) use one exact rule;
    anything else doubles the per-axis node count until the coefficients are
    stable to ``rtol`` relative to the largest one.
    """
    box = tuple(int(b) for b in degree_box)
    if len(box) != oracle.dim:
        raise InvalidParamsError(f"box {box} has wrong length for dim {oracle.dim}")
    if max(box) > basis.table.size - 1:
        raise InvalidParamsError("degree box exceeds the recurrence table")
    if oracle.eval_fn is None:
        raise InvalidParamsError("oracle provides no point evaluations")

    if oracle.poly_degree is not None:
        n = (max(box) + oracle.poly_degree) // 2 + 4
        return _quadrature_coefficients(basis, oracle, box, n)

    n = max(box) + 12
    prev = None
    for _ in range(max_doublings + 1):
        cur = _quadrature_coefficients(basis, oracle, box, n)
        if prev is not None:
            scale = max(abs(v) for v in cur.entries.values()) or 1.0
            diff = max(
                abs(cur.get(k) - prev.get(k))
                for k in set(cur.entries) | set(prev.entries)
            )
            if diff <= rtol * scale:
                return cur
        prev = cur
        if n == basis.table.size:
            break
        n = min(2 * n, basis.table.size)
    raise NonConvergenceError(
        f"coefficients not stable to {rtol:g} before exhausting the table"
    )


def _quadrature_coefficients(basis, oracle, box, n) -> sp.CoeffTensor:
    rule = basis.rule(n)
    vals = basis_matrix(basis.table, max(box), rule.nodes)
    d = oracle.dim
    grids = np.meshgrid(*([rule.nodes] * d), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=-1)
    f = np.asarray(oracle.eval_fn(pts), dtype=float).reshape((n,) * d)
    t = f
    for axis in range(d):
        bw = vals[: box[axis] + 1] * rule.weights
        t = np.moveaxis(np.tensordot(bw, t, axes=(1, 0)), 0, -1)
    entries = {}
    for idx in itertools.product(*(range(b + 1) for b in box)):
        v = float(t[idx])
        if v != 0.0:
            entries[idx] = v
    return sp.CoeffTensor(d, entries)


# ---------------------------------------------------------------------------
# expansion evaluation on tensor grids


def dense_box(coeffs: sp.CoeffTensor) -> np.ndarray:
    """Dense array holding the coefficients on their support box."""
    box = coeffs.support_box()
    arr = np.zeros(tuple(b + 1 for b in box)) if coeffs.entries else np.zeros((1,) * coeffs.dim)
    for idx, v in coeffs.entries.items():
        arr[idx] = v
    return arr


def eval_expansion_on_grid(
    basis: Basis, coeffs: sp.CoeffTensor, axes_points, *, weighted: bool = True
) -> np.ndarray:
    """Values of the expansion (times the weight when ``weighted``) on a tensor grid."""
    if len(axes_points) != coeffs.dim:
        raise InvalidParamsError("one point array per axis required")
    arr = dense_box(coeffs)
    t = arr
    for axis in range(coeffs.dim):
        x = np.asarray(axes_points[axis], dtype=float)
        k_max = arr.shape[axis] - 1
        mat = (
            weighted_basis_matrix(basis.table, k_max, x)
            if weighted
            else basis_matrix(basis.table, k_max, x)
        )
        t = np.moveaxis(np.tensordot(mat.T, t, axes=(1, 0)), 0, -1)
    return t


# ---------------------------------------------------------------------------
# norms


def parseval_norm(coeffs: sp.CoeffTensor) -> float:
    """Weighted-L2 norm through the coefficient sum (exact)."""
    return coeffs.l2_norm()


def lq_norm(
    basis: Basis,
    f,
    q: float,
    *,
    rtol: float = 1e-8,
    degree_hint: int | None = None,
) -> float:
    """Weighted L_q norm of a CoeffTensor or FunctionOracle.

    q = 2 on coefficients is Parseval; q = inf is a dense-sampling estimate
    (about three digits); other q values integrate |f w|^q over [-R, R]^d,
    R = 2 a_M, by composite panels refined until ``rtol`` stability.
    """
    if not q >= 1.0:
        raise InvalidParamsError(f"q must lie in [1, inf], got {q}")
    if isinstance(f, sp.CoeffTensor):
        if q == 2.0:
            return parseval_norm(f)
        deg = max(max(f.support_box()), 0)
        radius = basis.truncation_radius(degree_hint or deg)
        if math.isinf(q):
            return _sup_norm_expansion(basis, f, radius)
        if f.dim == 1:
            return _lq_norm_1d_expansion(basis, f, q, radius, rtol)
        return _lq_norm_box_expansion(basis, f, q, radius, rtol)
    if isinstance(f, FunctionOracle):
        if f.exact_coeffs is not None and q == 2.0:
            return parseval_norm(f.exact_coeffs)
        if f.eval_fn is None:
            raise InvalidParamsError("oracle has neither eval_fn nor usable coefficients")
        radius = basis.truncation_radius(degree_hint or 32)
        if math.isinf(q):
            return _sup_norm_values(basis, f.eval_fn, f.dim, radius)
        return _lq_norm_values(basis, f.eval_fn, f.dim, q, radius, rtol)
    raise InvalidParamsError(f"cannot take a norm of {type(f).__name__}")


def _weight_1d(basis: Basis, x: np.ndarray) -> np.ndarray:
    p = basis.params
    return np.exp(-p.a * np.abs(x) ** p.lam + p.b)


def _expansion_roots(basis: Basis, cvec: np.ndarray, radius: float) -> np.ndarray:
    """Real roots of a univariate expansion inside (-radius, radius)."""
    c = np.trim_zeros(np.asarray(cvec, dtype=float), "b")
    m = len(c) - 1
    if m < 1:
        return np.empty(0)
    sb = basis.table.sqrt_beta()
    if m == 1:
        return np.array([0.0]) if c[0] == 0 else np.array([-c[0] * sb[1] / c[1]])
    comrade = np.diag(sb[1:m], 1) + np.diag(sb[1:m], -1)
    comrade[m - 1, :] -= (sb[m] / c[m]) * c[:m]
    ev = np.linalg.eigvals(comrade)
    real = ev.real[np.abs(ev.imag) <= 1e-8 * (1.0 + np.abs(ev.real))]
    real = real[(real > -radius) & (real < radius)]
    return np.sort(real)


def _refined_panel_integral(g, edges: np.ndarray, rtol: float, *, order=16, max_level=9):
    """Integrate a vectorized g over the given panel edges, doubling until stable."""
    gx, gw = leggauss(order)
    prev = None
    for level in range(max_level + 1):
        splits = 2**level
        sub = np.concatenate(
            [np.linspace(edges[i], edges[i + 1], splits + 1)[:-1] for i in range(len(edges) - 1)]
            + [edges[-1:]]
        )
        mid = 0.5 * (sub[1:] + sub[:-1])
        half = 0.5 * (sub[1:] - sub[:-1])
        x = (mid[:, None] + half[:, None] * gx[None, :]).ravel()
        w = (half[:, None] * gw[None, :]).ravel()
        val = float(np.dot(w, g(x)))
        if prev is not None and abs(val - prev) <= rtol * max(abs(val), 1e-300):
            return val
        prev = val
    raise NonConvergenceError(f"panel quadrature not stable to {rtol:g}")


def _lq_norm_1d_expansion(basis, coeffs, q, radius, rtol) -> float:
    cvec = dense_box(coeffs)
    roots = _expansion_roots(basis, cvec, radius)
    edges = np.unique(np.concatenate([[-radius, 0.0, radius], roots]))

    def g(x):
        vals = eval_expansion_on_grid(basis, coeffs, [x])
        return np.abs(vals) ** q

    return _refined_panel_integral(g, edges, rtol) ** (1.0 / q)


def _lq_norm_box_expansion(basis, coeffs, q, radius, rtol) -> float:
    def values(axes):
        return eval_expansion_on_grid(basis, coeffs, axes)

    return _tensor_panel_norm(values, coeffs.dim, q, radius, rtol)


def _lq_norm_values(basis, eval_fn, dim, q, radius, rtol) -> float:
    def values(axes):
        grids = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=-1)
        f = np.asarray(eval_fn(pts), dtype=float).reshape([len(a) for a in axes])
        wfac = np.ones_like(f)
        for axis, x in enumerate(axes):
            shape = [1] * dim
            shape[axis] = len(x)
            wfac = wfac * _weight_1d(basis, np.asarray(x)).reshape(shape)
        return f * wfac

    return _tensor_panel_norm(values, dim, q, radius, rtol)


def _tensor_panel_norm(values, dim, q, radius, rtol, *, order=12, max_level=6) -> float:
    gx, gw = leggauss(order)
    prev = None
    for level in range(max_level + 1):
        panels = 8 * 2**level
        edges = np.linspace(-radius, radius, panels + 1)
        mid = 0.5 * (edges[1:] + edges[:-1])
        half = 0.5 * (edges[1:] - edges[:-1])
        x = (mid[:, None] + half[:, None] * gx[None, :]).ravel()
        w = (half[:, None] * gw[None, :]).ravel()
        vals = np.abs(values([x] * dim)) ** q
        for _ in range(dim):
            vals = np.tensordot(vals, w, axes=([-1], [0]))
        val = float(vals)
        if prev is not None and abs(val - prev) <= rtol * max(abs(val), 1e-300):
            return val ** (1.0 / q)
        prev = val
    raise NonConvergenceError(f"tensor panel quadrature not stable to {rtol:g}")


def _sup_grid(radius: float, count: int) -> np.ndarray:
    base = np.linspace(-radius, radius, count)
    mid = 0.5 * (base[1:] + base[:-1])
    return np.sort(np.concatenate([base, mid]))


def _sup_norm_expansion(basis, coeffs, radius) -> float:
    """Estimated weighted sup norm by dense sampling, refined once (about 1e-3)."""
    deg = max(max(coeffs.support_box()), 1)
    best = 0.0
    for count in (8 * deg + 64, 16 * deg + 128):
        axes = [_sup_grid(radius, count)] * coeffs.dim
        best = max(best, float(np.max(np.abs(eval_expansion_on_grid(basis, coeffs, axes)))))
    return best


def _sup_norm_values(basis, eval_fn, dim, radius) -> float:
    best = 0.0
    for count in (512, 1024):
        axes = [_sup_grid(radius, count)] * dim
        grids = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=-1)
        f = np.asarray(eval_fn(pts), dtype=float).reshape([len(a) for a in axes])
        for axis, x in enumerate(axes):
            shape = [1] * dim
            shape[axis] = len(x)
            f = f * _weight_1d(basis, np.asarray(x)).reshape(shape)
        best = max(best, float(np.max(np.abs(f))))
    return best


# ---------------------------------------------------------------------------
# derivatives and Sobolev norms


def derivative_coeffs(basis: Basis, coeffs: sp.CoeffTensor, orders) -> sp.CoeffTensor:
    """Coefficients of the mixed derivative prescribed by per-axis orders."""
    orders = tuple(orders)
    if len(orders) != coeffs.dim:
        raise InvalidParamsError("one derivative order per axis required")
    cur = coeffs
    for axis, times in enumerate(orders):
        for _ in range(times):
            cur = _derivative_along_axis(basis, cur, axis)
    return cur


def _derivative_along_axis(basis, coeffs, axis) -> sp.CoeffTensor:
    # one full-size connection matrix serves every lower degree
    dmat = basis.diff_matrix(basis.table.size - 1)
    out: dict = {}
    for idx, v in coeffs.entries.items():
        k = idx[axis]
        col = dmat[:k, k]
        for j in np.nonzero(col)[0]:
            nidx = idx[:axis] + (int(j),) + idx[axis + 1 :]
            out[nidx] = out.get(nidx, 0.0) + v * col[j]
    return sp.CoeffTensor(coeffs.dim, {k: v for k, v in out.items() if v != 0.0})


def sobolev_norm(
    basis: Basis,
    f,
    *,
    r: int | None = None,
    p: float | None = None,
    rtol: float = 1e-8,
) -> float:
    """Mixed-smoothness norm: l_p combination of weighted L_p norms of all
    derivatives with per-axis order at most r."""
    r = basis.params.r if r is None else r
    p = basis.params.p if p is None else p
    d = basis.params.d if isinstance(f, FunctionOracle) else getattr(f, "dim", basis.params.d)
    terms = []
    for alpha in itertools.product(range(r + 1), repeat=d):
        if isinstance(f, sp.CoeffTensor):
            dc = derivative_coeffs(basis, f, alpha)
            terms.append(lq_norm(basis, dc, p, rtol=rtol))
        elif isinstance(f, FunctionOracle):
            if f.deriv_fn is None:
                raise InvalidParamsError("oracle has no derivative evaluations")
            shim = FunctionOracle(dim=f.dim, eval_fn=lambda pts, a=alpha: f.deriv_fn(a, pts))
            terms.append(lq_norm(basis, shim, p, rtol=rtol))
        else:
            raise InvalidParamsError(f"cannot take a Sobolev norm of {type(f).__name__}")
    if math.isinf(p):
        return max(terms)
    return float(np.sum(np.asarray(terms) ** p) ** (1.0 / p))


def coeff_smoothness_norm(coeffs: sp.CoeffTensor, r_lambda: float) -> float:
    """Coefficient-weighted norm sqrt(sum (rho_k c_k)^2), rho = prod (k_j+1)^r_lambda."""
    total = math.fsum(
        (sp.index_weight(idx, r_lambda) * v) ** 2 for idx, v in coeffs.entries.items()
    )
    return math.sqrt(total)


# ---------------------------------------------------------------------------
# exact error sums for product power-law coefficients


def _axis_level_sums(decay: float, levels: int):
    """Per-level sums of u(s) = (s+1)^(-2*decay) and taper moments over box levels."""
    out = []
    for t in range(levels + 1):
        s = np.arange(0, 2, dtype=float) if t == 0 else np.arange(1 << t, 1 << (t + 1), dtype=float)
        u = (s + 1.0) ** (-2.0 * decay)
        theta = np.array([sp.vp_level_weight(int(v)) for v in s])
        out.append(
            dict(
                u=float(u.sum()),
                a0=float((theta * u).sum()),
                a1=float(((1 - theta) * u).sum()),
                b00=float((theta**2 * u).sum()),
                b01=float((theta * (1 - theta) * u).sum()),
                b11=float(((1 - theta) ** 2 * u).sum()),
            )
        )
    return out


def _axis_tail(decay: float, level: int) -> float:
    """Sum of u(s) over all s with box level >= level (exact Hurwitz tail)."""
    start = 0 if level == 0 else (1 << level)
    return float(hurwitz_zeta(2.0 * decay, start + 1))


def _complement_sum(decay: float, d: int, budget: int, per_level) -> float:
    """Sum of prod u over level vectors with |t|_1 > budget, all terms positive."""
    if budget < 0:
        return float(hurwitz_zeta(2.0 * decay, 1)) ** d
    if d == 1:
        return _axis_tail(decay, budget + 1)
    total = _axis_tail(decay, budget + 1) * float(hurwitz_zeta(2.0 * decay, 1)) ** (d - 1)
    for t in range(budget + 1):
        total += per_level[t]["u"] * _complement_sum(decay, d - 1, budget - t, per_level)
    return total


def product_law_error_sq(
    decay: float, d: int, family: str, xi, r_lambda: float | None = None
) -> float:
    """Exact squared weighted-L2 error of a cross operator on the power-law function.

    The coefficient law is f_hat(k) = prod (k_j+1)^(-decay); tails are Hurwitz
    zeta values, so nothing is truncated.  Needs decay > 1/2.
    """
    if not decay > 0.5:
        raise InvalidParamsError("decay must exceed 1/2 for a square-summable law")
    if family == sp.TRUNC:
        if r_lambda is None:
            raise InvalidParamsError("family 'trunc' needs r_lambda")
        total = float(hurwitz_zeta(2.0 * decay, 1)) ** d
        kept = math.fsum(
            sp.index_weight(idx, -2.0 * decay) for idx in sp.product_cross(xi, d, r_lambda).indices
        )
        return max(total - kept, 0.0)
    sp._check_xi_int(xi, d)
    if family == sp.FOURIER:
        return _fourier_cross_error_sq(decay, d, xi)
    if family == sp.VP:
        return _vp_cross_error_sq(decay, d, xi)
    raise InvalidParamsError(f"unknown family {family!r}")


def _fourier_block_sums(decay: float, levels: int):
    out = [1.0]
    for t in range(1, levels + 1):
        s = np.arange(1 << (t - 1), 1 << t, dtype=float)
        out.append(float(((s + 1.0) ** (-2.0 * decay)).sum()))
    return out


def _fourier_block_tail(decay: float, level: int) -> float:
    start = 0 if level == 0 else (1 << (level - 1))
    return float(hurwitz_zeta(2.0 * decay, start + 1))


def _fourier_cross_error_sq(decay, d, xi) -> float:
    blocks = _fourier_block_sums(decay, xi + 1)

    def comp(dims, budget):
        if budget < 0:
            return float(hurwitz_zeta(2.0 * decay, 1)) ** dims
        if dims == 1:
            return _fourier_block_tail(decay, budget + 1)
        total = _fourier_block_tail(decay, budget + 1) * float(
            hurwitz_zeta(2.0 * decay, 1)
        ) ** (dims - 1)
        for t in range(budget + 1):
            total += blocks[t] * comp(dims - 1, budget - t)
        return total

    return comp(d, xi)


def _vp_cross_error_sq(decay, d, xi) -> float:
    per_level = _axis_level_sums(decay, xi)
    # boxes fully outside the budget contribute their whole mass
    err = _complement_sum(decay, d, xi, per_level)
    # boundary boxes: gains taper, contribution is sum (1 - gain)^2 u per box
    for t in itertools.product(range(xi + 1), repeat=d):
        tot = sum(t)
        if tot > xi or xi - tot >= d:
            continue
        slack = xi - tot
        u_box = 1.0
        for tj in t:
            u_box *= per_level[tj]["u"]
        s1 = 0.0
        s2 = 0.0
        combos = [c for c in itertools.product((0, 1), repeat=d) if sum(c) <= slack]
        for c in combos:
            term = 1.0
            for tj, cj in zip(t, c):
                term *= per_level[tj]["a0" if cj == 0 else "a1"]
            s1 += term
        for c1 in combos:
            for c2 in combos:
                term = 1.0
                for tj, e1, e2 in zip(t, c1, c2):
                    key = "b00" if e1 == 0 and e2 == 0 else ("b11" if e1 == 1 and e2 == 1 else "b01")
                    term *= per_level[tj][key]
                s2 += term
        err += u_box - 2.0 * s1 + s2
    return max(err, 0.0)


def law_tail_sq_outside_box(decay: float, d: int, k_bound: int) -> float:
    """Coefficient mass of the power law outside the box [0, k_bound]^d (exact)."""
    total = float(hurwitz_zeta(2.0 * decay, 1))
    inner = total - float(hurwitz_zeta(2.0 * decay, k_bound + 2))
    # total^d - inner^d evaluated without cancellation
    gap = float(hurwitz_zeta(2.0 * decay, k_bound + 2))
    acc = 0.0
    for j in range(d):
        acc += total**j * inner ** (d - 1 - j)
    return gap * acc


# ---------------------------------------------------------------------------
# approximation error


def _apply_family(coeffs: sp.CoeffTensor, family: str, xi, r_lambda=None) -> sp.CoeffTensor:
    if family == sp.VP:
        return sp.apply_vp_cross(coeffs, xi)
    if family == sp.FOURIER:
        return sp.apply_fourier_cross(coeffs, xi)
    if family == sp.TRUNC:
        if r_lambda is None:
            raise InvalidParamsError("family 'trunc' needs r_lambda")
        return sp.truncate_product_cross(coeffs, xi, r_lambda)
    raise InvalidParamsError(f"unknown family {family!r}")


def family_support_degree(family: str, xi, r_lambda=None) -> int:
    """Largest per-axis degree the operator can output."""
    if family == sp.VP:
        return 2 ** (xi + 1) - 1
    if family == sp.FOURIER:
        return 2**xi
    if family == sp.TRUNC:
        return sp._product_bound(xi, r_lambda) - 1
    raise InvalidParamsError(f"unknown family {family!r}")


def approx_error(
    basis: Basis,
    oracle: FunctionOracle,
    family: str,
    xi,
    *,
    q: float | None = None,
    r_lambda: float | None = None,
    rtol: float = 1e-8,
) -> float:
    """Weighted L_q distance between the oracle and its cross-operator image.

    Power-law members at q = 2 take the exact Hurwitz-tail route; finite or
    tail-described coefficient sets take the coefficient route; everything
    else evaluates the residual pointwise and integrates.
    """
    q = basis.params.q if q is None else q
    if r_lambda is None:
        r_lambda = rate_exponents(basis.params).r_lambda

    if oracle.law_decay is not None and q == 2.0:
        return math.sqrt(product_law_error_sq(oracle.law_decay, oracle.dim, family, xi, r_lambda))

    if oracle.exact_coeffs is not None and q == 2.0:
        coeffs = oracle.exact_coeffs
        image = _apply_family(coeffs, family, xi, r_lambda)
        err_sq = coeffs.subtract(image).l2_norm() ** 2
        if oracle.tail_sq_fn is not None:
            k_box = max(coeffs.support_box())
            tail = oracle.tail_sq_fn(k_box)
            if family_support_degree(family, xi, r_lambda) <= k_box:
                # gains vanish outside the stored box, the tail enters in full
                err_sq += tail
            elif tail <= 2.0 * rtol * err_sq:
                # gains outside the box are unresolved but lie in [0, 1], so
                # the error is bracketed within rtol; take the upper end
                err_sq += tail
            else:
                raise TailDominationError(
                    "operator support exceeds the stored coefficient box and the "
                    "unresolved tail is not negligible"
                )
        return math.sqrt(err_sq)

    # pointwise residual route
    coeffs = oracle.exact_coeffs
    if coeffs is None:
        raise InvalidParamsError("pointwise error route needs exact coefficients")
    image = _apply_family(coeffs, family, xi, r_lambda)
    deg = max(max(coeffs.support_box()), 1)

    if oracle.eval_fn is None:
        residual = coeffs.subtract(image)
        return lq_norm(basis, residual, q, rtol=rtol, degree_hint=deg)

    def residual_values(pts):
        vals = np.asarray(oracle.eval_fn(pts), dtype=float)
        approx = _eval_expansion_points(basis, image, pts)
        return vals - approx

    shim = FunctionOracle(dim=oracle.dim, eval_fn=residual_values)
    return lq_norm(basis, shim, q, rtol=rtol, degree_hint=deg)


def _eval_expansion_points(basis, coeffs, pts) -> np.ndarray:
    """Raw (unweighted) expansion values at scattered points."""
    pts = np.asarray(pts, dtype=float)
    box = coeffs.support_box()
    mats = [basis_matrix(basis.table, max(box[j], 0), pts[:, j]) for j in range(coeffs.dim)]
    out = np.zeros(pts.shape[0])
    for idx, v in coeffs.entries.items():
        term = np.full(pts.shape[0], v)
        for j, k in enumerate(idx):
            term = term * mats[j][k]
        out += term
    return out


# ---------------------------------------------------------------------------
# rate fitting


def fit_rate(samples) -> RateFit:
    """Fit log e = alpha log n + gamma log log n + c by least squares.

    Needs at least four samples with strictly increasing n >= 2 and positive
    errors; the returned residual is the root-mean-square misfit.
    """
    pts = [(float(n), float(e)) for n, e in samples]
    if len(pts) < 4:
        raise InvalidParamsError("need at least 4 samples")
    ns = np.array([p[0] for p in pts])
    es = np.array([p[1] for p in pts])
    if np.any(ns[1:] <= ns[:-1]) or ns[0] < 2 or np.any(es <= 0):
        raise InvalidParamsError("need strictly increasing n >= 2 and positive errors")
    ln = np.log(ns)
    design = np.column_stack([ln, np.log(ln), np.ones_like(ln)])
    if np.linalg.matrix_rank(design) < 3:
        raise InvalidParamsError("degenerate design matrix")
    sol, *_ = np.linalg.lstsq(design, np.log(es), rcond=None)
    resid = np.log(es) - design @ sol
    return RateFit(
        alpha=float(sol[0]),
        gamma=float(sol[1]),
        residual=float(np.sqrt(np.mean(resid**2))),
        intercept=float(sol[2]),
    )


def theory_exponents(params: WeightParams, family: str) -> tuple[float, float]:
    """Predicted (alpha, gamma) of the rank-indexed error for the unit smoothness ball."""
    ex = rate_exponents(params)
    d = params.d
    if family == sp.TRUNC:
        return -ex.r_lambda, ex.r_lambda * (d - 1)
    if params.p == params.q:
        return -ex.r_lambda, (ex.r_lambda + 1.0) * (d - 1)
    if math.isinf(params.q):
        return -ex.r_lambda_pq, (ex.r_lambda_pq + 1.0) * (d - 1)
    return -ex.r_lambda_pq, (ex.r_lambda_pq + 1.0 / params.q) * (d - 1)


# ---------------------------------------------------------------------------
# inequality probes


def _rng_for(seed: int, degree_index: int, trial: int) -> np.random.Generator:
    # counter-based generator; identical streams on every platform
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(degree_index, trial))
    return np.random.Generator(np.random.Philox(ss))


def inequality_probe(
    basis: Basis,
    kind: str,
    degrees,
    trials: int,
    seed: int,
    *,
    q: float | None = None,
    block_levels: int = 3,
    rtol: float = 1e-6,
):
    """Observed constants of the weighted polynomial inequalities.

    For each degree m the probe evaluates the pure top-degree basis element
    plus ``trials`` standard-normal coefficient draws and reports the worst
    ratio: derivative-to-scaled-norm for ``bernstein``, norm-index jump for
    ``nikolskii``, and the block-sum comparison for ``lq_lp_sum``.
    Deterministic for a fixed seed.
    """
    degrees = [int(m) for m in degrees]
    if any(m < 2 for m in degrees) or trials < 1:
        raise InvalidParamsError("need degrees >= 2 and trials >= 1")
    p = basis.params.p
    q = basis.params.q if q is None else q
    lam = basis.params.lam
    rows = []
    for i, m in enumerate(degrees):
        worst = 0.0
        # trial -1 is the deterministic top-degree element, an extremal candidate
        for t in range(-1, trials):
            if kind == "bernstein":
                c = _draw(m, seed, i, t)
                ratio = _bernstein_ratio(basis, c, m, p, lam, rtol)
            elif kind == "nikolskii":
                c = _draw(m, seed, i, t)
                ratio = _nikolskii_ratio(basis, c, m, p, q, lam, rtol)
            elif kind == "lq_lp_sum":
                if t < 0:
                    continue
                rng = _rng_for(seed, i, t)
                ratio = _block_sum_ratio(basis, m, p, q, block_levels, rng, rtol)
            else:
                raise InvalidParamsError(f"unknown probe kind {kind!r}")
            worst = max(worst, ratio)
        rows.append((m, worst))
    return rows


def _draw(m: int, seed: int, degree_index: int, trial: int) -> np.ndarray:
    if trial < 0:
        c = np.zeros(m + 1)
        c[m] = 1.0
        return c
    return _rng_for(seed, degree_index, trial).standard_normal(m + 1)


def _norm_1d(basis, cvec, p, rtol) -> float:
    coeffs = sp.CoeffTensor(1, {(k,): float(v) for k, v in enumerate(cvec) if v != 0.0})
    return lq_norm(basis, coeffs, p, rtol=rtol)


def _bernstein_ratio(basis, c, m, p, lam, rtol) -> float:
    dmat = basis.diff_matrix(basis.table.size - 1)
    dc = dmat[: m + 1, : m + 1] @ c
    num = _norm_1d(basis, dc, p, rtol)
    den = m ** (1.0 - 1.0 / lam) * _norm_1d(basis, c, p, rtol)
    return num / den


def _nikolskii_ratio(basis, c, m, p, q, lam, rtol) -> float:
    if p == q:
        raise InvalidParamsError("nikolskii probe needs p != q")
    expo = (
        (1.0 - 1.0 / lam) * (1.0 / p - (0.0 if math.isinf(q) else 1.0 / q))
        if p < q
        else (1.0 / lam) * (1.0 / q - (0.0 if math.isinf(p) else 1.0 / p))
    )
    num = _norm_1d(basis, c, q, rtol)
    den = m**expo * _norm_1d(basis, c, p, rtol)
    return num / den


def _block_sum_ratio(basis, m, p, q, levels, rng, rtol) -> float:
    if p == q or math.isinf(p) or math.isinf(q):
        raise InvalidParamsError("block-sum probe needs finite p != q")
    d = basis.params.d
    delta = rate_exponents(basis.params.with_indices(p, q)).delta
    box = (min(m, 2**levels),) * d
    entries = {}
    for idx in itertools.product(*(range(b + 1) for b in box)):
        entries[idx] = float(rng.standard_normal())
    f = sp.CoeffTensor(d, entries)
    num = lq_norm(basis, f, q, rtol=rtol)
    acc = 0.0
    for t in itertools.product(range(levels + 1), repeat=d):
        block = sp.tensor_apply(f, [sp.fourier_block_multiplier(1, tj) for tj in t])
        if not block.entries:
            continue
        term = 2.0 ** (delta * sum(t)) * lq_norm(basis, block, p, rtol=rtol)
        acc += term**q
    rhs = acc ** (1.0 / q)
    return num / rhs
