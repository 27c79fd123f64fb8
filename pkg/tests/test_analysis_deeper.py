"""Heavier cross-validation of the exact error machinery and norm routes."""

import itertools
import math

import numpy as np
import pytest
from scipy.special import zeta as hurwitz_zeta

from freudhc import analysis as an
from freudhc import spectral as sp
from freudhc.errors import InvalidParamsError
from freudhc.orthopoly import stieltjes_recurrence
from freudhc.weights import WeightParams


def test_vp_error_formula_matches_dense_enumeration_at_scale():
    # dense 1024^2 box plus factorized outside mass, one digit short of exact
    decay, d, xi = 1.5, 2, 8
    top = 2 ** (xi + 1)  # covers every taper box
    s = np.arange(top + 1, dtype=float)
    u = (s + 1.0) ** (-2 * decay)
    kappa = np.array([sp.box_level(int(v)) for v in s])
    theta = np.array([sp.vp_level_weight(int(v)) for v in s])

    lam = np.zeros((top + 1, top + 1))
    for c1 in (0, 1):
        w1 = theta if c1 == 0 else 1.0 - theta
        for c2 in (0, 1):
            w2 = theta if c2 == 0 else 1.0 - theta
            admissible = (kappa[:, None] + c1 + kappa[None, :] + c2) <= xi
            lam += np.where(admissible, w1[:, None] * w2[None, :], 0.0)
    dense = float(np.sum((1.0 - lam) ** 2 * (u[:, None] * u[None, :])))
    dense += an.law_tail_sq_outside_box(decay, 2, top)

    exact = an.product_law_error_sq(decay, d, sp.VP, xi)
    assert exact == pytest.approx(dense, rel=1e-11)


def test_law_error_3d_against_brute_force():
    decay = 1.5
    top = 64
    s = np.arange(top + 1, dtype=float)
    u = (s + 1.0) ** (-2 * decay)
    for family, xi in ((sp.VP, 2), (sp.FOURIER, 3)):
        exact = an.product_law_error_sq(decay, 3, family, xi)
        gain = sp.vp_cross_gain if family == sp.VP else sp.fourier_cross_gain
        inside = 0.0
        for idx in itertools.product(range(top + 1), repeat=3):
            g = gain(xi, 3, idx)
            if g != 1.0:
                inside += (1.0 - g) ** 2 * u[idx[0]] * u[idx[1]] * u[idx[2]]
        brute = inside + an.law_tail_sq_outside_box(decay, 3, top)
        assert exact == pytest.approx(brute, rel=1e-9)


def test_quartic_weight_norm_dual_route():
    params = WeightParams(lam=4.0, a=0.5, d=1, r=2)
    basis = an.Basis(params, stieltjes_recurrence(params, 40))
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(77)))
    c = rng.standard_normal(12)
    coeffs = sp.CoeffTensor(1, {(k,): float(v) for k, v in enumerate(c)})
    exact = an.parseval_norm(coeffs)
    quad = an._lq_norm_1d_expansion(
        basis, coeffs, 2.0, basis.truncation_radius(11), 1e-10
    )
    assert quad == pytest.approx(exact, rel=1e-8)
    # odd-index norm as well, exercising the quartic weighted recurrence
    sup = an.lq_norm(basis, coeffs, math.inf)
    assert 0 < sup < 10 * exact


def test_sobolev_inf_norm_is_max_over_family(hermite_basis):
    coeffs = sp.CoeffTensor(1, {(0,): 1.0, (3,): 0.5})
    vals = []
    for order in range(3):
        dc = an.derivative_coeffs(hermite_basis, coeffs, (order,))
        vals.append(an.lq_norm(hermite_basis, dc, math.inf))
    combined = an.sobolev_norm(hermite_basis, coeffs, r=2, p=math.inf)
    assert combined == pytest.approx(max(vals), rel=1e-12)


def test_empty_tensor_edges(hermite_basis):
    empty = sp.CoeffTensor(1, {})
    assert empty.l2_norm() == 0.0
    assert sp.apply_vp_cross(empty, 3).entries == {}
    out = sp.tensor_apply(empty, [sp.vp_multiplier(2)])
    assert out.entries == {}


def test_law_tail_positive_formula_vs_naive():
    # the factorized tail equals the naive difference where the latter is stable
    for decay in (1.0, 2.5):
        for d in (1, 2, 3):
            for K in (4, 32):
                total = float(hurwitz_zeta(2 * decay, 1))
                inner = total - float(hurwitz_zeta(2 * decay, K + 2))
                naive = total**d - inner**d
                assert an.law_tail_sq_outside_box(decay, d, K) == pytest.approx(
                    naive, rel=1e-10
                )


def test_product_law_error_requires_square_summable():
    with pytest.raises(InvalidParamsError):
        an.product_law_error_sq(0.5, 1, sp.VP, 3)


def test_xi_zero_cross_operators(rng):
    c = sp.CoeffTensor(2, {(0, 0): 1.0, (1, 1): 2.0, (2, 0): 3.0})
    out = sp.apply_vp_cross(c, 0)
    # budget zero reproduces only the 2x2 corner box
    assert out.get((0, 0)) == 1.0 and out.get((1, 1)) == 2.0 and out.get((2, 0)) == 0.0
    # the step-cross operator at budget zero keeps the constant only (its
    # index-set rank bound is larger than the actual operator support)
    out = sp.apply_fourier_cross(c, 0)
    assert out.entries == {(0, 0): 1.0}
    assert sp.fourier_cross_size(0, 2) == 4
