import math

import mpmath as mp
import numpy as np
import pytest

from freudhc.errors import InvalidParamsError
from freudhc.orthopoly import (
    RecurrenceTable,
    basis_matrix,
    differentiation_matrix,
    eval_orthonormal,
    eval_orthonormal_scaled,
    gauss_rule,
    hermite_recurrence,
    stieltjes_recurrence,
    string_equation_residual,
    weighted_basis_matrix,
)
from freudhc.weights import WeightParams


def test_hermite_closed_form_values(gauss_params, hermite_table):
    assert hermite_table.beta[0] == pytest.approx(math.sqrt(math.pi), rel=1e-15)
    assert hermite_table.beta[1] == pytest.approx(0.5, rel=1e-15)
    assert hermite_table.beta[2] == pytest.approx(1.0, rel=1e-15)
    assert hermite_table.zeroth_norm == pytest.approx(math.pi**0.25, rel=1e-15)
    assert hermite_recurrence(WeightParams(lam=2, a=1.0), 3).beta[1] == pytest.approx(0.25)
    with pytest.raises(InvalidParamsError):
        hermite_recurrence(WeightParams(lam=4, a=1.0), 3)


def test_stieltjes_matches_hermite(gauss_params):
    closed = hermite_recurrence(gauss_params, 20)
    general = stieltjes_recurrence(gauss_params, 20)
    assert np.max(np.abs(general.beta - closed.beta) / closed.beta) < 1e-13


def test_stieltjes_quartic_beta1(quartic_table):
    # beta_1 = Gamma(3/4) / Gamma(1/4) for the normalized quartic weight
    ref = math.gamma(0.75) / math.gamma(0.25)
    assert quartic_table.beta[1] == pytest.approx(ref, rel=1e-13)
    assert ref == pytest.approx(0.3379894, abs=5e-7)


def test_stieltjes_mass_any_lambda():
    for lam in (1.5, 2.5, 3.0):
        params = WeightParams(lam=lam, a=0.9, b=0.1)
        table = stieltjes_recurrence(params, 0)
        mp.mp.dps = 30
        ref = 2 * math.exp(2 * 0.1) * float(
            mp.quad(lambda t: mp.e ** (-2 * 0.9 * t**lam), [0, mp.inf])
        )
        assert table.beta[0] == pytest.approx(ref, rel=1e-12)


def test_string_equation(quartic_table):
    assert string_equation_residual(quartic_table) <= 1e-9

    # sensitivity: a 1e-3 bump in beta_1 must show up at least that large
    beta = quartic_table.beta.copy()
    beta[1] += 1e-3
    bad = RecurrenceTable(4.0, 0.5, 0.0, beta)
    assert string_equation_residual(bad) >= 1e-3

    # boundary: a minimal table evaluates the relation only at n = 1
    tiny = RecurrenceTable(4.0, 0.5, 0.0, quartic_table.beta[:3].copy())
    assert string_equation_residual(tiny) == pytest.approx(
        string_equation_residual(quartic_table, 1)
    )
    with pytest.raises(InvalidParamsError):
        string_equation_residual(RecurrenceTable(2.0, 0.5, 0.0, np.array([1.0, 0.5, 1.0])))


def test_b_shift_covariance():
    base = WeightParams(lam=3.0, a=1.0, b=0.0)
    shifted = WeightParams(lam=3.0, a=1.0, b=0.7)
    t0 = stieltjes_recurrence(base, 12)
    t1 = stieltjes_recurrence(shifted, 12)
    assert t1.beta[0] / t0.beta[0] == pytest.approx(math.exp(2 * 0.7), rel=1e-12)
    assert np.max(np.abs(t1.beta[1:] - t0.beta[1:]) / t0.beta[1:]) < 1e-12


def test_gauss_rule_basics(hermite_table):
    rule1 = gauss_rule(hermite_table, 1)
    assert rule1.nodes.tolist() == [0.0]
    assert rule1.weights[0] == pytest.approx(math.sqrt(math.pi), rel=1e-15)

    rule = gauss_rule(hermite_table, 4)
    vals = basis_matrix(hermite_table, 3, rule.nodes)
    assert np.dot(rule.weights, vals[3] ** 2) == pytest.approx(1.0, abs=1e-12)

    for n in (2, 5, 12, 40):
        r = gauss_rule(hermite_table, n)
        assert np.all(r.weights > 0)
        assert abs(r.weights.sum() - hermite_table.beta[0]) <= 1e-13 * hermite_table.beta[0]
        assert np.allclose(r.nodes, -r.nodes[::-1])
        # odd monomials integrate to zero by symmetry
        for j in (1, 3, 5):
            assert abs(np.dot(r.weights, r.nodes**j)) < 1e-13


def test_gauss_rule_exactness_against_moments(hermite_table):
    # even moments of exp(-x^2): integral x^{2m} = Gamma(m + 1/2)
    rule = gauss_rule(hermite_table, 8)
    for m in range(0, 8):
        ref = math.gamma(m + 0.5)
        val = float(np.dot(rule.weights, rule.nodes ** (2 * m)))
        assert val == pytest.approx(ref, rel=1e-13)


def test_node_interlacing(hermite_table, quartic_table):
    for table in (hermite_table, quartic_table):
        for n in (2, 5, 11, 23):
            a = gauss_rule(table, n).nodes
            b = gauss_rule(table, n + 1).nodes
            assert all(b[i] < a[i] < b[i + 1] for i in range(n))


def test_eval_orthonormal_values(hermite_table):
    pi4 = math.pi ** (-0.25)
    assert eval_orthonormal(hermite_table, 0, 3.3) == pytest.approx(pi4, rel=1e-15)
    assert eval_orthonormal(hermite_table, 1, 1.0) == pytest.approx(math.sqrt(2) * pi4, rel=1e-14)
    assert math.sqrt(2) * pi4 == pytest.approx(1.0622, abs=1e-4)

    nodes = gauss_rule(hermite_table, 5).nodes
    vals = basis_matrix(hermite_table, 5, nodes)
    scale = np.max(np.abs(vals[:5]), axis=0)
    assert np.all(np.abs(vals[5]) <= 1e-10 * scale)


def test_eval_scaled_consistency(hermite_table):
    x = np.array([0.3, 2.0, 9.0])
    direct = np.array([eval_orthonormal(hermite_table, 30, float(v)) for v in x])
    mant, expo = eval_orthonormal_scaled(hermite_table, 30, x)
    assert np.allclose(mant * np.exp2(expo.astype(float)), direct, rtol=1e-12)

    # far outside the oscillatory region the plain values overflow, the scaled pair stays finite
    huge = eval_orthonormal(hermite_table, 140, 1.0e3)
    assert not math.isfinite(huge)
    mant, expo = eval_orthonormal_scaled(hermite_table, 140, np.array([1.0e3]))
    assert np.isfinite(mant[0]) and expo[0] > 0


def test_weighted_basis_is_bounded(hermite_table):
    x = np.linspace(-40, 40, 401)
    wb = weighted_basis_matrix(hermite_table, 120, x)
    assert np.all(np.isfinite(wb))
    assert np.max(np.abs(wb)) < 10.0


def test_differentiation_matrix_hermite(hermite_table):
    n = 40
    dmat = differentiation_matrix(hermite_table, n)
    for k in range(1, n + 1):
        expected = np.zeros(n + 1)
        expected[k - 1] = math.sqrt(2.0 * k)
        assert np.max(np.abs(dmat[:, k] - expected)) < 1e-12 * math.sqrt(2 * k)
    assert np.max(np.abs(dmat[np.tril_indices(n + 1)])) == 0.0


def test_differentiation_matrix_quartic_finite_difference(quartic_table):
    n = 18
    dmat = differentiation_matrix(quartic_table, n)
    xs = np.linspace(-1.4, 1.4, 9)
    h = 1.5e-4
    vals = basis_matrix(quartic_table, n, xs)
    scale = np.max(np.abs(vals))
    # fourth-order central stencil keeps the reference itself below 1e-10 * scale
    fd = (
        8.0 * (basis_matrix(quartic_table, n, xs + h) - basis_matrix(quartic_table, n, xs - h))
        - (basis_matrix(quartic_table, n, xs + 2 * h) - basis_matrix(quartic_table, n, xs - 2 * h))
    ) / (12.0 * h)
    recon = dmat.T @ vals
    assert np.max(np.abs(recon - fd)) <= 1e-9 * scale


def test_orthonormality_sweep(quartic_table):
    worst = 0.0
    for n in (3, 10, 25, 55):
        rule = gauss_rule(quartic_table, n)
        kmax = min(quartic_table.size, 2 * n - 1)
        vals = basis_matrix(quartic_table, kmax, rule.nodes)
        gram = (vals * rule.weights) @ vals.T - np.eye(kmax + 1)
        for i in range(kmax + 1):
            jhi = min(kmax, 2 * n - 1 - i)
            if jhi >= 0:
                worst = max(worst, float(np.max(np.abs(gram[i, : jhi + 1]))))
    assert worst <= 1e-10
