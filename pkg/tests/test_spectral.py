import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from freudhc import spectral as sp
from freudhc.errors import InvalidParamsError, NoAdmissibleParameterError


def random_tensor(rng, dim, top, count=12):
    entries = {}
    for _ in range(count):
        idx = tuple(int(rng.integers(0, top)) for _ in range(dim))
        entries[idx] = float(rng.standard_normal())
    return sp.CoeffTensor(dim, entries)


# --- one-dimensional gain profiles ------------------------------------------


def test_fourier_multiplier_examples():
    m = sp.fourier_multiplier(1)
    assert m.gain(0) == 1.0 and m.gain(1) == 0.0
    m = sp.fourier_multiplier(3)
    assert m.gain(2) == 1.0 and m.gain(3) == 0.0
    assert m.support_bound == 3


def test_fourier_idempotent(rng):
    c = random_tensor(rng, 1, 12)
    m = [sp.fourier_multiplier(5)]
    once = sp.tensor_apply(c, m)
    twice = sp.tensor_apply(once, m)
    assert twice.entries == once.entries


def test_vp_multiplier_examples():
    assert sp.vp_multiplier(1).gains == (1.0, 1.0)
    assert sp.vp_multiplier(2).gains == (1.0, 1.0, 1.0, 0.5)
    v = sp.vp_multiplier(8)
    assert all(v.gain(j) == 1.0 for j in range(9))
    assert v.gain(12) == (16 - 12) / 8
    assert v.support_bound == 16


def test_vp_equals_averaged_partial_sums(rng):
    for m in (1, 2, 3, 7, 16, 33, 64):
        c = rng.standard_normal(2 * m + 3)
        direct = sp.vp_multiplier(m).gain_array(len(c)) * c
        acc = np.zeros_like(c)
        for k in range(m + 1, 2 * m + 1):
            acc += sp.fourier_multiplier(k).gain_array(len(c)) * c
        acc /= m
        assert np.max(np.abs(direct - acc)) <= 1e-14 * max(1.0, np.max(np.abs(c)))


def test_vp_block_examples():
    assert sp.vp_block_multiplier(1, 1).gains == (0.0, 0.0, 1.0, 0.5)
    assert sp.vp_block_multiplier(1, 3).gain(4) == 0.0
    assert sp.vp_block_multiplier(1, 0).gains == sp.vp_multiplier(1).gains
    # support is contained in (m 2^(k-1), m 2^(k+1) - 1]
    for m, k in ((1, 2), (3, 1), (2, 4)):
        blk = sp.vp_block_multiplier(m, k)
        lo, hi = m * 2 ** (k - 1), m * 2 ** (k + 1) - 1
        assert all(blk.gain(j) == 0.0 for j in range(0, lo + 1))
        assert blk.support_bound <= hi + 1


def test_fourier_block_partition():
    # blocks {0}, {1}, {2,3}, {4..7}, ... partition the degree axis
    cover = np.zeros(64)
    for k in range(0, 7):
        cover += sp.fourier_block_multiplier(1, k).gain_array(64)
    assert np.all(cover == 1.0)
    blk = sp.fourier_block_multiplier(1, 2)
    assert blk.gain(3) == 1.0 and blk.gain(1) == 0.0
    assert set(sp.fourier_block_multiplier(2, 3).gains) <= {0.0, 1.0}


@given(st.integers(1, 40), st.integers(0, 6), st.integers(0, 90))
def test_gains_lie_in_unit_interval(m, k, j):
    for mult in (
        sp.fourier_multiplier(m),
        sp.vp_multiplier(m),
        sp.vp_block_multiplier(m, k),
        sp.fourier_block_multiplier(m, k),
        sp.vp_residual_multiplier(k),
    ):
        assert 0.0 <= mult.gain(j) <= 1.0


@settings(max_examples=25)
@given(st.integers(1, 6), st.integers(0, 12))
def test_block_telescoping(m, cap):
    top = m * 2 ** (cap + 1) + 2
    acc = np.zeros(top)
    for k in range(cap + 1):
        acc += sp.vp_block_multiplier(m, k).gain_array(top)
    assert np.array_equal(acc, sp.vp_multiplier(m * 2**cap).gain_array(top))
    acc = np.zeros(top)
    for k in range(cap + 1):
        acc += sp.fourier_block_multiplier(m, k).gain_array(top)
    assert np.array_equal(acc, sp.fourier_multiplier(m * 2**cap).gain_array(top))


def test_residual_multiplier():
    e0 = sp.vp_residual_multiplier(0)
    assert e0.gain(0) == 0.0 and e0.gain(1) == 0.0 and e0.gain(2) == 1.0 and e0.gain(99) == 1.0
    assert e0.support_bound is None
    # residual then reproduction-range projection annihilates low degrees
    k = 2
    e = sp.vp_residual_multiplier(k)
    v = sp.vp_multiplier(2**k)
    assert all(e.gain(j) * v.gain(j) == 0.0 for j in range(2**k + 1))


def test_residual_annihilates_box_polynomials(rng):
    k = (1, 2)
    c = sp.CoeffTensor(
        2,
        {
            (i, j): float(rng.standard_normal())
            for i in range(2 ** k[0] + 1)
            for j in range(2 ** k[1] + 1)
        },
    )
    out = sp.tensor_apply(c, [sp.vp_residual_multiplier(k[0]), sp.vp_residual_multiplier(k[1])])
    assert out.entries == {}


# --- tensor application ------------------------------------------------------


def test_tensor_apply_examples(rng):
    c = sp.CoeffTensor(2, {(3, 3): 1.0})
    v1 = sp.vp_block_multiplier(1, 1)
    out = sp.tensor_apply(c, [v1, v1])
    assert out.entries == {(3, 3): 0.25}

    box = random_tensor(rng, 2, 6)
    ident = sp.fourier_multiplier(6)
    restricted = sp.tensor_apply(box, [ident, ident])
    assert restricted.entries == {
        k: v for k, v in box.entries.items() if max(k) < 6
    }

    with pytest.raises(InvalidParamsError):
        sp.tensor_apply(box, [ident])


def test_tensor_apply_order_irrelevant(rng):
    c = random_tensor(rng, 2, 10, count=20)
    a = sp.vp_multiplier(3)
    b = sp.fourier_multiplier(5)
    ident = sp.Multiplier1D((1.0,), tail=1.0)
    ab = sp.tensor_apply(sp.tensor_apply(c, [a, ident]), [ident, b])
    ba = sp.tensor_apply(sp.tensor_apply(c, [ident, b]), [a, ident])
    assert ab.entries.keys() == ba.entries.keys()
    for k in ab.entries:
        assert ab.entries[k] == pytest.approx(ba.entries[k], abs=1e-16)


# --- index sets --------------------------------------------------------------


def test_vp_cross_support_examples():
    h = sp.vp_cross_support(0, 1)
    assert sorted(h.indices) == [(0,), (1,)]
    assert len(sp.vp_cross_support(1, 2)) == 12
    # cardinality formula against explicit enumeration
    for d in (1, 2, 3):
        for xi in range(0, 7 if d < 3 else 6):
            assert len(sp.vp_cross_support(xi, d)) == sp.vp_cross_size(xi, d)
            assert len(sp.fourier_cross_support(xi, d)) == sp.fourier_cross_size(xi, d)


def test_vp_cross_rank_growth():
    for d in (2, 3):
        ratios = [sp.vp_cross_size(xi, d) / (2.0**xi * xi ** (d - 1)) for xi in range(4, 15)]
        assert max(ratios) / min(ratios) <= 10.0


def test_product_cross_examples():
    g = sp.product_cross(3.0, 2, 1.0)
    assert sorted(g.indices) == [(0, 0), (0, 1), (0, 2), (1, 0), (2, 0)]
    for xi in (1.0, 2.0, 5.0, 17.0):
        assert sp.product_cross_size(xi, 1, 1.0) == math.floor(xi)
    # d = 2 growth envelope xi log xi
    vals = [sp.product_cross_size(2.0**j, 2, 1.0) / (2.0**j * j * math.log(2)) for j in range(4, 15)]
    assert max(vals) / min(vals) <= 10.0


def test_product_cross_fractional_exponent():
    r_lambda = 1.5
    for xi in (1.0, 2.0**1.5, 6.0**1.5):
        members = sp.product_cross(xi, 2, r_lambda)
        for idx in members:
            assert sp.index_weight(idx, r_lambda) <= xi * (1 + 1e-9)
    # boundary indices are kept when xi equals an attained weight
    xi = sp.index_weight((1, 2), r_lambda)
    assert (1, 2) in sp.product_cross(xi, 2, r_lambda)


def test_product_cross_enumeration_guard():
    # parameters whose integer bound would be astronomical must refuse fast
    with pytest.raises(InvalidParamsError):
        sp.product_cross(1e9, 2, 0.1)
    with pytest.raises(InvalidParamsError):
        sp.product_cross_size(1e30, 2, 1.0)


def test_downward_closure():
    for d in (1, 2, 3):
        for builder in (
            lambda: sp.vp_cross_support(4 if d < 3 else 3, d),
            lambda: sp.fourier_cross_support(4 if d < 3 else 3, d),
            lambda: sp.product_cross(9.0, d, 1.0),
        ):
            s = builder()
            for idx in s.indices:
                for axis in range(d):
                    if idx[axis] > 0:
                        lower = idx[:axis] + (idx[axis] - 1,) + idx[axis + 1 :]
                        assert lower in s


# --- cross operators ---------------------------------------------------------


def test_vp_cross_gain_examples():
    assert sp.vp_cross_gain(1, 2, (0, 0)) == 1.0
    assert sp.vp_cross_gain(1, 2, (1, 2)) == 1.0
    assert sp.vp_cross_gain(1, 2, (0, 3)) == 0.5
    assert sp.vp_cross_gain(1, 2, (2, 2)) == 0.0


def test_vp_cross_gain_matches_level_sum():
    # the shortcut with at most two live levels per axis must equal the full sum
    rngs = range(0, 18)
    for d, xi in ((1, 4), (2, 3), (2, 5)):
        for idx in itertools.product(rngs, repeat=d):
            direct = sp.vp_cross_gain(xi, d, idx)
            full = 0.0
            for k in itertools.product(range(xi + 1), repeat=d):
                if sum(k) <= xi:
                    term = 1.0
                    for kj, sj in zip(k, idx):
                        term *= sp.vp_block_multiplier(1, kj).gain(sj)
                    full += term
            assert direct == pytest.approx(full, abs=1e-14)


def test_vp_cross_gain_large_budget_spot_checks():
    # a few distant indices at a big budget, against the full level sum
    xi, d = 9, 2
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(31)))
    for _ in range(25):
        idx = (int(rng.integers(0, 1100)), int(rng.integers(0, 1100)))
        direct = sp.vp_cross_gain(xi, d, idx)
        full = 0.0
        for k1 in range(xi + 1):
            g1 = sp.vp_block_multiplier(1, k1).gain(idx[0])
            if g1 == 0.0:
                continue
            for k2 in range(xi + 1 - k1):
                full += g1 * sp.vp_block_multiplier(1, k2).gain(idx[1])
        assert direct == pytest.approx(full, abs=1e-14)


def test_fourier_cross_gain_is_block_indicator():
    for d in (1, 2, 3):
        for xi in range(0, 7 if d < 3 else 5):
            for idx in itertools.product(range(0, 2**xi + 2), repeat=d):
                g = sp.fourier_cross_gain(xi, d, idx)
                assert g in (0.0, 1.0)
                full = 0.0
                for k in itertools.product(range(xi + 1), repeat=d):
                    if sum(k) <= xi:
                        term = 1.0
                        for kj, sj in zip(k, idx):
                            term *= sp.fourier_block_multiplier(1, kj).gain(sj)
                        full += term
                assert g == full
            if d == 3 and xi >= 4:
                break


def test_vp_cross_apply_support(rng):
    c = random_tensor(rng, 2, 40, count=60)
    xi = 3
    out = sp.apply_vp_cross(c, xi)
    support = sp.vp_cross_support(xi, 2)
    assert all(idx in support for idx in out.entries)
    # d = 1 equals the scale-2^xi taper operator
    c1 = random_tensor(rng, 1, 40, count=25)
    out1 = sp.apply_vp_cross(c1, 4)
    ref = sp.tensor_apply(c1, [sp.vp_multiplier(16)])
    assert out1.entries == pytest.approx(ref.entries)


def test_fourier_cross_apply(rng):
    c1 = random_tensor(rng, 1, 40, count=25)
    assert sp.apply_fourier_cross(c1, 4).entries == sp.tensor_apply(
        c1, [sp.fourier_multiplier(16)]
    ).entries
    c = random_tensor(rng, 2, 12, count=30)
    once = sp.apply_fourier_cross(c, 3)
    assert sp.apply_fourier_cross(once, 3).entries == once.entries


def test_truncate_product_cross(rng):
    c = random_tensor(rng, 2, 8, count=30)
    big = sp.truncate_product_cross(c, 1e9, 1.0)
    assert big.entries == c.entries
    out = sp.truncate_product_cross(sp.CoeffTensor(2, {(1, 1): 1.0}), 3.0, 1.0)
    assert out.entries == {}


def test_operator_rank_and_largest_parameter():
    assert sp.operator_rank(sp.VP, 0, 1) == 2
    for n in (2, 4, 9, 31, 1024):
        xi = sp.largest_cross_parameter(n, sp.VP, 1)
        assert xi == math.floor(math.log2(n / 2))
    assert sp.largest_cross_parameter(5, sp.TRUNC, 2, 1.0) == 3.0
    assert sp.largest_cross_parameter(8, sp.TRUNC, 2, 1.0) == 4.0

    for family in (sp.VP, sp.FOURIER):
        ranks = [sp.operator_rank(family, xi, 2) for xi in range(10)]
        assert all(b >= a for a, b in zip(ranks, ranks[1:]))

    with pytest.raises(NoAdmissibleParameterError):
        sp.largest_cross_parameter(3, sp.VP, 2)  # minimal rank is 4
    with pytest.raises(NoAdmissibleParameterError):
        sp.largest_cross_parameter(0, sp.TRUNC, 1, 1.0)


def test_coeff_csv_roundtrip(tmp_path, rng):
    c = random_tensor(rng, 2, 9, count=15)
    path = tmp_path / "coeffs.csv"
    sp.write_coeff_csv(c, path)
    lines = path.read_text().splitlines()
    assert lines == sorted(lines, key=lambda l: tuple(int(t) for t in l.split(",")[:2]))
    back = sp.read_coeff_csv(path)
    assert back.entries == c.entries

    iset = sp.product_cross(4.0, 2, 1.0)
    ipath = tmp_path / "iset.csv"
    sp.write_index_csv(iset, ipath)
    rows = {tuple(int(t) for t in l.split(",")) for l in ipath.read_text().splitlines()}
    assert rows == set(iset.indices)


def test_coeff_tensor_contracts(rng):
    c = random_tensor(rng, 2, 6, count=10)
    assert c.l2_norm() == pytest.approx(
        math.sqrt(sum(v * v for v in c.entries.values())), rel=1e-15
    )
    items = c.items_sorted()
    assert items == sorted(items)
    with pytest.raises(InvalidParamsError):
        sp.CoeffTensor(2, {(0, -1): 1.0})
    with pytest.raises(InvalidParamsError):
        sp.CoeffTensor(1, {(0, 1): 1.0})
    diff = c.subtract(c)
    assert diff.entries == {}
