"""Vectorized double-double arithmetic used by the recurrence constructor.

A value is an unevaluated (hi, lo) pair of float64 arrays with |lo| no larger
than half an ulp of hi.  The classical error-free transforms (Knuth two-sum,
Dekker split product) give roughly 32 significant digits, which keeps a
hundred Stieltjes steps far below the quadrature discretization error.
"""

from __future__ import annotations

import math

import numpy as np

_SPLITTER = 134217729.0  # 2**27 + 1


def two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def quick_two_sum(a, b):
    # requires |a| >= |b| componentwise
    s = a + b
    return s, b - (s - a)


def two_prod(a, b):
    p = a * b
    ta = _SPLITTER * a
    ah = ta - (ta - a)
    al = a - ah
    tb = _SPLITTER * b
    bh = tb - (tb - b)
    bl = b - bh
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def dd_add(xh, xl, yh, yl):
    s, e = two_sum(xh, yh)
    return quick_two_sum(s, e + (xl + yl))


def dd_sub(xh, xl, yh, yl):
    return dd_add(xh, xl, -yh, -yl)


def dd_mul(xh, xl, yh, yl):
    p, e = two_prod(xh, yh)
    return quick_two_sum(p, e + (xh * yl + xl * yh))


def dd_mul_f(xh, xl, f):
    # multiply by a plain float64 array
    p, e = two_prod(xh, f)
    return quick_two_sum(p, e + xl * f)


def dd_sum(hi, lo, axis=-1):
    """Pairwise tree reduction of (hi, lo) along an axis, staying in dd."""
    h = np.moveaxis(np.asarray(hi, dtype=float), axis, -1)
    l = np.moveaxis(np.asarray(lo, dtype=float), axis, -1)
    while h.shape[-1] > 1:
        n = h.shape[-1]
        if n % 2:
            pad = [(0, 0)] * (h.ndim - 1) + [(0, 1)]
            h = np.pad(h, pad)
            l = np.pad(l, pad)
        h, l = dd_add(h[..., 0::2], l[..., 0::2], h[..., 1::2], l[..., 1::2])
    return h[..., 0], l[..., 0]


def dd_dot(xh, xl, yh, yl, axis=-1):
    ph, pl = dd_mul(xh, xl, yh, yl)
    return dd_sum(ph, pl, axis=axis)


def dd_sqrt_scalar(h, l):
    """Square root of a positive dd scalar via one Newton correction."""
    if h <= 0.0:
        raise ValueError(f"dd_sqrt_scalar needs a positive value, got {h}")
    s = math.sqrt(h)
    p, pe = two_prod(np.float64(s), np.float64(s))
    rh, rl = dd_add(np.float64(h), np.float64(l), -p, -pe)
    corr = float(rh) / (2.0 * s)
    return quick_two_sum(np.float64(s), np.float64(corr))


def dd_recip_scalar(h, l):
    """Reciprocal of a nonzero dd scalar."""
    q0 = 1.0 / h
    ph, pl = dd_mul_f(np.float64(h), np.float64(l), np.float64(q0))
    rh, _ = dd_add(np.float64(1.0), np.float64(0.0), -ph, -pl)
    return quick_two_sum(np.float64(q0), np.float64(float(rh) / h))
