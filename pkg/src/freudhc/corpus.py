"""The test-function corpus: finite expansions, power-law coefficients, Gaussians.

Shipped as a JSON config next to the package.  Three kinds of members:
explicit coefficient expansions, product power laws f_hat(k) = prod
(k_j+1)^(-s), and Gaussians exp(-c |x|_2^2) whose expansion coefficients for
the lam = 2, a = 1/2, b = 0 weight have a closed form.  Membership in the
smoothness space is tagged numerically from the growth of the
coefficient-weighted norm across nested boxes.
"""

from __future__ import annotations

import itertools
import json
import math
from importlib import resources

import numpy as np

from . import spectral as sp
from .analysis import FunctionOracle, coeff_smoothness_norm, law_tail_sq_outside_box
from .errors import InvalidParamsError
from .weights import WeightParams, rate_exponents

DEFAULT_GAUSSIAN_WEIGHT = dict(lam=2.0, a=0.5, b=0.0)


def default_params(d: int = 1, r: int = 2) -> WeightParams:
    return WeightParams(lam=2.0, a=0.5, b=0.0, d=d, r=r, p=2.0, q=2.0)


def gaussian_coeff_1d(c: float, k: int) -> float:
    """Closed-form expansion coefficient of exp(-c x^2) for the default weight.

    Odd coefficients vanish; for k = 2m the value is
    pi^(1/4) / sqrt(1+c) * (-c/(1+c))^m * sqrt((2m)!) / (m! 2^m).
    """
    if k % 2:
        return 0.0
    m = k // 2
    theta = c / (1.0 + c)
    logmag = (
        0.25 * math.log(math.pi)
        - 0.5 * math.log1p(c)
        + m * math.log(theta)
        + 0.5 * math.lgamma(2 * m + 1)
        - math.lgamma(m + 1)
        - m * math.log(2.0)
    )
    return (-1.0) ** m * math.exp(logmag)


def gaussian_total_sq_1d(c: float) -> float:
    """Squared weighted-L2 norm of exp(-c x^2): sqrt(pi / (1 + 2c))."""
    return math.sqrt(math.pi / (1.0 + 2.0 * c))


def gaussian_tail_sq(c: float, dim: int, k_bound: int) -> float:
    """Coefficient mass of the Gaussian outside the box [0, k_bound]^dim."""
    total = gaussian_total_sq_1d(c)
    tail = 0.0
    k = k_bound + 1
    while True:
        term = gaussian_coeff_1d(c, k) ** 2 + gaussian_coeff_1d(c, k + 1) ** 2
        tail += term
        k += 2
        if term < 1e-320 or k > k_bound + 600:
            break
    inner = total - tail
    acc = sum(total**j * inner ** (dim - 1 - j) for j in range(dim))
    return tail * acc


def _gaussian_oracle(label: str, dim: int, c: float, box: int) -> FunctionOracle:
    entries = {}
    coeff_1d = [gaussian_coeff_1d(c, k) for k in range(box + 1)]
    for idx in itertools.product(range(box + 1), repeat=dim):
        v = 1.0
        for k in idx:
            v *= coeff_1d[k]
        if v != 0.0:
            entries[idx] = v
    coeffs = sp.CoeffTensor(dim, entries)

    def eval_fn(pts):
        pts = np.asarray(pts, dtype=float).reshape(-1, dim)
        return np.exp(-c * np.sum(pts**2, axis=1))

    def deriv_fn(alpha, pts):
        pts = np.asarray(pts, dtype=float).reshape(-1, dim)
        out = np.ones(pts.shape[0])
        for axis, order in enumerate(alpha):
            x = pts[:, axis]
            poly = np.polynomial.Polynomial([1.0])
            base = np.polynomial.Polynomial([0.0, -2.0 * c])
            for _ in range(order):
                poly = poly.deriv() + poly * base
            out = out * poly(x) * np.exp(-c * x**2)
        return out

    return FunctionOracle(
        dim=dim,
        label=label,
        eval_fn=eval_fn,
        deriv_fn=deriv_fn,
        exact_coeffs=coeffs,
        tail_sq_fn=lambda K: gaussian_tail_sq(c, dim, K),
    )


def _law_oracle(label: str, dim: int, decay: float, box: int) -> FunctionOracle:
    oracle = FunctionOracle(
        dim=dim,
        label=label,
        law_decay=decay,
        tail_sq_fn=lambda K: law_tail_sq_outside_box(decay, dim, K),
    )
    oracle.exact_coeffs = oracle.law_coeffs((box,) * dim)
    return oracle


def _expansion_oracle(label: str, dim: int, indices, values) -> FunctionOracle:
    entries = {tuple(int(i) for i in idx): float(v) for idx, v in zip(indices, values)}
    coeffs = sp.CoeffTensor(dim, entries)
    deg = max(max(idx) for idx in entries) if entries else 0
    return FunctionOracle(
        dim=dim, label=label, exact_coeffs=coeffs, poly_degree=deg
    )


def corpus_path():
    return resources.files("freudhc.data") / "corpus.json"


def load_corpus(path=None) -> list[FunctionOracle]:
    """Load the corpus config (the shipped default when path is None)."""
    if path is None:
        raw = corpus_path().read_text()
    else:
        with open(path) as fh:
            raw = fh.read()
    spec = json.loads(raw)
    members = []
    for entry in spec["functions"]:
        kind = entry["kind"]
        if kind == "law":
            members.append(
                _law_oracle(entry["id"], int(entry["dim"]), float(entry["decay"]), int(entry["box"]))
            )
        elif kind == "gaussian":
            members.append(
                _gaussian_oracle(entry["id"], int(entry["dim"]), float(entry["c"]), int(entry["box"]))
            )
        elif kind == "expansion":
            members.append(
                _expansion_oracle(entry["id"], int(entry["dim"]), entry["indices"], entry["values"])
            )
        else:
            raise InvalidParamsError(f"unknown corpus member kind {kind!r}")
    return members


def smoothness_tag(oracle: FunctionOracle, params: WeightParams) -> str:
    """Tag membership by the growth of the coefficient-weighted norm across boxes.

    Converging increments (each box doubling adds less than half the previous
    increment) mean the norm is finite and the member sits in the smoothness
    space; otherwise it is only square integrable.
    """
    r_lambda = rate_exponents(params).r_lambda
    if oracle.law_decay is not None:
        sqs = []
        for box in (128, 256, 512):
            c = oracle.law_coeffs((box,) * oracle.dim) if oracle.dim == 1 else None
            if c is None:
                # product structure: d-variate norm is the d-th power of the 1-d sum
                axis = np.arange(box + 1, dtype=float)
                s1 = float(np.sum((axis + 1.0) ** (2 * r_lambda - 2 * oracle.law_decay)))
                sqs.append(s1**oracle.dim)
            else:
                sqs.append(coeff_smoothness_norm(c, r_lambda) ** 2)
        inc1, inc2 = sqs[1] - sqs[0], sqs[2] - sqs[1]
        finite = inc2 < 0.5 * inc1
    else:
        finite = True  # Gaussians and finite expansions always qualify
    return f"H^{r_lambda:g}" if finite else "L2"
