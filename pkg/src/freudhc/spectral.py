"""Sparse coefficient tensors, diagonal spectral multipliers, and cross index sets.

Every approximation operator in the package acts diagonally on the
orthonormal-expansion coefficients: a one-dimensional operator is a gain
profile over the degree axis, a d-dimensional one is a tensor product of
gains, and the hyperbolic-cross operators are sums of such products over a
budgeted set of dyadic levels.  This module is pure index combinatorics and
never touches quadrature.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import InvalidParamsError, NoAdmissibleParameterError

VP = "vp"
FOURIER = "fourier"
TRUNC = "trunc"
FAMILIES = (VP, FOURIER, TRUNC)

# materialization guard for explicit index sets
_MAX_EXPLICIT = 20_000_000


@dataclass(frozen=True)
class Multiplier1D:
    """Per-degree gain profile; ``tail`` is the constant gain past the stored range.

    Bounded operators store tail 0 (support_bound is then the length of the
    gain array); the residual family stores tail 1 and has unbounded support.
    """

    gains: tuple[float, ...]
    tail: float = 0.0

    def __post_init__(self):
        if any(not 0.0 <= g <= 1.0 for g in self.gains) or not 0.0 <= self.tail <= 1.0:
            raise InvalidParamsError("multiplier gains must lie in [0, 1]")

    @property
    def support_bound(self) -> int | None:
        """Smallest j with gain 0 from there on; None when the support is unbounded."""
        if self.tail != 0.0:
            return None
        j = len(self.gains)
        while j > 0 and self.gains[j - 1] == 0.0:
            j -= 1
        return j

    def gain(self, j: int) -> float:
        return self.gains[j] if j < len(self.gains) else self.tail

    def gain_array(self, count: int) -> np.ndarray:
        out = np.full(count, self.tail)
        k = min(count, len(self.gains))
        out[:k] = self.gains[:k]
        return out


def fourier_multiplier(m: int) -> Multiplier1D:
    """Projection onto degrees below m (the m-th partial sum)."""
    if m < 1:
        raise InvalidParamsError(f"m must be >= 1, got {m}")
    return Multiplier1D((1.0,) * m)


def vp_multiplier(m: int) -> Multiplier1D:
    """De la Vallee Poussin gain: 1 up to degree m, linear taper to 0 at 2m.

    This is the diagonal form of averaging the partial sums of orders
    m+1 .. 2m; degrees j in (m, 2m) receive (2m - j)/m.
    """
    if m < 1:
        raise InvalidParamsError(f"m must be >= 1, got {m}")
    gains = [1.0] * (m + 1) + [(2.0 * m - j) / m for j in range(m + 1, 2 * m)]
    return Multiplier1D(tuple(gains))


def vp_block_multiplier(m: int, k: int) -> Multiplier1D:
    """Difference of de la Vallee Poussin gains at consecutive dyadic scales."""
    if m < 1 or k < 0:
        raise InvalidParamsError(f"need m >= 1 and k >= 0, got m={m}, k={k}")
    if k == 0:
        return vp_multiplier(m)
    hi = vp_multiplier(m * 2**k)
    lo = vp_multiplier(m * 2 ** (k - 1))
    n = len(hi.gains)
    return Multiplier1D(tuple(hi.gains[j] - lo.gain(j) for j in range(n)))


def fourier_block_multiplier(m: int, k: int) -> Multiplier1D:
    """Indicator of the k-th dyadic degree block scaled by m."""
    if m < 1 or k < 0:
        raise InvalidParamsError(f"need m >= 1 and k >= 0, got m={m}, k={k}")
    if k == 0:
        return fourier_multiplier(m)
    lo, hi = m * 2 ** (k - 1), m * 2**k
    return Multiplier1D((0.0,) * lo + (1.0,) * (hi - lo))


def vp_residual_multiplier(k: int) -> Multiplier1D:
    """Complement of the scale-2^k de la Vallee Poussin gain (unbounded support)."""
    if k < 0:
        raise InvalidParamsError(f"k must be >= 0, got {k}")
    v = vp_multiplier(2**k)
    return Multiplier1D(tuple(1.0 - g for g in v.gains), tail=1.0)


@dataclass(frozen=True)
class CoeffTensor:
    """Finite map from d-variate degree indices to expansion coefficients.

    An absent index means coefficient zero; the squared weighted-L2 norm of
    the represented function is the plain sum of squared entries.
    """

    dim: int
    entries: dict[tuple[int, ...], float] = field(repr=False)

    def __post_init__(self):
        for idx in self.entries:
            if len(idx) != self.dim or any(i < 0 for i in idx):
                raise InvalidParamsError(f"bad index {idx} for dim {self.dim}")

    def __len__(self) -> int:
        return len(self.entries)

    def get(self, idx: tuple[int, ...]) -> float:
        return self.entries.get(idx, 0.0)

    def items_sorted(self):
        """Entries in lexicographic index order (the canonical output order)."""
        return sorted(self.entries.items())

    def l2_norm(self) -> float:
        return math.sqrt(math.fsum(v * v for v in self.entries.values()))

    def support_box(self) -> tuple[int, ...]:
        """Componentwise max index, or all -1 when empty."""
        if not self.entries:
            return (-1,) * self.dim
        return tuple(max(idx[j] for idx in self.entries) for j in range(self.dim))

    def subtract(self, other: "CoeffTensor") -> "CoeffTensor":
        if other.dim != self.dim:
            raise InvalidParamsError("dimension mismatch")
        out = dict(self.entries)
        for idx, v in other.entries.items():
            w = out.get(idx, 0.0) - v
            if w == 0.0:
                out.pop(idx, None)
            else:
                out[idx] = w
        return CoeffTensor(self.dim, out)

    def scale(self, c: float) -> "CoeffTensor":
        return CoeffTensor(self.dim, {k: c * v for k, v in self.entries.items()})


def tensor_apply(coeffs: CoeffTensor, mults) -> CoeffTensor:
    """Apply one gain profile per coordinate; entries with zero product are dropped."""
    mults = tuple(mults)
    if len(mults) != coeffs.dim:
        raise InvalidParamsError(
            f"got {len(mults)} multipliers for dimension {coeffs.dim}"
        )
    out = {}
    for idx, v in coeffs.entries.items():
        g = 1.0
        for j, m in enumerate(mults):
            g *= m.gain(idx[j])
            if g == 0.0:
                break
        if g != 0.0:
            out[idx] = v * g
    return CoeffTensor(coeffs.dim, out)


# ---------------------------------------------------------------------------
# dyadic level bookkeeping


def box_level(s: int) -> int:
    """Smallest k with s <= 2**(k+1) - 1 (the level whose gain box first covers s)."""
    return max((s).bit_length() - 1, 0)


def reproduction_level(s: int) -> int:
    """Smallest k with s <= 2**k; level sums below the budget are reproduced exactly."""
    return (s - 1).bit_length() if s >= 1 else 0


def block_level(s: int) -> int:
    """Index of the dyadic block containing s: 0 for s = 0, floor(log2 s) + 1 else."""
    return s.bit_length()


def vp_level_weight(s: int) -> float:
    """Gain of the level-box_level(s) dyadic block at degree s (in (0, 1])."""
    k = box_level(s)
    t = 1 << k
    return 1.0 if s <= t else (2.0 * t - s) / t


# ---------------------------------------------------------------------------
# index sets


@dataclass(frozen=True)
class IndexSet:
    """Explicit finite set of multi-indices."""

    dim: int
    indices: frozenset

    def __len__(self) -> int:
        return len(self.indices)

    def __contains__(self, idx) -> bool:
        return tuple(idx) in self.indices

    def __iter__(self):
        return iter(sorted(self.indices))


def _kappa_box(t: int) -> range:
    # degrees s with box_level(s) == t
    return range(0, 2) if t == 0 else range(1 << t, 1 << (t + 1))


def _block_box(t: int) -> range:
    # degrees s with block_level(s) == t
    return range(0, 1) if t == 0 else range(1 << (t - 1), 1 << t)


def _level_vectors(xi: int, d: int):
    """All t in N_0^d with |t|_1 <= xi."""
    if d == 1:
        for t in range(xi + 1):
            yield (t,)
        return
    for head in range(xi + 1):
        for rest in _level_vectors(xi - head, d - 1):
            yield (head,) + rest


def vp_cross_support(xi: int, d: int) -> IndexSet:
    """Support of the budget-xi de la Vallee Poussin cross operator.

    Union over level vectors |k|_1 <= xi of the boxes s_j <= 2**(k_j+1) - 1;
    materialized through the disjoint decomposition by per-axis box levels.
    """
    _check_xi_int(xi, d)
    if vp_cross_size(xi, d) > _MAX_EXPLICIT:
        raise InvalidParamsError(f"explicit support too large for xi={xi}, d={d}")
    idx = set()
    for t in _level_vectors(xi, d):
        idx.update(itertools.product(*(_kappa_box(tj) for tj in t)))
    return IndexSet(d, frozenset(idx))


def fourier_cross_support(xi: int, d: int) -> IndexSet:
    """Union over |k|_1 <= xi of the boxes s_j <= 2**k_j."""
    _check_xi_int(xi, d)
    if fourier_cross_size(xi, d) > _MAX_EXPLICIT:
        raise InvalidParamsError(f"explicit support too large for xi={xi}, d={d}")
    idx = set()
    for t in _level_vectors(xi, d):
        idx.update(itertools.product(*(range(0, (1 << tj) + 1) for tj in t)))
    return IndexSet(d, frozenset(idx))


def index_weight(idx, r_lambda: float) -> float:
    """Product weight prod (k_j + 1)**r_lambda attached to a multi-index."""
    prod = 1
    for k in idx:
        prod *= k + 1
    return float(prod) ** r_lambda


def product_cross(xi: float, d: int, r_lambda: float) -> IndexSet:
    """Indices whose product weight prod (k_j+1)**r_lambda stays within xi."""
    bound = _checked_product_bound(xi, d, r_lambda)
    idx = set()

    def descend(prefix, budget):
        if len(prefix) == d - 1:
            for k in range(budget):
                idx.add(prefix + (k,))
            return
        k = 0
        while (k + 1) <= budget:
            descend(prefix + (k,), budget // (k + 1))
            k += 1

    descend((), bound)
    return IndexSet(d, frozenset(idx))


def _product_bound(xi: float, r_lambda: float) -> int:
    # largest integer P with P**r_lambda <= xi; the capped correction loops
    # absorb the one-off boundary roundoff of the float root
    p = int(math.floor(xi ** (1.0 / r_lambda) * (1.0 + 1e-12)))
    for _ in range(4):
        if (p + 1) ** r_lambda <= xi * (1.0 + 1e-12):
            p += 1
    for _ in range(4):
        if p >= 1 and p**r_lambda > xi * (1.0 + 1e-12):
            p -= 1
    return p


def _checked_product_bound(xi: float, d: int, r_lambda: float) -> int:
    if xi < 1:
        raise InvalidParamsError(f"xi must be >= 1, got {xi}")
    if r_lambda <= 0:
        raise InvalidParamsError(f"r_lambda must be > 0, got {r_lambda}")
    if d < 1:
        raise InvalidParamsError(f"d must be >= 1, got {d}")
    bound = _product_bound(xi, r_lambda)
    if bound > 5_000_000:
        raise InvalidParamsError(
            f"product cross for xi={xi}, r_lambda={r_lambda} would enumerate "
            f"past {bound} indices per axis"
        )
    return bound


def _check_xi_int(xi, d) -> None:
    if not isinstance(xi, (int, np.integer)) or xi < 0:
        raise InvalidParamsError(f"xi must be a non-negative integer, got {xi!r}")
    if d < 1:
        raise InvalidParamsError(f"d must be >= 1, got {d}")


@lru_cache(maxsize=None)
def _level_count_sums(xi: int, d: int, kind: str) -> tuple:
    """Numbers of s-vectors whose per-axis level sum equals m, for m = 0..xi (exact)."""
    counts = {
        "vp": [2] + [1 << t for t in range(1, xi + 1)],
        "fourier": [2] + [1 << (t - 1) for t in range(1, xi + 1)],
    }[kind]
    dp = [1] + [0] * xi
    for _ in range(d):
        ndp = [0] * (xi + 1)
        for m, cur in enumerate(dp):
            if cur:
                for t in range(xi + 1 - m):
                    ndp[m + t] += cur * counts[t]
        dp = ndp
    return tuple(dp)


def vp_cross_size(xi: int, d: int) -> int:
    """Exact cardinality of vp_cross_support without materializing it."""
    _check_xi_int(xi, d)
    return sum(_level_count_sums(xi, d, "vp"))


def fourier_cross_size(xi: int, d: int) -> int:
    """Exact cardinality of fourier_cross_support without materializing it."""
    _check_xi_int(xi, d)
    return sum(_level_count_sums(xi, d, "fourier"))


def product_cross_size(xi: float, d: int, r_lambda: float) -> int:
    """Exact cardinality of product_cross by recursive descent with pruning."""
    if xi < 1:
        return 0
    bound = _checked_product_bound(xi, d, r_lambda)

    def count(dims, budget):
        if budget < 1:
            return 0
        if dims == 1:
            return budget
        return sum(count(dims - 1, budget // v) for v in range(1, budget + 1))

    return count(d, bound)


# ---------------------------------------------------------------------------
# cross operators


@lru_cache(maxsize=64)
def _vp_cross_cache(xi: int, d: int) -> dict:
    # per-(xi, d) gain memo; grows as indices are queried, immutable values
    return {}


def vp_cross_gain(xi: int, d: int, idx: tuple[int, ...]) -> float:
    """Combined gain of the budget-xi de la Vallee Poussin cross at one index.

    Each coordinate draws nonzero dyadic-block gains from at most two levels
    (its box level and the next), so the sum over admissible level vectors
    collapses to at most 2**d products.
    """
    cache = _vp_cross_cache(xi, d)
    hit = cache.get(idx)
    if hit is not None:
        return hit
    base = [box_level(s) for s in idx]
    theta = [vp_level_weight(s) for s in idx]
    slack = xi - sum(base)
    if slack < 0:
        g = 0.0
    elif slack >= d:
        g = 1.0
    else:
        g = 0.0
        for extra in itertools.product((0, 1), repeat=d):
            if sum(extra) > slack:
                continue
            term = 1.0
            for th, e in zip(theta, extra):
                term *= th if e == 0 else 1.0 - th
            g += term
    cache[idx] = g
    return g


def fourier_cross_gain(xi: int, d: int, idx: tuple[int, ...]) -> float:
    """Indicator gain of the budget-xi dyadic-block cross (always 0 or 1)."""
    return 1.0 if sum(block_level(s) for s in idx) <= xi else 0.0


def apply_vp_cross(coeffs: CoeffTensor, xi: int) -> CoeffTensor:
    """Apply the de la Vallee Poussin cross operator with level budget xi."""
    _check_xi_int(xi, coeffs.dim)
    d = coeffs.dim
    out = {}
    for idx, v in coeffs.entries.items():
        g = vp_cross_gain(xi, d, idx)
        if g != 0.0:
            out[idx] = v * g
    return CoeffTensor(d, out)


def apply_fourier_cross(coeffs: CoeffTensor, xi: int) -> CoeffTensor:
    """Exact truncation onto the budget-xi step cross (0/1 gains)."""
    _check_xi_int(xi, coeffs.dim)
    d = coeffs.dim
    out = {
        idx: v
        for idx, v in coeffs.entries.items()
        if fourier_cross_gain(xi, d, idx) == 1.0
    }
    return CoeffTensor(d, out)


def truncate_product_cross(coeffs: CoeffTensor, xi: float, r_lambda: float) -> CoeffTensor:
    """Keep exactly the entries whose product weight stays within xi."""
    bound = _product_bound(xi, r_lambda)
    out = {}
    for idx, v in coeffs.entries.items():
        prod = 1
        for k in idx:
            prod *= k + 1
            if prod > bound:
                break
        if prod <= bound:
            out[idx] = v
    return CoeffTensor(coeffs.dim, out)


def write_coeff_csv(coeffs: CoeffTensor, path) -> None:
    """Serialize as rows k_1,...,k_d,value in lexicographic index order."""
    with open(path, "w") as fh:
        for idx, v in coeffs.items_sorted():
            fh.write(",".join(str(k) for k in idx) + f",{v!r}\n")


def read_coeff_csv(path) -> CoeffTensor:
    entries = {}
    dim = None
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            *idx, value = line.split(",")
            key = tuple(int(k) for k in idx)
            if dim is None:
                dim = len(key)
            elif len(key) != dim:
                raise InvalidParamsError(f"inconsistent index length in {path}")
            entries[key] = float(value)
    if dim is None:
        raise InvalidParamsError(f"no coefficient rows in {path}")
    return CoeffTensor(dim, entries)


def write_index_csv(index_set: IndexSet, path) -> None:
    """Serialize an index set as rows k_1,...,k_d (no value column)."""
    with open(path, "w") as fh:
        for idx in index_set:
            fh.write(",".join(str(k) for k in idx) + "\n")


def operator_rank(family: str, xi, d: int, r_lambda: float | None = None) -> int:
    """Rank of a cross operator: the cardinality of its supporting index set."""
    if family == VP:
        return vp_cross_size(xi, d)
    if family == FOURIER:
        return fourier_cross_size(xi, d)
    if family == TRUNC:
        if r_lambda is None:
            raise InvalidParamsError("family 'trunc' needs r_lambda")
        return product_cross_size(xi, d, r_lambda)
    raise InvalidParamsError(f"unknown family {family!r}")


def largest_cross_parameter(
    n: int, family: str, d: int, r_lambda: float | None = None
):
    """Largest parameter whose operator rank stays within the budget n.

    For the dyadic families the search runs over integer budgets; for the
    truncation family it runs over the attained product-weight values, so the
    returned parameter is a real number of the form (integer)**r_lambda.
    """
    if n < 1:
        raise NoAdmissibleParameterError(f"budget must be >= 1, got {n}")
    if family in (VP, FOURIER):
        if operator_rank(family, 0, d, r_lambda) > n:
            raise NoAdmissibleParameterError(
                f"no xi admissible for family {family!r} at n={n}, d={d}"
            )
        xi = 0
        while operator_rank(family, xi + 1, d, r_lambda) <= n:
            xi += 1
        return xi
    if family == TRUNC:
        if r_lambda is None:
            raise InvalidParamsError("family 'trunc' needs r_lambda")
        # counts of indices with integer product <= v, by one-axis recursion
        def count(dims, budget):
            if dims == 1:
                return budget
            return sum(count(dims - 1, budget // u) for u in range(1, budget + 1))

        v = 1
        while count(d, v + 1) <= n:
            v += 1
        return float(v) ** r_lambda
    raise InvalidParamsError(f"unknown family {family!r}")
