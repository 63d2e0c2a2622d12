"""Oracles and predictors for the randomized Frolov rule.

* :func:`shift_mse_oracle` compares the mean squared error over random
  shifts with the dual-lattice Fourier sum ``sum_{k != 0} |Ff(Bk)|^2``.
* :func:`fourier_tail_bound` evaluates ``3^{d/2} sqrt(d_B) n^{-1/2} ||Ff||``
  with the norm taken over ``D_n = {xi : prod_j |2 xi_j| >= n / d_B}``.
* :func:`predict_exponent` and :func:`fit_rate` turn smoothness metadata and
  convergence studies into comparable exponents.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .corpus import FourierProfile, SincPowerFactor, SmoothnessSpec
from .cubature import Integrand, q_deterministic_batch
from .errors import TruncationError
from .generator import ScaledGenerator, admissibility_margin
from .lattice import Domain, unit_cube

SUM_RTOL = 1e-12
SUM_ATOL = 1e-20
INTEGRAL_RTOL = 1e-10


# ---------------------------------------------------------------------------
# random shift: mean squared error against the dual-lattice sum

def midpoint_shifts(d: int, size: int) -> np.ndarray:
    """Midpoint grid of ``[0, 1)^d`` with ``size`` points per axis."""
    axis = (np.arange(size) + 0.5) / size
    grids = np.meshgrid(*([axis] * d), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def _profile_of(f: Integrand) -> FourierProfile:
    if f.fourier is None:
        raise ValueError(f"{f.name} has no closed-form Fourier transform")
    return f.fourier


def _exact(f: Integrand) -> float:
    if f.exact_integral is not None:
        return float(f.exact_integral)
    return float(_profile_of(f)(np.zeros((1, f.dim)))[0].real)


def _envelope(fac: SincPowerFactor, x) -> np.ndarray:
    """Upper bound of ``|fac|^2`` on ``|xi| >= x``."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        decay = (fac.width / (np.pi * x)) ** (2 * fac.power)
    return fac.amplitude ** 2 * np.minimum(1.0, decay)


def _box_lattice_2d(B: np.ndarray, lo, hi) -> np.ndarray:
    """Integer ``k`` with ``B k`` in the closed box ``[lo, hi]`` (d = 2)."""
    B_inv = np.linalg.inv(B)
    Bp, Bm = np.clip(B_inv, 0, None), np.clip(B_inv, None, 0)
    k1_lo = math.floor(Bp[0] @ lo + Bm[0] @ hi)
    k1_hi = math.ceil(Bp[0] @ hi + Bm[0] @ lo)
    k1 = np.arange(k1_lo, k1_hi + 1, dtype=np.int64)
    low = np.full(len(k1), -np.inf)
    high = np.full(len(k1), np.inf)
    for j in range(2):
        a, b = B[j, 0], B[j, 1]
        r_lo = (lo[j] - a * k1) / b
        r_hi = (hi[j] - a * k1) / b
        if b < 0:
            r_lo, r_hi = r_hi, r_lo
        low = np.maximum(low, r_lo)
        high = np.minimum(high, r_hi)
    k2_lo = np.floor(low).astype(np.int64)
    k2_hi = np.ceil(high).astype(np.int64)
    counts = np.clip(k2_hi - k2_lo + 1, 0, None)
    total = int(counts.sum())
    rows = np.repeat(np.arange(len(k1)), counts)
    offsets = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
    k = np.stack([k1[rows], k2_lo[rows] + offsets], axis=1)
    xi = k @ B.T
    keep = np.all((xi >= lo) & (xi <= hi), axis=1)
    return k[keep]


def _dyadic_index(x) -> np.ndarray:
    """Shell index: 0 for ``|x| <= 1``, else ``a`` with ``2^(a-1) < |x| <= 2^a``."""
    ax = np.abs(np.asarray(x, dtype=float))
    mant, expo = np.frexp(ax)
    a = np.where(mant == 0.5, expo - 1, expo)
    return np.where(ax <= 1.0, 0, a)


def _cell_tail_bound(factors, product_bound: float, level: int) -> float:
    # Points of B(Z^2 \ 0) with |xi_j| in the dyadic shell a_j (|xi| <= 1 for
    # a = 0, 2^(a-1) < |xi| <= 2^a otherwise).  Each sign quadrant of a cell
    # lies in a box at the origin of volume 2^(a1+a2), which holds at most
    # 2^(a1+a2) / product_bound lattice points.
    total = 0.0
    for s in range(level + 1, level + 200):
        a1 = np.arange(s + 1)
        a2 = s - a1
        lo1 = np.where(a1 == 0, 0.0, 2.0 ** (a1 - 1))
        lo2 = np.where(a2 == 0, 0.0, 2.0 ** (a2 - 1))
        env = _envelope(factors[0], lo1) * _envelope(factors[1], lo2)
        term = float(np.sum(4.0 * 2.0 ** s / product_bound * env))
        total += term
        if term <= 1e-6 * total or term == 0.0:
            break
    return total


def dual_lattice_sum(profile: FourierProfile, B, product_bound: float | None = None,
                     rtol: float = SUM_RTOL, atol: float = SUM_ATOL,
                     max_level: int = 24) -> float:
    """``sum_{k != 0} |Ff(Bk)|^2`` for ``d <= 2``.

    In two dimensions the lattice points ``xi = Bk`` are collected over
    growing hyperbolic crosses, the union of the boxes
    ``[-2^a1, 2^a1] x [-2^a2, 2^a2]`` with ``a1 + a2 = L``.  Summation stops
    once two successive levels each add at most ``rtol`` times the partial
    sum, or once a rigorous remainder bound (box counting plus the profile's
    polynomial envelope) falls below ``max(rtol * partial, atol)``.  Plain
    sup-norm shells in ``k`` are not used: shells containing near-units of
    the lattice add isolated spikes, so small shell increments do not imply
    a small remainder.

    ``product_bound`` is ``inf_{k != 0} prod_j |(Bk)_j|``; if omitted it is
    estimated by a finite scan.  Profiles must decay at least like
    ``|xi_j|^-2`` per axis (a sinc power of 2 or more).
    """
    B = np.atleast_2d(np.asarray(B, dtype=float))
    d = B.shape[0]
    if profile.dim != d:
        raise ValueError("profile and matrix dimensions differ")
    if any(f.width <= 0 for f in profile.factors):
        raise ValueError("profile widths must be positive")
    if profile.decay_order < 2:
        # |Ff|^2 ~ |xi|^-2 along an axis: the remainder after K terms is
        # ~1/K, too slow to reach rtol
        raise TruncationError(
            f"lattice sums need decay order >= 2 per axis, got {profile.decay_order}")
    if d == 1:
        return _dual_lattice_sum_1d(profile.factors[0], abs(B[0, 0]), rtol, atol)
    if d != 2:
        raise ValueError("dual_lattice_sum supports d <= 2")
    if product_bound is None:
        product_bound = admissibility_margin(B, 64)
    if not product_bound > 0:
        raise ValueError("B must have a positive product bound")
    # no nonzero lattice point has prod_j |xi_j| < product_bound, so cells
    # below this level are empty
    first = max(0, int(math.floor(math.log2(product_bound))) - 2)
    partial, small_steps = 0.0, 0
    for level in range(0, max_level + 1):
        parts = []
        for a1 in range(level + 1):
            half = np.array([2.0 ** a1, 2.0 ** (level - a1)])
            k = _box_lattice_2d(B, -half, half)
            xi = k @ B.T
            cell = (_dyadic_index(xi[:, 0]) == a1) & (_dyadic_index(xi[:, 1]) == level - a1)
            cell &= np.any(k != 0, axis=1)
            parts.append(profile.modulus_squared(xi[cell]))
        increment = math.fsum(np.concatenate(parts))
        partial += increment
        if level < first:
            continue
        tail = _cell_tail_bound(profile.factors, product_bound, level)
        if tail <= max(rtol * partial, atol):
            return partial
        small_steps = small_steps + 1 if 0 < increment <= rtol * partial else 0
        if small_steps >= 2:
            return partial
    raise TruncationError(
        f"lattice sum not converged at level {max_level} (tail bound {tail:.3e},"
        f" partial sum {partial:.3e})")


def _dual_lattice_sum_1d(fac: SincPowerFactor, b: float, rtol: float,
                         atol: float) -> float:
    A2, w, q = fac.amplitude ** 2, fac.width, fac.power
    if q < 1:
        raise TruncationError("profile does not decay; the lattice sum diverges")
    K = 64
    while True:
        k = np.arange(1, K + 1)
        partial = 2.0 * math.fsum(fac.modulus_squared(b * k))
        # sum_{k > K} env(b k) <= int_K^inf env(b x) dx
        tail = 2.0 * A2 * (w / (np.pi * b)) ** (2 * q) * K ** (1 - 2 * q) / (2 * q - 1)
        if tail <= max(rtol * partial, atol):
            return partial
        if K >= 1 << 24:
            raise TruncationError(
                f"1-d lattice sum not converged (tail bound {tail:.3e})")
        K *= 4


def shift_mse_oracle(f: Integrand, B, v_grid_size: int,
                     dom: Domain | None = None,
                     product_bound: float | None = None) -> tuple[float, float]:
    """Both sides of ``E_v |I(f) - Q_{B,v}(f)|^2 = sum_{k != 0} |Ff(Bk)|^2``.

    The left side averages over the midpoint grid of ``[0, 1)^d`` with
    ``v_grid_size`` points per axis; the right side is
    :func:`dual_lattice_sum`.  ``B`` is a matrix or a
    :class:`ScaledGenerator`.
    """
    if isinstance(B, ScaledGenerator):
        product_bound = B.product_bound if product_bound is None else product_bound
        B = B.entries
    B = np.atleast_2d(np.asarray(B, dtype=float))
    d = B.shape[0]
    if d > 2:
        raise ValueError("shift_mse_oracle supports d <= 2")
    profile = _profile_of(f)
    dom = unit_cube(d) if dom is None else dom
    exact = _exact(f)
    q = q_deterministic_batch(f, B, midpoint_shifts(d, int(v_grid_size)), dom)
    lhs = math.fsum((exact - q) ** 2) / len(q)
    rhs = dual_lattice_sum(profile, B, product_bound)
    return lhs, rhs


def relative_difference(a: float, b: float, floor: float = 1e-14) -> float:
    """``|a - b| / max(|a|, |b|, floor)``; the floor absorbs exact zeros."""
    return abs(a - b) / max(abs(a), abs(b), floor)


# ---------------------------------------------------------------------------
# random dilation: the Fourier tail bound

_PANEL_GL = np.polynomial.legendre.leggauss(32)
_TABLE_PANELS = 1 << 17


def _gl(fn, a, b):
    """Gauss-Legendre integral of ``fn`` over each ``[a_i, b_i]``."""
    x, w = _PANEL_GL
    a = np.asarray(a, dtype=float)[..., None]
    b = np.asarray(b, dtype=float)[..., None]
    half = 0.5 * (b - a)
    return (half * fn(a + half * (x + 1.0)) * w).sum(axis=-1)


def _sinc_power_asymptotic(q: int, y) -> np.ndarray:
    # int_y^inf sin(pi x)^{2q} / (pi x)^{2q} dx for integer y: replacing
    # sin^{2q} by its mean binom(2q, q) / 4^q leaves a relative error O(y^-2)
    alpha = math.comb(2 * q, q) / 4.0 ** q
    return alpha * np.pi ** (-2 * q) * np.asarray(y, dtype=float) ** (1 - 2 * q) / (2 * q - 1)


@lru_cache(maxsize=None)
def _sinc_power_table(q: int) -> np.ndarray:
    # tail[k] = int_k^inf sinc(x)^{2q} dx for k = 0..N, summed from the far
    # end so that small tails carry full relative precision
    k = np.arange(_TABLE_PANELS)
    pieces = _gl(lambda x: np.sinc(x) ** (2 * q), k, k + 1.0)
    tail = np.empty(_TABLE_PANELS + 1)
    tail[-1] = _sinc_power_asymptotic(q, _TABLE_PANELS)
    tail[:-1] = tail[-1] + np.cumsum(pieces[::-1])[::-1]
    tail.setflags(write=False)
    return tail


def sinc_power_tail(q: int, y) -> np.ndarray:
    """``int_y^inf sinc(x)^{2q} dx`` for ``y >= 0`` (normalized sinc)."""
    y = np.asarray(y, dtype=float)
    if np.any(y < 0):
        raise ValueError("sinc_power_tail needs y >= 0")
    table = _sinc_power_table(int(q))
    top = np.ceil(y)
    partial = _gl(lambda x: np.sinc(x) ** (2 * q), y, top)
    idx = np.minimum(top, _TABLE_PANELS).astype(np.int64)
    far = np.where(top < _TABLE_PANELS, table[idx],
                   _sinc_power_asymptotic(q, np.maximum(top, _TABLE_PANELS)))
    return partial + far


def factor_tail(fac: SincPowerFactor, a) -> np.ndarray:
    """``int_a^inf |fac(xi)|^2 dxi`` for ``a >= 0``."""
    a = np.asarray(a, dtype=float)
    return fac.amplitude ** 2 * fac.width * sinc_power_tail(fac.power, a / fac.width)


def _adaptive_gl(fn, a: float, b: float, panels: int, rtol: float) -> float:
    prev = None
    for _ in range(14):
        edges = np.linspace(a, b, panels + 1)
        value = math.fsum(_gl(fn, edges[:-1], edges[1:]))
        if prev is not None and abs(value - prev) <= rtol * abs(value):
            return value
        prev = value
        panels *= 2
    raise TruncationError("tail-bound quadrature did not converge")


def fourier_norm_outside_cross(profile: FourierProfile, threshold: float,
                               rtol: float = INTEGRAL_RTOL) -> float:
    """``||Ff||^2`` over ``{xi : prod_j |2 xi_j| >= threshold}`` for ``d <= 2``."""
    facs = profile.factors
    if len(facs) == 1:
        return 2.0 * float(factor_tail(facs[0], threshold / 2.0))
    if len(facs) != 2:
        raise ValueError("fourier_norm_outside_cross supports d <= 2")
    # positive quadrant of {xi1 xi2 >= t}: both coordinates >= sqrt(t), or
    # one coordinate below sqrt(t) and the other above t / (that coordinate)
    t = threshold / 4.0
    r = math.sqrt(t)
    both = float(factor_tail(facs[0], r) * factor_tail(facs[1], r))
    strips = 0.0
    for inner, outer in ((facs[0], facs[1]), (facs[1], facs[0])):
        def integrand(x, inner=inner, outer=outer):
            with np.errstate(divide="ignore"):
                a = np.where(x > 0, t / np.maximum(x, 1e-300), np.inf)
            out = factor_tail(outer, np.minimum(a, 1e300))
            return inner.modulus_squared(x) * out
        panels = max(8, int(math.ceil(4.0 * r / min(f.width for f in facs))))
        strips += _adaptive_gl(integrand, 0.0, r, panels, rtol)
    return 4.0 * (both + strips)


def tail_constant(gen: ScaledGenerator) -> float:
    """``3^{d/2} sqrt(d_B)``."""
    return 3.0 ** (gen.dim / 2.0) * math.sqrt(gen.det_abs)


def fourier_tail_bound(f: Integrand, gen: ScaledGenerator) -> float:
    """Upper bound ``3^{d/2} sqrt(d_B) n^{-1/2} ||Ff||_{L2(D_n)}`` on the RMSE."""
    if gen.dim > 2:
        raise ValueError("fourier_tail_bound supports d <= 2")
    profile = _profile_of(f)
    norm2 = fourier_norm_outside_cross(profile, gen.product_bound)
    return tail_constant(gen) * math.sqrt(max(norm2, 0.0) / gen.n)


# ---------------------------------------------------------------------------
# rates

@dataclass(frozen=True)
class RatePrediction:
    exponent: float
    regime_ok: bool
    mode: str


def predict_exponent(spec: SmoothnessSpec) -> RatePrediction:
    """Predicted RMSE exponent ``-(smoothness) - min(1/2, 1 - 1/p)``.

    The smoothness is ``g(S)`` for isotropic/anisotropic scales and
    ``min_j S_j`` for mixed ones; the prediction applies when it is at least
    ``max(0, 1/p - 1/2)``.
    """
    level = spec.g if spec.mode == "isotropic" else spec.s_min
    exponent = -level - min(0.5, 1.0 - 1.0 / spec.p)
    return RatePrediction(exponent=exponent, regime_ok=level >= spec.sigma_p,
                          mode=spec.mode)


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    stderr: float

    def __iter__(self):
        return iter((self.slope, self.intercept, self.stderr))


def fit_rate(records: Iterable) -> RateFit:
    """Least-squares fit of ``log2(rmse)`` against ``log2(n)``.

    ``records`` holds objects with ``n`` and ``rmse`` attributes or
    ``(n, rmse)`` pairs.
    """
    pts = []
    for rec in records:
        n, rmse = (rec.n, rec.rmse) if hasattr(rec, "rmse") else rec
        pts.append((float(n), float(rmse)))
    if len(pts) < 4:
        raise ValueError("fit_rate needs at least 4 records")
    n, rmse = np.array(pts).T
    if len(np.unique(n)) != len(n):
        raise ValueError("fit_rate needs distinct n values")
    if np.any(rmse <= 0):
        raise ValueError("fit_rate needs positive RMSE values")
    x, y = np.log2(n), np.log2(rmse)
    xc = x - x.mean()
    sxx = float(xc @ xc)
    slope = float(xc @ (y - y.mean())) / sxx
    intercept = float(y.mean() - slope * x.mean())
    resid = y - (intercept + slope * x)
    stderr = math.sqrt(float(resid @ resid) / (len(x) - 2) / sxx)
    return RateFit(slope, intercept, stderr)


def rmse_with_se(sq_errors: Sequence[float]) -> tuple[float, float]:
    """Empirical RMSE ``sqrt(mean e^2)`` and its delta-method standard error."""
    sq = np.asarray(sq_errors, dtype=float)
    R = len(sq)
    if R < 2:
        raise ValueError("need at least two replications")
    mean_sq = math.fsum(sq) / R
    var_sq = math.fsum((sq - mean_sq) ** 2) / (R - 1)
    rmse = math.sqrt(mean_sq)
    se = 0.0 if rmse == 0 else math.sqrt(var_sq / R) / (2.0 * rmse)
    return rmse, se
