"""Frolov generator matrices.

A Frolov matrix is an invertible ``B`` with ``prod_j |(B m)_j| >= 1`` for
every nonzero integer vector ``m``.  We use the classical construction:
the Vandermonde matrix of the roots of

    p(x) = (x - 1)(x - 3)...(x - (2d - 1)) - 1,

a polynomial that is irreducible over the rationals with ``d`` distinct
real roots.  For integer ``m`` the entries ``(B m)_j`` are the conjugates of
one algebraic integer, so their product is a nonzero integer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np
from numpy.polynomial import polynomial as P

from .errors import AdmissibilityError, ConstructionError

ADMISSIBILITY_TOL = 1e-9
ROOT_RESIDUAL_TOL = 1e-12


@dataclass(frozen=True)
class FrolovMatrix:
    """Generator matrix together with its admissibility certificate.

    Attributes
    ----------
    dim : int
        Dimension ``d``.
    entries : ndarray, shape (d, d)
        The matrix ``B`` (read-only).
    det_abs : float
        ``|det B|``.
    check_radius : int
        Sup-norm radius over which the product bound was scanned.
    check_margin : float
        Smallest ``prod_j |(B m)_j|`` found over ``0 < |m|_inf <= check_radius``.
    """

    dim: int
    entries: np.ndarray = field(repr=False)
    det_abs: float
    check_radius: int
    check_margin: float

    def __post_init__(self):
        entries = np.array(self.entries, dtype=float)
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)


@dataclass(frozen=True)
class ScaledGenerator:
    """``B_n = (n / d_B)^(1/d) B``, so that ``|det B_n| = n``."""

    base: FrolovMatrix
    n: float
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        entries = np.array(self.entries, dtype=float)
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @property
    def dim(self) -> int:
        return self.base.dim

    @property
    def det_abs(self) -> float:
        return self.base.det_abs

    @property
    def product_bound(self) -> float:
        """Lower bound ``n / d_B`` on ``prod_j |(B_n m)_j|`` for ``m != 0``."""
        return self.n / self.base.det_abs


def frolov_polynomial(d: int) -> np.ndarray:
    """Coefficients (lowest degree first) of ``prod_j (x - (2j-1)) - 1``."""
    coef = np.array([1.0])
    for j in range(1, d + 1):
        coef = P.polymul(coef, [-(2.0 * j - 1.0), 1.0])
    coef[0] -= 1.0
    return coef


def polynomial_roots(coef: np.ndarray) -> np.ndarray:
    """Sorted real roots of a real polynomial with only real, simple roots.

    Companion-matrix eigenvalues followed by one Newton step.

    Raises
    ------
    ConstructionError
        If a root is not real, roots collide, or the residual is too large.
    """
    d = len(coef) - 1
    raw = np.roots(coef[::-1])
    scale = np.max(np.abs(raw)) + 1.0
    if np.any(np.abs(raw.imag) > 1e-8 * scale):
        raise ConstructionError(f"non-real roots found for degree {d}: {raw}")
    r = np.sort(raw.real)
    dcoef = P.polyder(coef)
    r = r - P.polyval(r, coef) / P.polyval(r, dcoef)
    if d > 1 and np.min(np.diff(r)) <= 1e-8 * scale:
        raise ConstructionError(f"roots are not distinct: {r}")
    # residual relative to the size of the summed monomials
    magnitude = P.polyval(np.abs(r), np.abs(coef))
    residual = np.abs(P.polyval(r, coef)) / magnitude
    if np.any(residual > ROOT_RESIDUAL_TOL):
        raise ConstructionError(
            f"root residual {residual.max():.3e} exceeds {ROOT_RESIDUAL_TOL:g}")
    return r


@numba.njit(cache=True)
def _product_scan(B, radius):
    # min over 0 < |m|_inf <= radius of prod_j |(B m)_j|; pairs m, -m
    # give the same product, so only m whose first nonzero entry is
    # positive are visited.
    d = B.shape[0]
    w = 2 * radius + 1
    n_prefix = w ** (d - 1)
    best = np.inf
    base = np.zeros(d)
    prefix = np.zeros(max(d - 1, 1), dtype=np.int64)
    for idx in range(n_prefix):
        r = idx
        for k in range(d - 2, -1, -1):
            prefix[k] = r % w - radius
            r //= w
        sign = 0
        for k in range(d - 1):
            if prefix[k] != 0:
                sign = 1 if prefix[k] > 0 else -1
                break
        if sign < 0:
            continue
        for j in range(d):
            s = 0.0
            for k in range(d - 1):
                s += B[j, k] * prefix[k]
            base[j] = s
        start = -radius if sign > 0 else 1
        for last in range(start, radius + 1):
            p = 1.0
            for j in range(d):
                p *= abs(base[j] + last * B[j, d - 1])
            if p < best:
                best = p
    return best


def admissibility_margin(B, radius: int) -> float:
    """Minimum of ``prod_j |(B m)_j|`` over integer ``0 < |m|_inf <= radius``.

    Parameters
    ----------
    B : array_like, shape (d, d)
        Invertible matrix.
    radius : int
        Sup-norm scan radius, at least 1.

    Returns
    -------
    float
        The smallest product found.  A Frolov matrix gives a value ``>= 1``.
    """
    B = np.ascontiguousarray(B, dtype=float)
    if B.ndim != 2 or B.shape[0] != B.shape[1] or B.shape[0] < 1:
        raise ValueError(f"B must be a square matrix, got shape {B.shape}")
    radius = int(radius)
    if radius < 1:
        raise ValueError("radius must be >= 1")
    if abs(np.linalg.det(B)) == 0.0:
        raise ValueError("B must be invertible")
    return float(_product_scan(B, radius))


def build_generator(d: int, check_radius: int = 20) -> FrolovMatrix:
    """Construct the Vandermonde Frolov matrix in dimension ``d``.

    ``B[j, k] = xi_j ** k`` where ``xi_1 < ... < xi_d`` are the roots of
    :func:`frolov_polynomial`.  For ``d = 1`` this is ``B = [[1]]``.

    The product bound is verified numerically over the cube
    ``|m|_inf <= check_radius``; a value below ``1 - 1e-9`` raises
    :class:`AdmissibilityError`.
    """
    d = int(d)
    if d < 1:
        raise ValueError("dimension must be >= 1")
    if int(check_radius) < 1:
        raise ValueError("check_radius must be >= 1")
    if d == 1:
        B = np.ones((1, 1))
    else:
        xi = polynomial_roots(frolov_polynomial(d))
        B = np.vander(xi, d, increasing=True)
    margin = admissibility_margin(B, check_radius)
    if margin < 1.0 - ADMISSIBILITY_TOL:
        raise AdmissibilityError(
            f"product bound violated for d={d}: margin {margin!r} < 1 "
            f"(radius {check_radius}); numerical root error suspected")
    return FrolovMatrix(
        dim=d,
        entries=B,
        det_abs=float(abs(np.linalg.det(B))),
        check_radius=int(check_radius),
        check_margin=margin,
    )


def scale(base: FrolovMatrix, n: float) -> ScaledGenerator:
    """Scale ``base`` to determinant ``n``."""
    n = float(n)
    if not n > 0 or not math.isfinite(n):
        raise ValueError(f"n must be a positive finite number, got {n}")
    factor = (n / base.det_abs) ** (1.0 / base.dim)
    return ScaledGenerator(base=base, n=n, entries=factor * base.entries)


def critical_determinant_bound(d: int) -> float:
    """Lower bound ``d^d / d!`` on ``|det B|`` for any Frolov matrix."""
    return d ** d / math.factorial(d)
