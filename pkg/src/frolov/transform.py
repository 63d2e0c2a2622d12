"""Smooth change of variables for integrands without boundary conditions.

``psi`` is the normalized primitive of the bump ``exp(-1 / (t (1 - t)))``
on ``[0, 1]`` (0 to the left, 1 to the right).  The operator

    (T f)(x) = prod_j psi'(x_j) * f(psi(x_1), ..., psi(x_d))

maps a function on the cube to one supported in the cube with the same
integral, so the lattice rule can be applied to it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .cubature import EstimateResult, Integrand, randomized_frolov
from .lattice import DEFAULT_CAP, unit_cube

_GL_ORDER = 20
_GL_X, _GL_W = np.polynomial.legendre.leggauss(_GL_ORDER)


def bump(t) -> np.ndarray:
    """``exp(-1 / (t (1 - t)))`` on ``(0, 1)``, zero elsewhere.

    Underflows to exactly 0 close to the endpoints.
    """
    t = np.asarray(t, dtype=float)
    inside = (t > 0.0) & (t < 1.0)
    s = np.where(inside, t, 0.5)
    with np.errstate(over="ignore", divide="ignore"):
        out = np.exp(-1.0 / (s * (1.0 - s)))
    return np.where(inside, out, 0.0)


def _panel_integrals(edges: np.ndarray) -> np.ndarray:
    a, b = edges[:-1, None], edges[1:, None]
    half = 0.5 * (b - a)
    nodes = a + half * (_GL_X + 1.0)
    return (half[:, 0] * (bump(nodes) @ _GL_W))


@dataclass(frozen=True)
class PsiTable:
    """Cumulative bump integrals on uniform panels of ``[0, 1]``.

    ``psi(t)`` adds a Gauss-Legendre integral over the partial panel
    ``[t_k, t]`` to the tabulated value at ``t_k``, so there is no
    interpolation error.  The panel count is doubled until the
    normalization ``c`` agrees between successive refinements to ``rtol``.
    """

    rtol: float = 1e-14
    min_panels: int = 256
    c: float = field(init=False)
    panels: int = field(init=False)
    cumulative: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        k = 8
        prev = math.fsum(_panel_integrals(np.linspace(0.0, 1.0, k + 1)))
        while True:
            k *= 2
            pieces = _panel_integrals(np.linspace(0.0, 1.0, k + 1))
            c = math.fsum(pieces)
            if abs(c - prev) <= self.rtol * c and k >= self.min_panels:
                break
            if k > 1 << 16:
                raise RuntimeError("normalization quadrature failed to converge")
            prev = c
        cumulative = np.concatenate([[0.0], np.cumsum(pieces)]) / c
        cumulative[-1] = 1.0
        cumulative.setflags(write=False)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "panels", k)
        object.__setattr__(self, "cumulative", cumulative)

    def psi(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        tc = np.clip(t, 0.0, 1.0)
        k = np.minimum((tc * self.panels).astype(np.int64), self.panels - 1)
        a = k / self.panels
        half = 0.5 * (tc - a)
        nodes = a[..., None] + half[..., None] * (_GL_X + 1.0)
        partial = half * (bump(nodes) @ _GL_W)
        out = self.cumulative[k] + partial / self.c
        return np.where(t <= 0.0, 0.0, np.where(t >= 1.0, 1.0, out))

    def psi_prime(self, t) -> np.ndarray:
        return bump(t) / self.c


@lru_cache(maxsize=None)
def psi_table() -> PsiTable:
    return PsiTable()


def normalization_constant() -> float:
    """``c = int_0^1 exp(-1 / (t (1 - t))) dt``."""
    return psi_table().c


def psi(t):
    """The change of variable; returns a float for scalar input."""
    out = psi_table().psi(t)
    return float(out) if np.ndim(out) == 0 else out


def psi_prime(t):
    out = psi_table().psi_prime(t)
    return float(out) if np.ndim(out) == 0 else out


def transform_T(f: Integrand) -> Integrand:
    """Return ``T f``: compactly supported in the cube, same integral as ``f``."""
    table = psi_table()

    def fn(x):
        jac = np.prod(table.psi_prime(x), axis=1)
        out = np.zeros(len(x))
        live = jac > 0.0
        if live.any():
            out[live] = jac[live] * f(table.psi(x[live]))
        return out

    return Integrand(
        name=f"T[{f.name}]",
        dim=f.dim,
        fn=fn,
        support_in_domain=True,
        exact_integral=f.exact_integral,
        smoothness=f.smoothness,
        fourier=None,
        params=dict(f.params),
    )


def randomized_frolov_cube(f: Integrand, gen, rand,
                           cap: int = DEFAULT_CAP) -> EstimateResult:
    """``M_n(T f)`` on the unit cube, for ``f`` without boundary conditions."""
    return randomized_frolov(transform_T(f), gen, rand, unit_cube(gen.dim), cap)
