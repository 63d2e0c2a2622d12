"""Test integrands with exact integrals and smoothness metadata.

Every integrand lives on the unit cube.  The tensor products of scaled
B-splines, hats and box indicators also carry their Fourier transforms,
which are products of one-dimensional factors of the form

    A * exp(-2 pi i xi x0) * sinc(xi / w) ** q,     sinc(x) = sin(pi x) / (pi x).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .cubature import Integrand
from .transform import bump, normalization_constant

NOMINAL_GAP = 0.05
MODES = ("isotropic", "mixed")


@dataclass(frozen=True)
class SmoothnessSpec:
    """Smoothness vector ``S``, integrability ``p`` and the kind of scale."""

    S: tuple
    p: float
    mode: str = "mixed"

    def __post_init__(self):
        S = tuple(float(s) for s in np.atleast_1d(self.S))
        if not S or any(s < 0 or math.isnan(s) for s in S):
            raise ValueError(f"smoothness entries must be nonnegative: {self.S}")
        if not (1.0 <= float(self.p) <= math.inf):
            raise ValueError(f"p must lie in [1, inf], got {self.p}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "p", float(self.p))

    @property
    def g(self) -> float:
        """``(sum_j 1/S_j)^{-1}`` if every ``S_j > 0``, else 0."""
        if min(self.S) <= 0:
            return 0.0
        return 1.0 / math.fsum(1.0 / s for s in self.S)

    @property
    def s_min(self) -> float:
        return min(self.S)

    @property
    def sigma_p(self) -> float:
        return max(0.0, 1.0 / self.p - 0.5)


@dataclass(frozen=True)
class SincPowerFactor:
    amplitude: float
    width: float
    power: int
    center: float

    def __call__(self, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        phase = np.exp(-2j * np.pi * xi * self.center)
        return self.amplitude * phase * np.sinc(xi / self.width) ** self.power

    def modulus_squared(self, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        return self.amplitude ** 2 * np.sinc(xi / self.width) ** (2 * self.power)


@dataclass(frozen=True)
class FourierProfile:
    """Closed-form Fourier transform of a tensor-product integrand."""

    factors: tuple
    decay_note: str = ""

    @property
    def dim(self) -> int:
        return len(self.factors)

    @property
    def decay_order(self) -> int:
        """Polynomial decay order of the transform along each axis."""
        return min(fac.power for fac in self.factors)

    def __call__(self, xi) -> np.ndarray:
        xi = np.atleast_2d(np.asarray(xi, dtype=float))
        out = np.ones(len(xi), dtype=complex)
        for j, fac in enumerate(self.factors):
            out *= fac(xi[:, j])
        return out

    def modulus_squared(self, xi) -> np.ndarray:
        xi = np.atleast_2d(np.asarray(xi, dtype=float))
        out = np.ones(len(xi))
        for j, fac in enumerate(self.factors):
            out *= fac.modulus_squared(xi[:, j])
        return out


def cardinal_bspline(r: int, x) -> np.ndarray:
    """Cardinal B-spline of order ``r`` (degree ``r - 1``) supported on ``[0, r]``.

    Truncated-power form, evaluated on the left half and reflected so the
    alternating sum stays short.
    """
    x = np.asarray(x, dtype=float)
    if r == 1:
        return ((x >= 0.0) & (x <= 1.0)).astype(float)
    y = np.minimum(x, r - x)
    out = np.zeros_like(y)
    for k in range(r + 1):
        out += (-1) ** k * math.comb(r, k) * np.clip(y - k, 0.0, None) ** (r - 1)
    out /= math.factorial(r - 1)
    return np.where((x > 0.0) & (x < r), out, 0.0)


def _tensor(fn1: Callable[[np.ndarray], np.ndarray]):
    def fn(x):
        return np.prod(fn1(x), axis=1)
    return fn


def _broadcast(value, d: int, name: str) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(value, dtype=float))
    if arr.size == 1:
        arr = np.full(d, arr.item())
    if arr.shape != (d,):
        raise ValueError(f"parameter {name} needs 1 or {d} entries, got {arr.size}")
    return arr


def _mixed(d: int, s: float) -> SmoothnessSpec:
    return SmoothnessSpec(S=(s,) * d, p=2.0, mode="mixed")


def bspline_tensor(d: int, r: int = 2) -> Integrand:
    r = int(r)
    if r < 1:
        raise ValueError("B-spline order r must be >= 1")
    fac = SincPowerFactor(amplitude=1.0, width=float(r), power=r, center=0.5)
    return Integrand(
        name="bspline_tensor", dim=d,
        fn=_tensor(lambda x: r * cardinal_bspline(r, r * x)),
        exact_integral=1.0,
        smoothness=_mixed(d, r - 0.5 - NOMINAL_GAP),
        fourier=FourierProfile((fac,) * d, f"sinc^{r} per axis"),
        params={"r": r},
    )


def hat_tensor(d: int) -> Integrand:
    fac = SincPowerFactor(amplitude=0.5, width=2.0, power=2, center=0.5)
    return Integrand(
        name="hat_tensor", dim=d,
        fn=_tensor(lambda x: np.clip(1.0 - np.abs(2.0 * x - 1.0), 0.0, None)),
        exact_integral=0.5 ** d,
        smoothness=_mixed(d, 1.5 - NOMINAL_GAP),
        fourier=FourierProfile((fac,) * d, "sinc^2 per axis"),
    )


def bump_tensor(d: int) -> Integrand:
    return Integrand(
        name="bump_tensor", dim=d,
        fn=_tensor(bump),
        exact_integral=normalization_constant() ** d,
        smoothness=_mixed(d, math.inf),
    )


def box_indicator(d: int, a=0.0, b=0.5) -> Integrand:
    a = _broadcast(a, d, "a")
    b = _broadcast(b, d, "b")
    if np.any(a < 0) or np.any(b > 1) or np.any(b <= a):
        raise ValueError("box_indicator needs 0 <= a < b <= 1")
    facs = tuple(SincPowerFactor(amplitude=bj - aj, width=1.0 / (bj - aj), power=1,
                                 center=0.5 * (aj + bj)) for aj, bj in zip(a, b))

    def fn(x):
        return np.all((x >= a) & (x <= b), axis=1).astype(float)

    return Integrand(
        name="box_indicator", dim=d, fn=fn,
        exact_integral=float(np.prod(b - a)),
        smoothness=_mixed(d, 0.5 - NOMINAL_GAP),
        fourier=FourierProfile(facs, "sinc per axis"),
        params={"a": a.tolist(), "b": b.tolist()},
    )


def poly_nobc(d: int) -> Integrand:
    return Integrand(
        name="poly_nobc", dim=d,
        fn=lambda x: np.prod(x, axis=1),
        support_in_domain=False,
        exact_integral=0.5 ** d,
        smoothness=_mixed(d, math.inf),
    )


_REGISTRY = {
    "bspline_tensor": (bspline_tensor, {"r": 2}),
    "hat_tensor": (hat_tensor, {}),
    "bump_tensor": (bump_tensor, {}),
    "box_indicator": (box_indicator, {"a": 0.0, "b": 0.5}),
    "poly_nobc": (poly_nobc, {}),
}

NAMES = tuple(_REGISTRY)


def get_integrand(name: str, d: int, params: dict | None = None) -> Integrand:
    """Look up a corpus integrand by name.

    Raises
    ------
    KeyError
        Unknown name.
    ValueError
        Unknown or invalid parameters.
    """
    if name not in _REGISTRY:
        raise KeyError(f"unknown integrand {name!r}; choose from {', '.join(NAMES)}")
    d = int(d)
    if d < 1:
        raise ValueError("dimension must be >= 1")
    factory, defaults = _REGISTRY[name]
    params = dict(params or {})
    unknown = set(params) - set(defaults)
    if unknown:
        raise ValueError(f"{name} does not take parameters {sorted(unknown)}")
    return factory(d, **{**defaults, **params})


def _parse_value(text: str):
    parts = [p for p in text.split(";") if p]
    values = [float(p) for p in parts]
    if len(values) == 1:
        v = values[0]
        return int(v) if v.is_integer() and "." not in text else v
    return values


def parse_fn_spec(spec: str) -> tuple[str, dict]:
    """Parse ``NAME[:k=v,...]``; vector values are ``;``-separated."""
    name, _, rest = spec.partition(":")
    params = {}
    for item in filter(None, rest.split(",")):
        key, sep, value = item.partition("=")
        if not sep:
            raise ValueError(f"malformed parameter {item!r} in {spec!r}")
        params[key.strip()] = _parse_value(value.strip())
    return name.strip(), params


def format_fn_spec(name: str, params: dict) -> str:
    if not params:
        return name

    def fmt(v):
        if isinstance(v, (list, tuple)):
            return ";".join(repr(float(x)) for x in v)
        return str(v)

    return name + ":" + ",".join(f"{k}={fmt(v)}" for k, v in sorted(params.items()))


def describe(names: Sequence[str] = NAMES, d: int = 2) -> list[dict]:
    """Metadata rows for ``corpus list``."""
    rows = []
    for name in names:
        f = get_integrand(name, d)
        sm = f.smoothness
        rows.append({
            "name": name,
            "defaults": _REGISTRY[name][1],
            "support_in_domain": f.support_in_domain,
            "exact_integral_d": f.exact_integral,
            "smoothness": None if sm is None else
            {"mode": sm.mode, "s": sm.S[0], "p": sm.p},
            "fourier": None if f.fourier is None else f.fourier.decay_note,
        })
    return rows
