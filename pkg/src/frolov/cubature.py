"""Frolov cubature rules and a plain Monte Carlo baseline."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np

from .generator import ScaledGenerator
from .lattice import (DEFAULT_CAP, Domain, Randomization, _integer_range,
                      enumerate_nodes, lattice_points, unit_cube)


@dataclass(frozen=True)
class Integrand:
    """A vectorized integrand ``f: R^d -> R``.

    ``fn`` maps an ``(N, d)`` array to ``N`` values.  When
    ``support_in_domain`` is true the function vanishes outside the
    integration domain, which is what the lattice rules require.
    """

    name: str
    dim: int
    fn: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    support_in_domain: bool = True
    exact_integral: Optional[float] = None
    smoothness: Any = None
    fourier: Any = field(default=None, repr=False)
    params: dict = field(default_factory=dict)

    def __call__(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.dim:
            raise ValueError(f"{self.name} expects points of dimension {self.dim}")
        return np.asarray(self.fn(x), dtype=float)


@dataclass(frozen=True)
class EstimateResult:
    value: float
    n: float
    node_count: int
    randomization: Optional[Randomization] = None


def _require_support(f: Integrand):
    if not f.support_in_domain:
        raise ValueError(
            f"{f.name} is not supported inside the domain; apply transform_T first")


def _weighted_sum(f: Integrand, x: np.ndarray) -> float:
    if len(x) == 0:
        return 0.0
    return math.fsum(f(x))


def q_deterministic(f: Integrand, B, v, dom: Domain,
                    cap: int = DEFAULT_CAP) -> float:
    """Frolov's rule ``|det B|^{-1} sum_m f(B^{-T}(m + v))``.

    The lattice sum is truncated to ``dom``, outside of which ``f`` vanishes.
    """
    _require_support(f)
    B = np.asarray(B, dtype=float)
    x = lattice_points(B.T, np.asarray(v, dtype=float), dom, cap)
    return _weighted_sum(f, x) / abs(np.linalg.det(B))


def q_deterministic_batch(f: Integrand, B, shifts, dom: Domain,
                          cap: int = 10 ** 8) -> np.ndarray:
    """:func:`q_deterministic` for many shifts ``v`` in ``[0, 1)^d`` at once.

    One candidate box covering every shift is scanned; shifts are processed
    in blocks to bound memory.
    """
    _require_support(f)
    B = np.asarray(B, dtype=float)
    shifts = np.atleast_2d(np.asarray(shifts, dtype=float))
    d = B.shape[0]
    A = B.T
    A_inv = np.linalg.inv(A)
    lo, _ = _integer_range(A, dom.lower, dom.upper, np.ones(d))
    _, hi = _integer_range(A, dom.lower, dom.upper, np.zeros(d))
    counts = hi - lo + 1
    total = int(np.prod(counts))
    if total > cap:
        raise ValueError(f"candidate box of {total} vectors exceeds cap {cap}")
    m = np.stack(np.unravel_index(np.arange(total), counts), axis=1) + lo
    base = m @ A_inv.T
    step = A_inv.T
    block = max(1, (1 << 22) // total)
    out = np.empty(len(shifts))
    for start in range(0, len(shifts), block):
        vs = shifts[start:start + block]
        x = base[None, :, :] + (vs @ step)[:, None, :]
        flat = x.reshape(-1, d)
        vals = np.zeros(len(flat))
        inside = dom.contains(flat)
        if inside.any():
            vals[inside] = f(flat[inside])
        out[start:start + block] = vals.reshape(len(vs), total).sum(axis=1)
    return out / abs(np.linalg.det(B))


def randomized_frolov(f: Integrand, gen: ScaledGenerator, rand: Randomization,
                      dom: Domain | None = None,
                      cap: int = DEFAULT_CAP) -> EstimateResult:
    """Randomized Frolov estimate ``Q_{U B_n, v}(f)``.

    Every node carries the weight ``1 / (n * prod(u))`` regardless of how
    many nodes fall in the domain; dividing by the node count instead would
    bias the estimator.
    """
    _require_support(f)
    dom = unit_cube(gen.dim) if dom is None else dom
    nodes = enumerate_nodes(gen, rand, dom, cap)
    value = _weighted_sum(f, nodes.nodes) * nodes.weight
    return EstimateResult(value=value, n=gen.n, node_count=len(nodes),
                          randomization=rand)


def baseline_mc(f: Integrand, n: int, dom: Domain | None,
                stream: np.random.Generator) -> EstimateResult:
    """Plain Monte Carlo with ``n`` i.i.d. uniform points in the unit cube."""
    n = int(n)
    if n < 1:
        raise ValueError("n must be >= 1")
    dom = unit_cube(f.dim) if dom is None else dom
    if dom.kind != "unit-cube":
        raise ValueError("the Monte Carlo baseline only supports the unit cube")
    x = stream.random((n, f.dim))
    return EstimateResult(value=math.fsum(f(x)) / n, n=float(n), node_count=n)
