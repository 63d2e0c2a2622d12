"""Node sets of the randomized Frolov rule and dual-lattice box counts.

The nodes are ``P_n = Omega ∩ (U B_n)^{-T} (Z^d + v)``.  Writing
``A = (U B_n)^T``, a point ``x`` is a node iff ``A x - v`` is an integer
vector, so we scan integer vectors ``m`` inside the axis-aligned bounding
box of ``A(box) - v`` (``box`` bounding ``Omega``), map them back and keep
those inside ``Omega``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import EnumerationLimitError
from .generator import ScaledGenerator
from .streams import derive_stream

DEFAULT_CAP = 10 ** 9
_CHUNK = 1 << 18


@dataclass(frozen=True)
class Domain:
    """Integration domain: a membership predicate plus a bounding box.

    The domain is closed, so boundary points belong to it.  ``predicate``
    receives an ``(N, d)`` array known to lie in the bounding box and returns
    a boolean mask; ``None`` means the domain is the box itself.
    """

    kind: str
    lower: np.ndarray
    upper: np.ndarray
    volume: float
    predicate: Optional[Callable[[np.ndarray], np.ndarray]] = field(
        default=None, repr=False, compare=False)

    @property
    def dim(self) -> int:
        return len(self.lower)

    def contains(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        inside = np.all((x >= self.lower) & (x <= self.upper), axis=1)
        if self.predicate is not None and inside.any():
            inside[inside] = np.asarray(self.predicate(x[inside]), dtype=bool)
        return inside


def unit_cube(d: int) -> Domain:
    return Domain("unit-cube", np.zeros(d), np.ones(d), 1.0)


def box_domain(lower, upper) -> Domain:
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    if lower.shape != upper.shape or np.any(upper <= lower):
        raise ValueError("box needs lower < upper componentwise")
    return Domain("box", lower, upper, float(np.prod(upper - lower)))


def general_domain(predicate, lower, upper, volume: float) -> Domain:
    """Domain given by ``predicate`` inside the box ``[lower, upper]``."""
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    return Domain("general", lower, upper, float(volume), predicate)


@dataclass(frozen=True)
class Randomization:
    """Random dilation ``u`` in ``[1/2, 3/2]^d`` and shift ``v`` in ``[0, 1)^d``."""

    u: np.ndarray
    v: np.ndarray
    seed: Optional[int] = None
    index: Optional[int] = None

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float).ravel()
        v = np.asarray(self.v, dtype=float).ravel()
        if u.shape != v.shape:
            raise ValueError("u and v must have the same length")
        if np.any(u < 0.5) or np.any(u > 1.5):
            raise ValueError(f"dilation outside [1/2, 3/2]: {u}")
        if np.any(v < 0.0) or np.any(v >= 1.0):
            raise ValueError(f"shift outside [0, 1): {v}")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    @property
    def dim(self) -> int:
        return len(self.u)


def draw_randomization(d: int, stream: np.random.Generator,
                       seed: Optional[int] = None,
                       index: Optional[int] = None) -> Randomization:
    """Draw ``u`` then ``v`` from ``stream``; provenance is recorded as given."""
    u = 0.5 + stream.random(d)
    v = stream.random(d)
    return Randomization(u, v, seed=seed, index=index)


def randomization_for(d: int, seed: int, *indices: int) -> Randomization:
    """Randomization drawn from the stream keyed by ``(seed, *indices)``."""
    return draw_randomization(d, derive_stream(seed, *indices), seed=seed,
                              index=indices[-1] if indices else None)


@dataclass(frozen=True)
class NodeSet:
    nodes: np.ndarray
    weight: float
    n: float
    randomization: Optional[Randomization] = None

    def __len__(self) -> int:
        return len(self.nodes)


def _integer_range(M, lower, upper, shift):
    """Integer bounds covering ``M x - shift`` for ``x`` in ``[lower, upper]``."""
    Mp = np.clip(M, 0.0, None)
    Mn = np.clip(M, None, 0.0)
    ymin = Mp @ lower + Mn @ upper - shift
    ymax = Mp @ upper + Mn @ lower - shift
    # floor/ceil widen by at most one where a bound is exactly an integer;
    # the membership filter removes the extras
    return np.floor(ymin).astype(np.int64), np.ceil(ymax).astype(np.int64)


def _scan_box(lo, hi, cap):
    counts = hi - lo + 1
    total = int(np.prod(counts.astype(object)))
    if total > cap:
        raise EnumerationLimitError(
            f"candidate box of {total} integer vectors exceeds cap {cap}")
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, total))
        yield np.stack(np.unravel_index(idx, counts), axis=1) + lo


def lattice_points(A, v, dom: Domain, cap: int = DEFAULT_CAP) -> np.ndarray:
    """All ``x`` in ``dom`` with ``A x - v`` integral, sorted lexicographically.

    Parameters
    ----------
    A : ndarray, shape (d, d)
        Invertible matrix; the points are ``A^{-1}(Z^d + v)``.
    v : ndarray, shape (d,)
        Shift.
    dom : Domain
    cap : int
        Maximum number of integer candidates to scan.
    """
    A = np.asarray(A, dtype=float)
    v = np.asarray(v, dtype=float)
    A_inv = np.linalg.inv(A)
    lo, hi = _integer_range(A, dom.lower, dom.upper, v)
    found = []
    for m in _scan_box(lo, hi, cap):
        x = (m + v) @ A_inv.T
        found.append(x[dom.contains(x)])
    x = np.concatenate(found) if found else np.empty((0, len(v)))
    if len(x) > 1:
        x = x[np.lexsort(x.T[::-1])]
    return x


def enumerate_nodes(gen: ScaledGenerator, rand: Randomization, dom: Domain,
                    cap: int = DEFAULT_CAP) -> NodeSet:
    """Realize ``P_n = dom ∩ (U B_n)^{-T}(Z^d + v)``.

    The common weight is ``1 / det(U B_n) = 1 / (n * prod(u))``, the inverse
    node density; with ``u = 1`` it reduces to ``1/n``.
    """
    if rand.dim != gen.dim or dom.dim != gen.dim:
        raise ValueError("dimension mismatch between generator, randomization and domain")
    A = (rand.u[:, None] * gen.entries).T
    nodes = lattice_points(A, rand.v, dom, cap)
    weight = 1.0 / (gen.n * math.prod(rand.u.tolist()))
    return NodeSet(nodes=nodes, weight=weight, n=gen.n, randomization=rand)


def count_dual_in_box(gen, lower, upper, cap: int = DEFAULT_CAP) -> int:
    """Number of points of ``B_n(Z^d \\ {0})`` in the closed box ``[lower, upper]``.

    ``gen`` is a :class:`ScaledGenerator` or a plain square matrix.  The box
    must contain the origin.
    """
    Bn = gen.entries if isinstance(gen, ScaledGenerator) else np.asarray(gen, dtype=float)
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    if np.any(lower > 0) or np.any(upper < 0):
        raise ValueError("box must contain the origin")
    lo, hi = _integer_range(np.linalg.inv(Bn), lower, upper, np.zeros(len(lower)))
    count = 0
    for m in _scan_box(lo, hi, cap):
        y = m @ Bn.T
        inside = np.all((y >= lower) & (y <= upper), axis=1)
        inside &= np.any(m != 0, axis=1)
        count += int(inside.sum())
    return count
