"""Oracle suites run by ``frolov verify``.

Each check returns a :class:`CheckResult` whose ``details`` are plain JSON
values, so the CLI can print them directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .analysis import fourier_tail_bound, relative_difference, rmse_with_se, shift_mse_oracle
from .corpus import bspline_tensor, hat_tensor
from .cubature import Integrand, randomized_frolov
from .generator import ScaledGenerator, build_generator, scale
from .lattice import count_dual_in_box, randomization_for, unit_cube
from .streams import derive_stream

SHIFT_MSE_RTOL = 1e-3
BOX_SLACK = 1e-9
LEMMAS = ("boxes", "shift-mse", "tail-bound")


@dataclass
class CheckResult:
    lemma: str
    passed: bool
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"lemma": self.lemma, "passed": self.passed, **self.details}


def _generator(d: int, n: float) -> ScaledGenerator:
    return scale(build_generator(d), n)


def random_origin_boxes(d: int, n: float, count: int, max_volume: float,
                        min_volume: float, seed: int = 0):
    """Boxes ``[lo, hi]`` containing the origin with log-uniform volumes.

    Side ratios are log-uniform within a factor ``e^3`` of a cube and the
    origin sits at a uniform relative position inside each box.
    """
    rng = derive_stream(seed, 0)
    for _ in range(count):
        vol = math.exp(rng.uniform(math.log(min_volume), math.log(max_volume)))
        logs = rng.uniform(-3.0, 3.0, d)
        logs -= logs.mean()
        sides = vol ** (1.0 / d) * np.exp(logs)
        frac = rng.random(d)
        yield -frac * sides, (1.0 - frac) * sides


def check_boxes(d: int, n: float, count: int = 1000, seed: int = 0) -> CheckResult:
    """Dual-lattice counts in boxes against ``d_B * vol / n``."""
    gen = _generator(d, n)
    dB = gen.det_abs
    worst = -math.inf
    violations = 0
    empty_violations = 0
    for lo, hi in random_origin_boxes(d, n, count, 50.0 * n, 0.05 * n / dB, seed):
        vol = float(np.prod(hi - lo))
        c = count_dual_in_box(gen, lo, hi)
        bound = dB * vol / n
        worst = max(worst, c - bound)
        violations += c > bound + BOX_SLACK
        empty_violations += vol < n / dB and c != 0
    return CheckResult("boxes", violations == 0 and empty_violations == 0, {
        "d": d, "n": n, "boxes": count, "violations": int(violations),
        "nonempty_small_boxes": int(empty_violations),
        "max_count_minus_bound": worst,
    })


def check_shift_mse(d: int, n: float, v_grid: int | None = None) -> CheckResult:
    """Mean squared error over shifts against the dual-lattice sum."""
    if v_grid is None:
        v_grid = 4096 if d == 1 else 256
    gen = _generator(d, n)
    cases = []
    for f in (hat_tensor(d), bspline_tensor(d, 3)):
        lhs, rhs = shift_mse_oracle(f, gen, v_grid)
        cases.append({"fn": f.name, "params": f.params, "lhs": lhs, "rhs": rhs,
                      "relative_difference": relative_difference(lhs, rhs)})
    passed = all(c["relative_difference"] <= SHIFT_MSE_RTOL for c in cases)
    return CheckResult("shift-mse", passed,
                       {"d": d, "n": n, "v_grid": v_grid, "cases": cases})


def replicated_errors(f: Integrand, gen: ScaledGenerator, reps: int,
                      seed: int) -> np.ndarray:
    """Squared errors of ``reps`` randomized estimates, replication ``r`` keyed by ``(seed, 0, r)``."""
    cube = unit_cube(gen.dim)
    out = np.empty(reps)
    for r in range(reps):
        est = randomized_frolov(f, gen, randomization_for(gen.dim, seed, 0, r), cube)
        out[r] = (est.value - f.exact_integral) ** 2
    return out


def check_tail_bound(d: int, n: float, reps: int = 10_000, seed: int = 0) -> CheckResult:
    """Empirical RMSE of the hat function against the Fourier tail bound."""
    gen = _generator(d, n)
    f = hat_tensor(d)
    rmse, se = rmse_with_se(replicated_errors(f, gen, reps, seed))
    bound = fourier_tail_bound(f, gen)
    return CheckResult("tail-bound", rmse <= bound + 3.0 * se, {
        "d": d, "n": n, "reps": reps, "rmse": rmse, "rmse_se": se, "bound": bound,
    })


def run_check(lemma: str, d: int, n: float, **kwargs) -> CheckResult:
    if lemma == "boxes":
        return check_boxes(d, n, **kwargs)
    if lemma == "shift-mse":
        return check_shift_mse(d, n, **kwargs)
    if lemma == "tail-bound":
        return check_tail_bound(d, n, **kwargs)
    raise ValueError(f"unknown lemma {lemma!r}; choose from {', '.join(LEMMAS)}")
