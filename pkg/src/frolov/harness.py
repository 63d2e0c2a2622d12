"""Reproducible convergence studies.

Replication ``r`` at grid index ``i`` always draws from
``derive_stream(seed, i, r)``, so studies can be split across runs or
processes and pooled afterwards from their raw squared errors.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .analysis import RatePrediction, fit_rate, rmse_with_se
from .corpus import format_fn_spec, get_integrand
from .cubature import baseline_mc, randomized_frolov
from .errors import EnumerationLimitError
from .generator import build_generator, scale
from .lattice import DEFAULT_CAP, draw_randomization, unit_cube
from .streams import derive_stream
from .transform import transform_T

METHODS = ("frolov", "frolov-boundary-free", "mc")
DEFAULT_N_GRID = tuple(2.0 ** k for k in range(6, 14))

RESULT_COLUMNS = ["fn", "d", "method", "seed", "n", "reps", "rmse", "rmse_se",
                  "mean_est", "exact", "mean_node_count"]
RAW_COLUMNS = ["fn", "d", "method", "seed", "n_index", "n", "rep", "estimate",
               "sq_error", "node_count"]


def fmt_float(x) -> str:
    if x is None:
        return ""
    return "%.17g" % float(x)


def default_check_radius(d: int) -> int:
    return 20 if d <= 4 else 6


@dataclass(frozen=True)
class StudyConfig:
    fn: str
    dim: int
    method: str = "frolov"
    n_grid: tuple = DEFAULT_N_GRID
    reps: int = 200
    seed: int = 0
    params: dict = field(default_factory=dict)
    rep_start: int = 0
    out: Optional[str] = None
    raw: Optional[str] = None
    workers: int = 1
    cap: int = DEFAULT_CAP

    def __post_init__(self):
        grid = tuple(float(n) for n in self.n_grid)
        if not grid or any(n <= 0 for n in grid):
            raise ValueError("n_grid must hold positive values")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("n_grid must be strictly increasing")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if int(self.reps) < 2:
            raise ValueError("reps must be >= 2")
        if int(self.rep_start) < 0:
            raise ValueError("rep_start must be >= 0")
        object.__setattr__(self, "n_grid", grid)
        object.__setattr__(self, "reps", int(self.reps))
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def fn_label(self) -> str:
        return format_fn_spec(self.fn, self.params)


@dataclass(frozen=True)
class StudyRecord:
    n: float
    reps: int
    rmse: float
    rmse_se: float
    mean_est: float
    exact: Optional[float]
    mean_node_count: float


@dataclass(frozen=True)
class RawRow:
    n_index: int
    n: float
    rep: int
    estimate: float
    sq_error: float
    node_count: int


@lru_cache(maxsize=8)
def _base_generator(d: int):
    return build_generator(d, default_check_radius(d))


def _estimator(config: StudyConfig):
    f = get_integrand(config.fn, config.dim, config.params)
    if f.exact_integral is None:
        raise ValueError(f"{config.fn} has no known exact integral")
    if config.method == "frolov" and not f.support_in_domain:
        raise ValueError(f"{config.fn} needs method frolov-boundary-free")
    if config.method == "mc":
        def estimate(n, stream):
            return baseline_mc(f, int(round(n)), None, stream)
        return f, estimate
    target = transform_T(f) if config.method == "frolov-boundary-free" else f
    base = _base_generator(config.dim)
    cube = unit_cube(config.dim)

    def estimate(n, stream):
        rand = draw_randomization(config.dim, stream)
        return randomized_frolov(target, scale(base, n), rand, cube, config.cap)
    return f, estimate


def _replicate(config: StudyConfig, n_index: int, reps: Sequence[int]) -> list[RawRow]:
    f, estimate = _estimator(config)
    n = config.n_grid[n_index]
    rows = []
    for rep in reps:
        stream = derive_stream(config.seed, n_index, rep)
        try:
            res = estimate(n, stream)
        except EnumerationLimitError as exc:
            raise EnumerationLimitError(
                f"{exc} (n={n:g}, grid index {n_index}, replication {rep})") from exc
        err = res.value - f.exact_integral
        rows.append(RawRow(n_index, n, rep, res.value, err * err, res.node_count))
    return rows


def _task(args):
    return _replicate(*args)


def simulate(config: StudyConfig) -> tuple[list[StudyRecord], list[RawRow]]:
    """Run every replication of ``config``; returns records and raw rows."""
    reps = range(config.rep_start, config.rep_start + config.reps)
    tasks = []
    for i in range(len(config.n_grid)):
        if config.workers > 1:
            step = max(1, math.ceil(config.reps / config.workers))
            tasks += [(config, i, reps[j:j + step]) for j in range(0, config.reps, step)]
        else:
            tasks.append((config, i, reps))
    if config.workers > 1:
        with ProcessPoolExecutor(config.workers) as pool:
            chunks = list(pool.map(_task, tasks))
    else:
        chunks = [_task(t) for t in tasks]
    raw = [row for chunk in chunks for row in chunk]
    exact = get_integrand(config.fn, config.dim, config.params).exact_integral
    return pool_raw(raw, exact), raw


def run_study(config: StudyConfig) -> list[StudyRecord]:
    """One :class:`StudyRecord` per grid value, deterministic given ``config``."""
    records, raw = simulate(config)
    if config.out:
        write_results(config.out, config, records)
    if config.raw:
        write_raw(config.raw, config, raw)
    return records


def pool_raw(rows: Iterable[RawRow], exact: Optional[float]) -> list[StudyRecord]:
    """Aggregate raw replication rows per ``n``, independent of row order."""
    groups: dict[float, list[RawRow]] = {}
    for row in rows:
        groups.setdefault(float(row.n), []).append(row)
    records = []
    for n in sorted(groups):
        g = sorted(groups[n], key=lambda r: r.rep)
        R = len(g)
        rmse, se = rmse_with_se([r.sq_error for r in g])
        records.append(StudyRecord(
            n=n, reps=R, rmse=rmse, rmse_se=se,
            mean_est=math.fsum(r.estimate for r in g) / R,
            exact=exact,
            mean_node_count=math.fsum(r.node_count for r in g) / R,
        ))
    return records


# ---------------------------------------------------------------------------
# files

def results_csv(config: StudyConfig, records: Sequence[StudyRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RESULT_COLUMNS)
    for r in records:
        w.writerow([config.fn_label, config.dim, config.method, config.seed,
                    fmt_float(r.n), r.reps, fmt_float(r.rmse), fmt_float(r.rmse_se),
                    fmt_float(r.mean_est), fmt_float(r.exact),
                    fmt_float(r.mean_node_count)])
    return buf.getvalue()


def write_results(path, config: StudyConfig, records: Sequence[StudyRecord]) -> None:
    Path(path).write_text(results_csv(config, records), newline="")


def write_raw(path, config: StudyConfig, rows: Sequence[RawRow]) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RAW_COLUMNS)
    for r in rows:
        w.writerow([config.fn_label, config.dim, config.method, config.seed,
                    r.n_index, fmt_float(r.n), r.rep, fmt_float(r.estimate),
                    fmt_float(r.sq_error), r.node_count])
    Path(path).write_text(buf.getvalue(), newline="")


def _opt_float(text: str) -> Optional[float]:
    return None if text == "" else float(text)


def read_results(path) -> tuple[list[dict], list[StudyRecord]]:
    """Rows of a results file as (metadata dicts, records)."""
    meta, records = [], []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != RESULT_COLUMNS:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        for row in reader:
            meta.append({k: row[k] for k in ("fn", "d", "method", "seed")})
            records.append(StudyRecord(
                n=float(row["n"]), reps=int(row["reps"]), rmse=float(row["rmse"]),
                rmse_se=float(row["rmse_se"]), mean_est=float(row["mean_est"]),
                exact=_opt_float(row["exact"]),
                mean_node_count=float(row["mean_node_count"])))
    return meta, records


def read_raw(path) -> list[RawRow]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != RAW_COLUMNS:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        return [RawRow(int(r["n_index"]), float(r["n"]), int(r["rep"]),
                       float(r["estimate"]), float(r["sq_error"]), int(r["node_count"]))
                for r in reader]


def load_config_file(path) -> dict:
    """Parse ``key=value`` lines (``#`` comments allowed); dashes become underscores."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"{path}:{lineno}: expected key=value")
        out[key.strip().lstrip("-").replace("-", "_")] = value.strip()
    return out


# ---------------------------------------------------------------------------
# reporting

def report(records: Sequence[StudyRecord],
           prediction: Optional[RatePrediction] = None) -> str:
    """Plain-text summary: fitted slope, predicted exponent, per-n table."""
    if not records:
        raise ValueError("report needs at least one record")
    lines = []
    try:
        fit = fit_rate(records)
        lines.append(f"fitted slope: {fit.slope:.3f} +/- {fit.stderr:.3f}"
                     f" (intercept {fit.intercept:.3f})")
    except ValueError as exc:
        lines.append(f"fitted slope: unavailable ({exc})")
    if prediction is not None:
        lines.append(f"predicted exponent: {prediction.exponent:.3f} ({prediction.mode})")
        if not prediction.regime_ok:
            lines.append("REGIME-VIOLATION: smoothness below max(0, 1/p - 1/2);"
                         " the predicted exponent does not apply")
    lines.append("")
    lines.append(f"{'n':>12} {'reps':>6} {'rmse':>12} {'rmse_se':>12}"
                 f" {'mean_est':>14} {'exact':>14} {'nodes':>10}")
    for r in records:
        exact = "" if r.exact is None else f"{r.exact:.8g}"
        lines.append(f"{r.n:>12.6g} {r.reps:>6d} {r.rmse:>12.4e} {r.rmse_se:>12.4e}"
                     f" {r.mean_est:>14.8g} {exact:>14} {r.mean_node_count:>10.2f}")
    return "\n".join(lines) + "\n"
