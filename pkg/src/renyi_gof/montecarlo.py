"""Declarative Monte Carlo experiment harness.

Four experiment kinds are supported, mirroring the simulation studies the
statistics were designed for:

* ``consistency``  -- mean and SD of the gap statistic per (N, k) cell;
* ``rate``         -- the same cells plus an OLS fit of log(mean W) against
                      log N, giving an empirical convergence exponent;
* ``normality_sweep`` -- batches of statistics fed to the Shapiro-Wilk test,
                      reporting the mean p-value per (N, k) cell;
* ``fit_curve``    -- the statistic traced over a shape-parameter grid for a
                      single sample, with the minimizer reported.

Replicate r of schedule cell c draws from the Philox stream
``(c << 32) | r`` under the configured root seed, so results are byte-stable
under any thread count and a replicate's draws never depend on how many
other replicates run.  Reports serialize to CSV (one row per cell,
17-significant-digit floats, LF endings) plus a JSON sidecar carrying the
config echo, a content hash of the CSV, and any slope or fit summaries.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import gof, normality
from .distributions import PEARSON2, STUDENT, Seed, sample, standard
from .errors import DomainError, NonPositiveMean

log = logging.getLogger(__name__)

CONSISTENCY = "consistency"
RATE = "rate"
NORMALITY_SWEEP = "normality_sweep"
FIT_CURVE = "fit_curve"
KINDS = (CONSISTENCY, RATE, NORMALITY_SWEEP, FIT_CURVE)

_REPLICATE_KINDS = (CONSISTENCY, RATE, NORMALITY_SWEEP)
_MAX_STREAM_PART = 2**32

_CONFIG_KEYS = {
    "kind", "family", "m", "shape", "k", "n", "replicates", "seed",
    "inner_batch", "fit_bounds", "fit_points",
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully determines an experiment; equal configs give identical reports."""

    kind: str
    family: str
    m: int
    shape: float
    ks: tuple[int, ...]
    n_schedule: tuple[int, ...]
    replicates: int
    seed: int
    inner_batch: int = 100
    fit_bounds: tuple[float, float] | None = None
    fit_points: int = 40

    def __post_init__(self):
        object.__setattr__(self, "ks", tuple(int(k) for k in self.ks))
        object.__setattr__(self, "n_schedule", tuple(int(n) for n in self.n_schedule))
        if self.fit_bounds is not None:
            object.__setattr__(self, "fit_bounds", (float(self.fit_bounds[0]), float(self.fit_bounds[1])))
        if self.kind not in KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}; expected one of {KINDS}")
        if self.family not in (STUDENT, PEARSON2):
            raise ValueError(f"experiments support the student and pearson2 families, got {self.family!r}")
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        if not self.shape > 0.0:
            raise DomainError(f"shape must be positive, got {self.shape}")
        if self.family == STUDENT and self.kind in _REPLICATE_KINDS and self.shape <= 2.0:
            raise DomainError(f"the Student statistic needs nu > 2, got nu={self.shape}")
        if not self.ks or min(self.ks) < 1:
            raise ValueError(f"k values must be positive, got {self.ks}")
        if len(set(self.ks)) != len(self.ks):
            raise ValueError(f"k values must be distinct, got {self.ks}")
        if self.family == PEARSON2 and self.kind in _REPLICATE_KINDS:
            for k in self.ks:
                if k * self.shape <= 1.0:
                    raise DomainError(
                        f"the Pearson II statistic needs k > 1/gamma; got k={k}, gamma={self.shape}"
                    )
        if not self.n_schedule or min(self.n_schedule) < max(self.ks) + 2:
            raise ValueError(
                f"every N must be >= max(k) + 2 = {max(self.ks) + 2}, got {self.n_schedule}"
            )
        if any(b <= a for a, b in zip(self.n_schedule, self.n_schedule[1:])):
            raise ValueError(f"N schedule must be strictly increasing, got {self.n_schedule}")
        if self.kind in _REPLICATE_KINDS and self.replicates < 2:
            raise ValueError(f"need at least 2 replicates, got {self.replicates}")
        if self.kind == RATE and len(self.n_schedule) < 4:
            raise ValueError(f"a rate fit needs at least 4 N values, got {len(self.n_schedule)}")
        if self.kind == NORMALITY_SWEEP:
            if self.inner_batch < 3:
                raise ValueError(f"inner batch size must be >= 3, got {self.inner_batch}")
            if self.replicates * self.inner_batch >= _MAX_STREAM_PART:
                raise ValueError("replicates * inner_batch exceeds the stream budget")
        if self.kind == FIT_CURVE:
            if len(self.n_schedule) != 1 or len(self.ks) != 1:
                raise ValueError("a fit curve uses exactly one N and one k")
            if self.fit_points < 1:
                raise ValueError(f"fit_points must be >= 1, got {self.fit_points}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.replicates >= _MAX_STREAM_PART or len(self.n_schedule) >= _MAX_STREAM_PART:
            raise ValueError("replicate count or schedule length exceeds the stream budget")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        unknown = set(d) - _CONFIG_KEYS
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        missing = {"kind", "family", "m", "shape", "k", "n", "replicates", "seed"} - set(d)
        if missing:
            raise ValueError(f"missing config keys: {sorted(missing)}")
        ks = d["k"] if isinstance(d["k"], (list, tuple)) else [d["k"]]
        ns = d["n"] if isinstance(d["n"], (list, tuple)) else [d["n"]]
        kwargs = {}
        if "inner_batch" in d:
            kwargs["inner_batch"] = int(d["inner_batch"])
        if "fit_bounds" in d and d["fit_bounds"] is not None:
            kwargs["fit_bounds"] = (float(d["fit_bounds"][0]), float(d["fit_bounds"][1]))
        if "fit_points" in d:
            kwargs["fit_points"] = int(d["fit_points"])
        return cls(
            kind=str(d["kind"]),
            family=str(d["family"]),
            m=int(d["m"]),
            shape=float(d["shape"]),
            ks=tuple(int(k) for k in ks),
            n_schedule=tuple(int(n) for n in ns),
            replicates=int(d["replicates"]),
            seed=int(d["seed"]),
            **kwargs,
        )

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "family": self.family,
            "m": self.m,
            "shape": self.shape,
            "k": list(self.ks),
            "n": list(self.n_schedule),
            "replicates": self.replicates,
            "seed": self.seed,
            "inner_batch": self.inner_batch,
            "fit_bounds": list(self.fit_bounds) if self.fit_bounds is not None else None,
            "fit_points": self.fit_points,
        }


def load_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return ExperimentConfig.from_dict(json.load(fh))


@dataclass(frozen=True)
class ExperimentRow:
    """One report cell."""

    k: int
    shape: float
    n: int
    replicates: int
    mean: float
    sd: float


@dataclass(frozen=True)
class ExperimentReport:
    config: ExperimentConfig
    rows: tuple[ExperimentRow, ...]
    # rate only: k -> (slope, intercept) of log mean-statistic vs log N
    slopes: dict[int, tuple[float, float]] | None = None
    # fit curve only
    fit: gof.FitResult | None = None


def _stream(cell: int, replicate: int) -> int:
    return (cell << 32) | replicate


def _parallel_map(fn, items, threads: int | None):
    if threads is None:
        threads = os.cpu_count() or 1
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def collect_statistics(cfg: ExperimentConfig, threads: int | None = None) -> dict[tuple[int, int], np.ndarray]:
    """Per-replicate gap statistics for every (N, k) cell.

    Replicate r of schedule cell c is seeded with stream ``(c << 32) | r``,
    so the array for a cell is identical no matter how many replicates or
    threads any enclosing run uses.
    """
    spec = standard(cfg.family, cfg.m, cfg.shape)
    tasks = [(ci, r) for ci in range(len(cfg.n_schedule)) for r in range(cfg.replicates)]

    def work(task):
        ci, r = task
        x = sample(spec, cfg.n_schedule[ci], Seed(cfg.seed, _stream(ci, r)))
        stats = gof.w_statistics(x, cfg.ks, cfg.family, cfg.shape)
        return {k: res.statistic for k, res in stats.items()}

    results = _parallel_map(work, tasks, threads)
    cells: dict[tuple[int, int], np.ndarray] = {}
    for ci, n in enumerate(cfg.n_schedule):
        for k in cfg.ks:
            vals = [results[ci * cfg.replicates + r][k] for r in range(cfg.replicates)]
            cells[(n, k)] = np.asarray(vals, dtype=float)
    return cells


def _cells_to_rows(cfg: ExperimentConfig, cells) -> tuple[ExperimentRow, ...]:
    rows = []
    for n in cfg.n_schedule:
        for k in cfg.ks:
            vals = cells[(n, k)]
            rows.append(
                ExperimentRow(
                    k=k,
                    shape=cfg.shape,
                    n=n,
                    replicates=cfg.replicates,
                    mean=float(np.mean(vals)),
                    sd=float(np.std(vals, ddof=1)),
                )
            )
    return tuple(rows)


def run_consistency(cfg: ExperimentConfig, threads: int | None = None) -> ExperimentReport:
    """Mean and SD of the gap statistic over replicates, per (N, k)."""
    if cfg.kind != CONSISTENCY:
        raise ValueError(f"config kind is {cfg.kind!r}, expected {CONSISTENCY!r}")
    return ExperimentReport(config=cfg, rows=_cells_to_rows(cfg, collect_statistics(cfg, threads)))


def fit_log_log_slope(ns, means) -> tuple[float, float]:
    """OLS slope and intercept of log(mean) against log(N)."""
    ns = np.asarray(ns, dtype=float)
    means = np.asarray(means, dtype=float)
    slope, intercept = np.polyfit(np.log(ns), np.log(means), 1)
    return float(slope), float(intercept)


def run_rate(cfg: ExperimentConfig, threads: int | None = None) -> ExperimentReport:
    """Consistency cells plus a log-log convergence-rate fit per k.

    The fit uses the signed mean statistic; cells with a nonpositive mean
    are logged and dropped, and fewer than 4 surviving cells is an error.
    """
    if cfg.kind != RATE:
        raise ValueError(f"config kind is {cfg.kind!r}, expected {RATE!r}")
    cells = collect_statistics(cfg, threads)
    rows = _cells_to_rows(cfg, cells)
    slopes = {}
    for k in cfg.ks:
        ns, means = [], []
        for n in cfg.n_schedule:
            mean = float(np.mean(cells[(n, k)]))
            if mean > 0.0:
                ns.append(n)
                means.append(mean)
            else:
                log.warning("dropping N=%d from the k=%d rate fit: mean statistic %g <= 0", n, k, mean)
        if len(ns) < 4:
            raise NonPositiveMean(
                f"only {len(ns)} N values with positive mean statistic remain for k={k}; need >= 4"
            )
        slopes[k] = fit_log_log_slope(ns, means)
    return ExperimentReport(config=cfg, rows=rows, slopes=slopes)


def run_normality_sweep(cfg: ExperimentConfig, threads: int | None = None) -> ExperimentReport:
    """Mean Shapiro-Wilk p-value of statistic batches, per (N, k).

    For every outer repetition, ``inner_batch`` independent samples yield a
    batch of statistics whose normality is tested; the report aggregates
    the p-values over the outer repetitions.
    """
    if cfg.kind != NORMALITY_SWEEP:
        raise ValueError(f"config kind is {cfg.kind!r}, expected {NORMALITY_SWEEP!r}")
    spec = standard(cfg.family, cfg.m, cfg.shape)
    batch = cfg.inner_batch
    tasks = [
        (ci, j, i)
        for ci in range(len(cfg.n_schedule))
        for j in range(cfg.replicates)
        for i in range(batch)
    ]

    def work(task):
        ci, j, i = task
        x = sample(spec, cfg.n_schedule[ci], Seed(cfg.seed, _stream(ci, j * batch + i)))
        stats = gof.w_statistics(x, cfg.ks, cfg.family, cfg.shape)
        return {k: res.statistic for k, res in stats.items()}

    results = _parallel_map(work, tasks, threads)
    per_cell = cfg.replicates * batch  # tasks per schedule cell
    rows = []
    for ci, n in enumerate(cfg.n_schedule):
        base = ci * per_cell
        for k in cfg.ks:
            pvals = []
            for j in range(cfg.replicates):
                ws = [results[base + j * batch + i][k] for i in range(batch)]
                pvals.append(normality.shapiro_wilk(ws).p_value)
            rows.append(
                ExperimentRow(
                    k=k,
                    shape=cfg.shape,
                    n=n,
                    replicates=cfg.replicates,
                    mean=float(np.mean(pvals)),
                    sd=float(np.std(pvals, ddof=1)),
                )
            )
    return ExperimentReport(config=cfg, rows=tuple(rows))


def run_fit_curve(cfg: ExperimentConfig, threads: int | None = None) -> ExperimentReport:
    """Trace the statistic over a shape grid for one sample and report the
    minimizer."""
    if cfg.kind != FIT_CURVE:
        raise ValueError(f"config kind is {cfg.kind!r}, expected {FIT_CURVE!r}")
    del threads  # a single sample; nothing to parallelize
    n = cfg.n_schedule[0]
    k = cfg.ks[0]
    x = sample(standard(cfg.family, cfg.m, cfg.shape), n, Seed(cfg.seed, _stream(0, 0)))
    fit = gof.fit_shape(x, k, cfg.family, bounds=cfg.fit_bounds, grid_points=cfg.fit_points)
    rows = tuple(
        ExperimentRow(k=k, shape=s, n=n, replicates=1, mean=w, sd=0.0)
        for s, w in sorted(fit.trace)
    )
    return ExperimentReport(config=cfg, rows=rows, fit=fit)


_RUNNERS = {
    CONSISTENCY: run_consistency,
    RATE: run_rate,
    NORMALITY_SWEEP: run_normality_sweep,
    FIT_CURVE: run_fit_curve,
}


def run_experiment(cfg: ExperimentConfig, threads: int | None = None) -> ExperimentReport:
    """Dispatch on ``cfg.kind``."""
    return _RUNNERS[cfg.kind](cfg, threads)


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def report_csv_text(report: ExperimentReport) -> str:
    """Render the report rows; one line per cell, LF endings."""
    cfg = report.config
    header = "kind,family,m,k,shape,N,replicates,mean,sd"
    with_slope = cfg.kind == RATE
    if with_slope:
        header += ",slope"
    lines = [header]
    for row in report.rows:
        fields = [
            cfg.kind,
            cfg.family,
            str(cfg.m),
            str(row.k),
            _fmt(row.shape),
            str(row.n),
            str(row.replicates),
            _fmt(row.mean),
            _fmt(row.sd),
        ]
        if with_slope:
            fields.append(_fmt(report.slopes[row.k][0]))
        lines.append(",".join(fields))
    return "\n".join(lines) + "\n"


def report_json_text(report: ExperimentReport, csv_sha256: str) -> str:
    """Config echo, CSV content hash and any slope/fit summaries."""
    doc: dict = {
        "config": report.config.to_dict(),
        "rows": len(report.rows),
        "csv_sha256": csv_sha256,
    }
    if report.slopes is not None:
        doc["slopes"] = {
            str(k): {"slope": sl, "intercept": ic} for k, (sl, ic) in sorted(report.slopes.items())
        }
    if report.fit is not None:
        doc["fit"] = {
            "shape_hat": report.fit.shape_hat,
            "statistic_at_min": report.fit.statistic_at_min,
            "no_minimum_in_bounds": report.fit.no_minimum_in_bounds,
        }
    return json.dumps(doc, indent=2) + "\n"


def write_report(report: ExperimentReport, stem) -> tuple[Path, Path]:
    """Write ``<stem>.csv`` and ``<stem>.json``; returns the two paths."""
    stem = Path(stem)
    csv_path = stem.with_suffix(".csv")
    json_path = stem.with_suffix(".json")
    csv_text = report_csv_text(report)
    csv_bytes = csv_text.encode("utf-8")
    csv_path.write_bytes(csv_bytes)
    digest = hashlib.sha256(csv_bytes).hexdigest()
    json_path.write_bytes(report_json_text(report, digest).encode("utf-8"))
    return csv_path, json_path
