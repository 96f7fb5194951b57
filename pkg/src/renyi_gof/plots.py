"""Render experiment reports as figures.

Figures are drawn straight onto an Agg canvas (no pyplot, no global state)
so the report path stays usable from threads and headless runs.  Each
experiment kind gets the plot its numbers are usually read from: error-bar
convergence curves, a log-log rate fit, p-value sweeps, or the U-shaped
profile of the statistic over the shape grid.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .distributions import STUDENT
from .montecarlo import CONSISTENCY, FIT_CURVE, NORMALITY_SWEEP, RATE, ExperimentReport


def _shape_label(report: ExperimentReport) -> str:
    sym = r"$\nu$" if report.config.family == STUDENT else r"$\gamma$"
    return f"{sym}={report.config.shape:g}"


def _series(report: ExperimentReport, k: int):
    rows = [r for r in report.rows if r.k == k]
    return (
        np.array([r.n for r in rows]),
        np.array([r.mean for r in rows]),
        np.array([r.sd for r in rows]),
    )


def render_report_figure(report: ExperimentReport, path) -> Path:
    """Write a PNG for the report next to its CSV; returns the path."""
    cfg = report.config
    fig = Figure(figsize=(6.4, 4.4), dpi=130)
    FigureCanvasAgg(fig)
    ax = fig.add_subplot(111)
    title = f"{cfg.family}, m={cfg.m}, {_shape_label(report)}"

    if cfg.kind == CONSISTENCY:
        for k in cfg.ks:
            ns, means, sds = _series(report, k)
            ax.errorbar(ns, means, yerr=sds, marker="o", capsize=3, label=f"k={k}")
        ax.axhline(0.0, color="0.6", lw=0.8)
        ax.set_xlabel("sample size N")
        ax.set_ylabel("mean statistic")
        ax.set_title(f"Convergence of the entropy gap ({title})")
        ax.legend()
    elif cfg.kind == RATE:
        for k in cfg.ks:
            ns, means, _ = _series(report, k)
            keep = means > 0
            ax.loglog(ns[keep], means[keep], "o", label=f"k={k}")
            slope, intercept = report.slopes[k]
            grid = np.geomspace(ns.min(), ns.max(), 50)
            ax.loglog(grid, np.exp(intercept) * grid**slope, "--",
                      label=f"k={k} fit: slope {slope:.3f}")
        ax.set_xlabel("sample size N")
        ax.set_ylabel("mean statistic")
        ax.set_title(f"Empirical convergence rate ({title})")
        ax.legend()
    elif cfg.kind == NORMALITY_SWEEP:
        for k in cfg.ks:
            ns, means, sds = _series(report, k)
            ax.errorbar(ns, means, yerr=sds, marker="o", capsize=3, label=f"k={k}")
        ax.set_ylim(0.0, 1.0)
        ax.set_xlabel("sample size N")
        ax.set_ylabel("mean Shapiro-Wilk p-value")
        ax.set_title(f"Normality of the statistic ({title})")
        ax.legend()
    elif cfg.kind == FIT_CURVE:
        shapes = np.array([r.shape for r in report.rows])
        stats = np.array([r.mean for r in report.rows])
        ax.plot(shapes, stats, "-o", ms=3)
        ax.axvline(report.fit.shape_hat, color="C3", ls="--",
                   label=f"estimate {report.fit.shape_hat:.3f}")
        ax.axvline(cfg.shape, color="0.5", ls=":", label=f"true {cfg.shape:g}")
        ax.set_xlabel("shape parameter")
        ax.set_ylabel("statistic")
        ax.set_title(f"Shape-parameter profile ({title})")
        ax.legend()
    else:  # pragma: no cover - kinds are validated upstream
        raise ValueError(f"unknown experiment kind {cfg.kind!r}")

    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path)
    return path
