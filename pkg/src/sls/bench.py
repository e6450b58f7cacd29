"""Benchmark harness: error-vs-sample-size and error-vs-subsample sweeps.

Each grid point is repeated with independent per-repeat seeds, both
relative-error metrics are recorded, and the results can be fitted for a
log-log convergence slope, dumped to CSV, or plotted as an SVG.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .errors import DegenerateDirection, InsufficientPoints
from .estimator import RootOptions, sls_estimate
from .links import LinkKind
from .synth import DesignDistribution, SynthConfig, generate, splitmix64, stream_rng

__all__ = [
    "SampleSizeSweep",
    "SubsampleSweep",
    "ExperimentPlan",
    "ExperimentRecord",
    "relative_error_l2",
    "relative_error_linf",
    "run_experiment",
    "summarize",
    "fit_convergence_slope",
    "emit_csv",
    "emit_plot",
]

CSV_HEADER = "sweep,repeat,seed,err_l2_rel,err_linf_rel,newton_iters_max,runtime_ms,failed"

# stream label for the pinned ground-truth draw, distinct from the
# per-observation labels used inside synth
_STREAM_PINNED_BETA = 100


@dataclass(frozen=True)
class SampleSizeSweep:
    """Vary n with the full-sample Gram matrix."""

    values: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(int(v) for v in self.values))
        _check_increasing(self.values, "sample sizes")


@dataclass(frozen=True)
class SubsampleSweep:
    """Vary the Gram subsample fraction |S|/n at fixed n."""

    fractions: tuple[float, ...]
    n: int

    def __post_init__(self):
        object.__setattr__(self, "fractions", tuple(float(v) for v in self.fractions))
        _check_increasing(self.fractions, "fractions")
        if any(f > 1.0 for f in self.fractions):
            raise ValueError("fractions cannot exceed 1")
        if self.n < 1:
            raise ValueError("n must be positive")

    @property
    def values(self) -> tuple[float, ...]:
        return self.fractions


def _check_increasing(values, what):
    if not values:
        raise ValueError(f"{what} must be non-empty")
    if any(v <= 0 for v in values):
        raise ValueError(f"{what} must be positive")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ValueError(f"{what} must be strictly increasing")


Sweep = Union[SampleSizeSweep, SubsampleSweep]


@dataclass(frozen=True)
class ExperimentPlan:
    sweep: Sweep
    p: int
    dist: DesignDistribution
    links: tuple[LinkKind, ...]
    repeats: int = 20
    master_seed: int = 0
    noise_std: float = 1.0
    beta_mean: float = 1.0
    beta_std: float = 4.0
    pin_beta: bool = False  # share one ground truth across repeats
    root_opts: RootOptions = RootOptions()

    def __post_init__(self):
        object.__setattr__(self, "links", tuple(self.links))
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")
        if not self.links:
            raise ValueError("links must be non-empty")

    @property
    def k(self) -> int:
        return len(self.links)


@dataclass(frozen=True)
class ExperimentRecord:
    """One benchmark row: a grid point, a repeat, and what was measured.

    ``runtime_ms`` times the estimation call only (generation excluded);
    ``failed`` marks repeats where at least one direction found no scale
    root, in which case the error fields are NaN.
    """

    sweep_value: float
    repeat_index: int
    seed: int
    err_l2_rel: float
    err_linf_rel: float
    c_hat: tuple[float, ...]
    newton_iters_max: int
    runtime_ms: float
    failed: bool


def _relative_error(beta_hat: np.ndarray, beta_star: np.ndarray, ord) -> float:
    beta_hat = np.atleast_2d(np.asarray(beta_hat, dtype=float))
    beta_star = np.atleast_2d(np.asarray(beta_star, dtype=float))
    if beta_hat.shape != beta_star.shape:
        raise ValueError(f"shape mismatch: {beta_hat.shape} vs {beta_star.shape}")
    denom = np.linalg.norm(beta_star, ord=ord, axis=1)
    if np.any(denom == 0.0):
        raise DegenerateDirection("a ground-truth row is zero")
    return float(np.max(np.linalg.norm(beta_hat - beta_star, ord=ord, axis=1) / denom))


def relative_error_l2(beta_hat: np.ndarray, beta_star: np.ndarray) -> float:
    """max over directions of ||bhat_j - b*_j||_2 / ||b*_j||_2."""
    return _relative_error(beta_hat, beta_star, ord=2)


def relative_error_linf(beta_hat: np.ndarray, beta_star: np.ndarray) -> float:
    """max over directions of ||bhat_j - b*_j||_inf / ||b*_j||_inf."""
    return _relative_error(beta_hat, beta_star, ord=np.inf)


def _run_one(plan: ExperimentPlan, sweep_value, repeat: int,
             pinned_beta: Optional[np.ndarray]) -> ExperimentRecord:
    seed = splitmix64(plan.master_seed, repeat)
    if isinstance(plan.sweep, SampleSizeSweep):
        n, subsample = int(sweep_value), None
    else:
        n, subsample = plan.sweep.n, float(sweep_value)
    cfg = SynthConfig(
        n=n, p=plan.p, k=plan.k, dist=plan.dist, links=plan.links,
        beta_mean=plan.beta_mean, beta_std=plan.beta_std,
        noise_std=plan.noise_std, master_seed=seed, beta_star=pinned_beta,
    )
    data, spec = generate(cfg)
    t0 = time.perf_counter()
    result = sls_estimate(data, spec.links, subsample=subsample,
                          opts=plan.root_opts, subsample_seed=seed)
    runtime_ms = (time.perf_counter() - t0) * 1e3
    failed = any(d.failed for d in result.diagnostics)
    if failed:
        err_l2 = err_linf = math.nan
    else:
        err_l2 = relative_error_l2(result.beta_nlr, spec.beta_star)
        err_linf = relative_error_linf(result.beta_nlr, spec.beta_star)
    iters = max(d.newton_iters for d in result.diagnostics)
    return ExperimentRecord(
        sweep_value=float(sweep_value), repeat_index=repeat, seed=seed,
        err_l2_rel=err_l2, err_linf_rel=err_linf,
        c_hat=tuple(float(c) for c in result.c_hat),
        newton_iters_max=iters, runtime_ms=runtime_ms, failed=failed,
    )


def run_experiment(plan: ExperimentPlan, threads: int = 1) -> list[ExperimentRecord]:
    """Run every (sweep value, repeat) cell of the plan.

    Results are deterministic in the master seed and independent of
    ``threads``: each cell derives its own seed and the output is sorted
    by (sweep value, repeat). Failures are recorded, never raised.
    """
    pinned = None
    if plan.pin_beta:
        rng = stream_rng(plan.master_seed, _STREAM_PINNED_BETA)
        pinned = rng.normal(plan.beta_mean, plan.beta_std, size=(plan.k, plan.p))
    cells = [(sv, r) for sv in plan.sweep.values for r in range(plan.repeats)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(lambda c: _run_one(plan, c[0], c[1], pinned), cells))
    else:
        records = [_run_one(plan, sv, r, pinned) for sv, r in cells]
    records.sort(key=lambda rec: (rec.sweep_value, rec.repeat_index))
    return records


def summarize(records: Sequence[ExperimentRecord], metric: str = "err_l2_rel"):
    """Group records by sweep value; mean/median/min/max of a metric over
    the non-failed repeats. Returns (values, mean, median, lo, hi)."""
    if metric not in ("err_l2_rel", "err_linf_rel", "runtime_ms"):
        raise ValueError(f"unknown metric {metric!r}")
    values = sorted({rec.sweep_value for rec in records})
    mean, median, lo, hi = [], [], [], []
    for v in values:
        errs = [getattr(r, metric) for r in records if r.sweep_value == v and not r.failed]
        if not errs:
            mean.append(math.nan), median.append(math.nan)
            lo.append(math.nan), hi.append(math.nan)
            continue
        mean.append(float(np.mean(errs)))
        median.append(float(np.median(errs)))
        lo.append(float(np.min(errs)))
        hi.append(float(np.max(errs)))
    return np.array(values), np.array(mean), np.array(median), np.array(lo), np.array(hi)


def fit_convergence_slope(records: Sequence[ExperimentRecord], metric: str = "err_l2_rel") -> float:
    """Least-squares slope of log(mean error) against log(sweep value)."""
    values, mean, _, _, _ = summarize(records, metric)
    keep = np.isfinite(mean)
    values, mean = values[keep], mean[keep]
    if len(values) < 3:
        raise InsufficientPoints(f"need >= 3 distinct sweep values, got {len(values)}")
    return float(np.polyfit(np.log(values), np.log(mean), 1)[0])


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def emit_csv(records: Sequence[ExperimentRecord], destination) -> None:
    """Write records as CSV, one row per (sweep value, repeat), floats with
    17 significant digits so parsing the file recovers them bitwise."""
    rows = sorted(records, key=lambda rec: (rec.sweep_value, rec.repeat_index))
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(",".join([
            _fmt(r.sweep_value), str(r.repeat_index), str(r.seed),
            _fmt(r.err_l2_rel), _fmt(r.err_linf_rel),
            str(r.newton_iters_max), _fmt(r.runtime_ms),
            "true" if r.failed else "false",
        ]))
    text = "\n".join(lines) + "\n"
    if hasattr(destination, "write"):
        destination.write(text)
    else:
        with open(destination, "w", encoding="utf-8") as fh:
            fh.write(text)


def emit_plot(records: Sequence[ExperimentRecord], destination,
              metric: str = "err_l2_rel", xlabel: str = "sweep value") -> None:
    """Plot mean error with min/max whiskers on log-log axes as an SVG."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    values, mean, _, lo, hi = summarize(records, metric)
    keep = np.isfinite(mean)
    values, mean, lo, hi = values[keep], mean[keep], lo[keep], hi[keep]
    if values.size == 0:
        raise ValueError("no successful records to plot")
    fig, ax = plt.subplots(figsize=(6, 4.5))
    fmt = "o-" if values.size > 1 else "o"
    ax.errorbar(values, mean, yerr=np.vstack([mean - lo, hi - mean]), fmt=fmt,
                capsize=3, color="tab:blue")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(metric.replace("_", " "))
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(destination, format="svg")
    plt.close(fig)
