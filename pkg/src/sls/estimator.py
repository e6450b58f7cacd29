"""Scaled least squares estimation.

The pipeline per direction j is:

1. one shared Gram inverse (X'X)^{-1}, full or sub-sampled,
2. the least-squares vector b_j = ginv @ X'(Z[:, j] * y),
3. the scale c_j solving (c/n) * sum_i f_j'(c * <x_i, b_j>) = 1,
   found by safeguarded Newton iteration,
4. the final estimate c_j * b_j.

Sub-sampling replaces (X'X)^{-1} with (|S|/n) * (X_S' X_S)^{-1}, cutting
the Gram cost from O(n p^2) to O(|S| p^2) at a sqrt(p/|S|) accuracy cost.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
import scipy.linalg

from .errors import NonFiniteScale, NoRootInRange, SingularGram
from .links import LinkFunction
from .model import Dataset

__all__ = [
    "GramInverse",
    "RootOptions",
    "RootDiagnostics",
    "EstimationResult",
    "gram_inverse_full",
    "gram_inverse_subsampled",
    "ols_direction",
    "empirical_scale",
    "empirical_scale_deriv",
    "newton_root",
    "sls_estimate",
]

# a Cholesky pivot at or below PIVOT_RTOL * trace(X'X)/p marks rank deficiency
PIVOT_RTOL = 1e-12


@dataclass(frozen=True)
class GramInverse:
    """An approximation of (X'X)^{-1} plus its provenance.

    ``source`` is "full" or "subsampled"; ``subsample_size`` is |S| for the
    sub-sampled variant and None otherwise.
    """

    matrix: np.ndarray
    source: str
    subsample_size: Optional[int] = None


@dataclass(frozen=True)
class RootOptions:
    """Controls for the scale root-finder.

    ``c_max`` caps the search interval (0, c_max]; no sign change of the
    scale equation inside it means the growth condition fails and the
    solver raises instead of returning garbage. ``root_subsample``, when
    set, evaluates the scale equation on that many randomly chosen rows of
    ytilde instead of all n (a cheap opt-in acceleration; default off).
    """

    c_init: float = 1.0
    c_max: float = 1e6
    tol: float = 1e-10
    max_iter: int = 100
    deriv_floor: float = 1e-12
    root_subsample: Optional[int] = None

    def __post_init__(self):
        if not (0.0 < self.c_init <= self.c_max):
            raise ValueError("require 0 < c_init <= c_max")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.deriv_floor <= 0:
            raise ValueError("deriv_floor must be positive")


@dataclass
class RootDiagnostics:
    """Per-direction record of how the scale root was (or was not) found.

    ``assumption_note`` is set when the direction's link falls outside the
    bounded-derivative regime the error guarantees assume (an unbounded f'
    is estimated anyway, just flagged).
    """

    newton_iters: int = 0
    converged: bool = False
    used_bisection: bool = False
    final_residual: float = math.nan
    bracket_lo: float = math.nan
    bracket_hi: float = math.nan
    failed: bool = False
    error: Optional[str] = None
    assumption_note: Optional[str] = None


@dataclass(frozen=True)
class EstimationResult:
    """Per-direction least-squares vectors, scales, and final estimates.

    Row j of ``beta_nlr`` is exactly ``c_hat[j] * beta_ols[j]`` (a single
    scalar multiplication, never a re-solve). Failed directions carry NaN
    in ``c_hat`` and ``beta_nlr`` and are flagged in ``diagnostics``.
    """

    beta_ols: np.ndarray
    c_hat: np.ndarray
    beta_nlr: np.ndarray
    diagnostics: tuple[RootDiagnostics, ...]

    @property
    def all_converged(self) -> bool:
        return all(not d.failed and d.converged for d in self.diagnostics)


def _spd_inverse(gram: np.ndarray) -> np.ndarray:
    """Invert an SPD matrix via Cholesky, rejecting near-singular input."""
    p = gram.shape[0]
    threshold = PIVOT_RTOL * float(np.trace(gram)) / p
    try:
        chol = np.linalg.cholesky(gram)
    except np.linalg.LinAlgError:
        raise SingularGram("X'X is not positive definite") from None
    pivots = np.diag(chol) ** 2
    if np.min(pivots) <= threshold:
        raise SingularGram(
            f"rank-deficient design: smallest pivot {np.min(pivots):.3e} "
            f"<= threshold {threshold:.3e}"
        )
    inv = scipy.linalg.cho_solve((chol, True), np.eye(p))
    return (inv + inv.T) / 2.0


def gram_inverse_full(X: np.ndarray) -> GramInverse:
    """(X'X)^{-1} from the whole sample."""
    n, p = X.shape
    if n < p:
        raise ValueError(f"need n >= p, got n={n}, p={p}")
    return GramInverse(_spd_inverse(X.T @ X), source="full")


def gram_inverse_subsampled(X: np.ndarray, subsample_indices: Sequence[int]) -> GramInverse:
    """(|S|/n) * (X_S' X_S)^{-1} from the rows indexed by S."""
    n, p = X.shape
    idx = np.asarray(subsample_indices, dtype=np.intp)
    if idx.ndim != 1 or len(np.unique(idx)) != idx.size:
        raise ValueError("subsample indices must be a flat set of distinct values")
    if idx.size < p:
        raise ValueError(f"need |S| >= p, got |S|={idx.size}, p={p}")
    if idx.size and (idx.min() < 0 or idx.max() >= n):
        raise ValueError("subsample indices out of range")
    Xs = X[idx]
    inv = _spd_inverse(Xs.T @ Xs) * (idx.size / n)
    return GramInverse(inv, source="subsampled", subsample_size=int(idx.size))


def ols_direction(ginv: GramInverse, X: np.ndarray, y: np.ndarray, z_col: np.ndarray) -> np.ndarray:
    """Least-squares vector for the surrogate response z_col * y."""
    return ginv.matrix @ (X.T @ (z_col * y))


def empirical_scale(c: float, ytilde: np.ndarray, link: LinkFunction) -> float:
    """(c/n) * sum_i f'(c * ytilde_i)."""
    return float(c) * float(np.mean(link.d1(float(c) * ytilde)))


def empirical_scale_deriv(c: float, ytilde: np.ndarray, link: LinkFunction) -> float:
    """d/dc of the empirical scale: (1/n) * sum_i {f'(u_i) + u_i f''(u_i)},
    u_i = c * ytilde_i."""
    u = float(c) * ytilde
    return float(np.mean(link.d1(u) + u * link.d2(u)))


def _scale_residual(c: float, ytilde: np.ndarray, link: LinkFunction) -> float:
    g = empirical_scale(c, ytilde, link) - 1.0
    if math.isnan(g):
        raise NonFiniteScale(f"empirical scale is NaN at c={c}")
    return g


def _expand_bracket(ytilde, link, opts):
    """Geometric factor-2 expansion from c_init, alternating up/down, until
    the scale residual changes sign. Returns (lo, hi, g_lo, g_hi)."""
    c0 = opts.c_init
    g0 = _scale_residual(c0, ytilde, link)
    lo = hi = c0
    g_lo = g_hi = g0
    lo_open = lo > 5e-324  # stop shrinking once denormal
    hi_open = hi < opts.c_max
    while lo_open or hi_open:
        if hi_open:
            nxt = min(hi * 2.0, opts.c_max)
            g = _scale_residual(nxt, ytilde, link)
            if (g_hi <= 0.0 < g) or (g <= 0.0 < g_hi):
                return hi, nxt, g_hi, g
            hi, g_hi = nxt, g
            hi_open = hi < opts.c_max
        if lo_open:
            nxt = lo / 2.0
            g = _scale_residual(nxt, ytilde, link)
            if (g_lo <= 0.0 < g) or (g <= 0.0 < g_lo):
                return nxt, lo, g, g_lo
            lo, g_lo = nxt, g
            lo_open = lo > 5e-324
    raise NoRootInRange(
        f"no sign change of the scale equation in (0, {opts.c_max:g}]: "
        "the scale growth condition appears violated"
    )


def _bisect(lo, hi, g_lo, ytilde, link, opts, diag):
    diag.used_bisection = True
    diag.bracket_lo, diag.bracket_hi = lo, hi
    c, g = lo, g_lo
    for _ in range(200):
        c = 0.5 * (lo + hi)
        g = _scale_residual(c, ytilde, link)
        if abs(g) <= opts.tol or (hi - lo) <= 1e-15 * c:
            break
        if (g_lo <= 0.0) == (g <= 0.0):
            lo, g_lo = c, g
        else:
            hi = c
    diag.final_residual = abs(g)
    diag.converged = abs(g) <= opts.tol
    return c


def newton_root(
    ytilde: np.ndarray,
    link: LinkFunction,
    opts: RootOptions = RootOptions(),
) -> tuple[float, RootDiagnostics]:
    """Solve the empirical scale equation for c.

    Newton iteration from ``opts.c_init``; if the derivative vanishes, an
    iterate escapes (0, c_max], or max_iter runs out, fall back to
    bisection on a sign-change bracket grown geometrically from c_init.
    Raises NoRootInRange when no bracket exists in (0, c_max] and
    NonFiniteScale when the scale equation evaluates to NaN.
    """
    diag = RootDiagnostics()
    c = opts.c_init
    for _ in range(opts.max_iter):
        g = _scale_residual(c, ytilde, link)
        if abs(g) <= opts.tol:
            diag.converged = True
            diag.final_residual = abs(g)
            return c, diag
        d = empirical_scale_deriv(c, ytilde, link)
        if not math.isfinite(d) or abs(d) < opts.deriv_floor:
            break
        nxt = c - g / d
        if not math.isfinite(nxt) or nxt <= 0.0 or nxt > opts.c_max:
            break
        c = nxt
        diag.newton_iters += 1
    lo, hi, g_lo, _ = _expand_bracket(ytilde, link, opts)
    c = _bisect(lo, hi, g_lo, ytilde, link, opts, diag)
    return c, diag


def _resolve_subsample(n: int, subsample: Union[int, float, None], rng) -> Optional[np.ndarray]:
    """Turn a fraction or size into sorted distinct row indices, or None for full."""
    if subsample is None:
        return None
    if isinstance(subsample, float):
        if not (0.0 < subsample <= 1.0):
            raise ValueError("subsample fraction must be in (0, 1]")
        size = max(1, round(subsample * n))
    else:
        size = int(subsample)
    if not (1 <= size <= n):
        raise ValueError(f"subsample size must be in [1, {n}], got {size}")
    if size == n:
        return np.arange(n)
    return np.sort(rng.choice(n, size=size, replace=False))


def sls_estimate(
    data: Dataset,
    links: Sequence[LinkFunction],
    subsample: Union[int, float, None] = None,
    opts: RootOptions = RootOptions(),
    subsample_seed: int = 0,
) -> EstimationResult:
    """Run the full pipeline over all k directions.

    ``subsample`` selects the Gram option: None uses the whole sample, a
    float in (0, 1] a fraction of rows, an int an absolute row count; row
    selection is seeded by ``subsample_seed``. One direction failing its
    root search does not abort the others: its diagnostics carry
    ``failed=True`` and its outputs are NaN.
    """
    links = tuple(links)
    if len(links) != data.k:
        raise ValueError(f"got {len(links)} links for {data.k} coefficient columns")
    rng = np.random.default_rng(subsample_seed)
    idx = _resolve_subsample(data.n, subsample, rng)
    if idx is None:
        ginv = gram_inverse_full(data.X)
    else:
        ginv = gram_inverse_subsampled(data.X, idx)

    k, p, n = data.k, data.p, data.n
    beta_ols = np.empty((k, p))
    c_hat = np.full(k, math.nan)
    diags: list[RootDiagnostics] = []
    for j in range(k):
        beta_ols[j] = ols_direction(ginv, data.X, data.y, data.Z[:, j])
        ytilde = data.X @ beta_ols[j]
        if opts.root_subsample is not None and opts.root_subsample < n:
            rows = rng.choice(n, size=opts.root_subsample, replace=False)
            ytilde = ytilde[np.sort(rows)]
        try:
            c_hat[j], diag = newton_root(ytilde, links[j], opts)
        except (NoRootInRange, NonFiniteScale) as exc:
            diag = RootDiagnostics(failed=True, error=f"{type(exc).__name__}: {exc}")
        if links[j].bound_d1 is None or links[j].lipschitz_d1 is None:
            diag.assumption_note = "link derivative is unbounded; error bounds do not apply"
        diags.append(diag)
    beta_nlr = c_hat[:, None] * beta_ols
    return EstimationResult(beta_ols, c_hat, beta_nlr, tuple(diags))
