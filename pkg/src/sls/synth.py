"""Seeded synthetic data generation.

Ground-truth directions have i.i.d. Normal(beta_mean, beta_std^2)
coordinates, the coefficients z and the noise are standard-normal draws,
and the design is Gaussian (isotropic with covariance I/p, or with an
arbitrary triangular covariance factor) or uniform on a centered box.

Every random quantity draws from its own sub-stream of the master seed,
keyed by a fixed label, so e.g. enlarging n never changes the ground
truth that was drawn for a given seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .links import LinkKind, make_link
from .model import Dataset, ModelSpec, response_batch

__all__ = [
    "GaussianIsotropic",
    "GaussianGeneral",
    "UniformBox",
    "DesignDistribution",
    "SynthConfig",
    "stream_rng",
    "splitmix64",
    "sample_beta_star",
    "sample_design",
    "generate",
]


@dataclass(frozen=True)
class GaussianIsotropic:
    """Rows i.i.d. N(0, (1/p) I); the 1/p keeps projections O(1) as p grows."""


@dataclass(frozen=True, eq=False)
class GaussianGeneral:
    """Rows are sigma_factor @ w with w standard normal, i.e. covariance
    sigma_factor @ sigma_factor.T. Taking the factor instead of the
    covariance itself lets callers build exactly representable cases."""

    sigma_factor: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.sigma_factor, dtype=float)
        if f.ndim != 2 or f.shape[0] != f.shape[1]:
            raise ValueError("sigma_factor must be square")
        if np.any(np.triu(f, 1) != 0.0):
            raise ValueError("sigma_factor must be lower triangular")
        if np.any(np.diag(f) <= 0.0):
            raise ValueError("sigma_factor needs a strictly positive diagonal")
        object.__setattr__(self, "sigma_factor", f)


@dataclass(frozen=True)
class UniformBox:
    """Entries i.i.d. uniform on [-half_width, half_width]; half_width
    defaults to 1/p (note the variance is then 1/(3 p^2), not 1/p)."""

    half_width: Optional[float] = None

    def __post_init__(self):
        if self.half_width is not None and self.half_width <= 0:
            raise ValueError("half_width must be positive")


DesignDistribution = Union[GaussianIsotropic, GaussianGeneral, UniformBox]


@dataclass(frozen=True, eq=False)
class SynthConfig:
    n: int
    p: int
    k: int
    dist: DesignDistribution
    links: tuple[LinkKind, ...]
    beta_mean: float = 1.0
    beta_std: float = 4.0
    noise_std: float = 1.0
    master_seed: int = 0
    beta_star: Optional[np.ndarray] = None  # pins the ground truth when given

    def __post_init__(self):
        object.__setattr__(self, "links", tuple(self.links))
        if self.n < self.p:
            raise ValueError(f"need n >= p, got n={self.n}, p={self.p}")
        if len(self.links) != self.k:
            raise ValueError(f"expected {self.k} links, got {len(self.links)}")
        if self.beta_std < 0 or self.noise_std < 0:
            raise ValueError("beta_std and noise_std must be nonnegative")
        if isinstance(self.dist, GaussianGeneral) and self.dist.sigma_factor.shape[0] != self.p:
            raise ValueError("sigma_factor dimension disagrees with p")
        if self.beta_star is not None:
            b = np.asarray(self.beta_star, dtype=float)
            if b.shape != (self.k, self.p):
                raise ValueError(f"beta_star must be {self.k}x{self.p}, got {b.shape}")
            object.__setattr__(self, "beta_star", b)


# fixed stream labels; see module docstring
_STREAM_BETA, _STREAM_X, _STREAM_Z, _STREAM_EPS = 0, 1, 2, 3

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4B7C15


def splitmix64(seed: int, index: int) -> int:
    """Derive a 64-bit child seed from (seed, index); order-independent, so
    parallel repeats can each build their own seed."""
    x = (seed + (index + 1) * _GAMMA) & _MASK64
    x ^= x >> 30
    x = (x * 0xBF58476D1CE4E5B9) & _MASK64
    x ^= x >> 27
    x = (x * 0x94D049BB133111EB) & _MASK64
    x ^= x >> 31
    return x


def stream_rng(master_seed: int, label: int) -> np.random.Generator:
    """Generator for one named sub-stream of a master seed."""
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(label,)))


def sample_beta_star(cfg: SynthConfig, rng: np.random.Generator) -> np.ndarray:
    """k x p ground-truth matrix, entries i.i.d. Normal(beta_mean, beta_std^2)."""
    return rng.normal(cfg.beta_mean, cfg.beta_std, size=(cfg.k, cfg.p))


def sample_design(cfg: SynthConfig, rng: np.random.Generator) -> np.ndarray:
    """n x p design matrix drawn from cfg.dist."""
    n, p = cfg.n, cfg.p
    dist = cfg.dist
    if isinstance(dist, GaussianIsotropic):
        return rng.standard_normal((n, p)) / np.sqrt(p)
    if isinstance(dist, GaussianGeneral):
        return rng.standard_normal((n, p)) @ dist.sigma_factor.T
    if isinstance(dist, UniformBox):
        h = dist.half_width if dist.half_width is not None else 1.0 / p
        return rng.uniform(-h, h, size=(n, p))
    raise TypeError(f"unknown design distribution: {dist!r}")


def generate(cfg: SynthConfig) -> tuple[Dataset, ModelSpec]:
    """Draw (beta*, X, Z, eps) from their sub-streams and synthesize y."""
    if cfg.beta_star is not None:
        beta = cfg.beta_star
    else:
        beta = sample_beta_star(cfg, stream_rng(cfg.master_seed, _STREAM_BETA))
    X = sample_design(cfg, stream_rng(cfg.master_seed, _STREAM_X))
    Z = stream_rng(cfg.master_seed, _STREAM_Z).standard_normal((cfg.n, cfg.k))
    eps = stream_rng(cfg.master_seed, _STREAM_EPS).normal(0.0, cfg.noise_std, size=cfg.n)
    spec = ModelSpec(
        p=cfg.p,
        k=cfg.k,
        links=tuple(make_link(kind) for kind in cfg.links),
        beta_star=beta,
        noise_std=cfg.noise_std,
    )
    y = response_batch(spec, X, Z, eps)
    return Dataset(X, Z, y), spec
