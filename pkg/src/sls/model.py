"""Domain types for the regression model.

The response is a stochastic linear combination of non-linear regressions:
each observation carries a design vector x, one random coefficient z_j per
direction, and y = sum_j z_j * f_j(<beta*_j, x>) + eps.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .links import LinkFunction

__all__ = ["ModelSpec", "Dataset", "response", "response_batch"]


@dataclass(frozen=True)
class ModelSpec:
    """Dimensions, link list, and (for synthetic data) the ground truth.

    ``beta_star`` holds the true direction vectors as rows of a k x p
    matrix; it is None when the model is specified without ground truth.
    """

    p: int
    k: int
    links: tuple[LinkFunction, ...]
    beta_star: Optional[np.ndarray] = None
    noise_std: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "links", tuple(self.links))
        if len(self.links) != self.k:
            raise ValueError(f"expected {self.k} links, got {len(self.links)}")
        if self.noise_std < 0:
            raise ValueError("noise_std must be nonnegative")
        if self.beta_star is not None:
            b = np.asarray(self.beta_star, dtype=float)
            if b.shape != (self.k, self.p):
                raise ValueError(f"beta_star must be {self.k}x{self.p}, got {b.shape}")
            object.__setattr__(self, "beta_star", b)


@dataclass(frozen=True)
class Dataset:
    """Observed data: design X (n x p), coefficients Z (n x k), response y (n)."""

    X: np.ndarray
    Z: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        Z = np.asarray(self.Z, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if X.ndim != 2 or Z.ndim != 2 or y.ndim != 1:
            raise ValueError("X and Z must be matrices, y a vector")
        n, p = X.shape
        if Z.shape[0] != n or y.shape[0] != n:
            raise ValueError("X, Z, y row counts disagree")
        if n < p:
            raise ValueError(f"need n >= p for an invertible Gram matrix, got n={n}, p={p}")
        for name, a in (("X", X), ("Z", Z), ("y", y)):
            if not np.all(np.isfinite(a)):
                raise ValueError(f"{name} contains non-finite entries")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Z", Z)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def k(self) -> int:
        return self.Z.shape[1]


def response(spec: ModelSpec, x: Sequence[float], z: Sequence[float], eps: float) -> float:
    """Single-observation response: sum_j z_j * f_j(<beta*_j, x>) + eps."""
    if spec.beta_star is None:
        raise ValueError("response requires a ModelSpec with ground truth beta_star")
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    acc = float(eps)
    for j, link in enumerate(spec.links):
        acc += float(z[j]) * float(link.eval(float(spec.beta_star[j] @ x)))
    return acc


def response_batch(spec: ModelSpec, X: np.ndarray, Z: np.ndarray, eps: np.ndarray) -> np.ndarray:
    """Vectorized response for n observations; same j-accumulation order as
    :func:`response` so synthetic generation is reproducible from its parts."""
    if spec.beta_star is None:
        raise ValueError("response_batch requires a ModelSpec with ground truth beta_star")
    y = np.array(eps, dtype=float, copy=True)
    for j, link in enumerate(spec.links):
        y += Z[:, j] * link.eval(X @ spec.beta_star[j])
    return y
