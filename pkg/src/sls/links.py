"""Link function library: identity, odd monomials, sigmoid, and logistic.

Each link carries its exact first and second derivatives so the scale
root-finder can run plain Newton steps. All evaluators accept scalars or
numpy arrays and are safe over the whole float64 range (the exp-based
links branch on the sign of the argument instead of calling exp naively).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.special import expit

from .errors import ConfigError

__all__ = [
    "LinkKind",
    "LinkFunction",
    "IDENTITY",
    "SIGMOID",
    "LOGISTIC",
    "monomial",
    "make_link",
    "parse_link_name",
    "link_name",
]


@dataclass(frozen=True)
class LinkKind:
    """Identifier for one of the supported link families.

    ``degree`` is only meaningful for the monomial family, where it must
    be odd and >= 1 so the mean link derivative stays positive under a
    symmetric design.
    """

    name: str
    degree: Optional[int] = None

    def __post_init__(self):
        if self.name not in ("identity", "monomial", "sigmoid", "logistic"):
            raise ValueError(f"unknown link family: {self.name!r}")
        if self.name == "monomial":
            d = self.degree
            if not isinstance(d, int) or d < 1 or d % 2 == 0:
                raise ValueError(f"monomial degree must be an odd integer >= 1, got {d!r}")
        elif self.degree is not None:
            raise ValueError(f"{self.name} link takes no degree")


IDENTITY = LinkKind("identity")
SIGMOID = LinkKind("sigmoid")
LOGISTIC = LinkKind("logistic")


def monomial(degree: int) -> LinkKind:
    return LinkKind("monomial", degree)


@dataclass(frozen=True)
class LinkFunction:
    """A link f with exact derivatives f' (``d1``) and f'' (``d2``).

    ``bound_d1`` is a uniform bound on |f'|, ``lipschitz_d1`` a Lipschitz
    constant for f'. Both are None for monomials of degree >= 3, whose
    derivative is unbounded; they are metadata only and never enforced.
    """

    kind: LinkKind
    eval: Callable[[np.ndarray], np.ndarray]
    d1: Callable[[np.ndarray], np.ndarray]
    d2: Callable[[np.ndarray], np.ndarray]
    lipschitz_d1: Optional[float] = None
    bound_d1: Optional[float] = None


def _sigmoid_eval(z):
    return expit(z)


def _sigmoid_d1(z):
    s = expit(z)
    return s * (1.0 - s)


def _sigmoid_d2(z):
    s = expit(z)
    return s * (1.0 - s) * (1.0 - 2.0 * s)


def _logistic_eval(z):
    # log(1 + exp(-z)) without overflow for very negative z
    return np.logaddexp(0.0, -np.asarray(z, dtype=float))


def _logistic_d1(z):
    return -expit(-np.asarray(z, dtype=float))


def _logistic_d2(z):
    s = expit(z)
    return s * (1.0 - s)


def _identity_eval(z):
    return np.asarray(z, dtype=float) + 0.0


def _ones(z):
    return np.ones_like(np.asarray(z, dtype=float))


def _zeros(z):
    return np.zeros_like(np.asarray(z, dtype=float))


def _monomial_fns(d: int):
    def f(z):
        return np.asarray(z, dtype=float) ** d

    def f1(z):
        z = np.asarray(z, dtype=float)
        return float(d) * z ** (d - 1) if d > 1 else np.ones_like(z)

    def f2(z):
        z = np.asarray(z, dtype=float)
        if d == 1:
            return np.zeros_like(z)
        if d == 3:
            return float(d * (d - 1)) * z
        return float(d * (d - 1)) * z ** (d - 2)

    return f, f1, f2


# max |sigmoid''| is attained where sigmoid(z) = (3 +/- sqrt(3)) / 6
_SIGMOID_LIPSCHITZ_D1 = 1.0 / (6.0 * np.sqrt(3.0))


def make_link(kind: LinkKind) -> LinkFunction:
    """Build the LinkFunction for a LinkKind, derivatives in closed form."""
    if kind.name == "identity":
        return LinkFunction(kind, _identity_eval, _ones, _zeros,
                            lipschitz_d1=0.0, bound_d1=1.0)
    if kind.name == "sigmoid":
        return LinkFunction(kind, _sigmoid_eval, _sigmoid_d1, _sigmoid_d2,
                            lipschitz_d1=_SIGMOID_LIPSCHITZ_D1, bound_d1=0.25)
    if kind.name == "logistic":
        return LinkFunction(kind, _logistic_eval, _logistic_d1, _logistic_d2,
                            lipschitz_d1=0.25, bound_d1=1.0)
    if kind.name == "monomial":
        f, f1, f2 = _monomial_fns(kind.degree)
        if kind.degree == 1:
            return LinkFunction(kind, f, f1, f2, lipschitz_d1=0.0, bound_d1=1.0)
        return LinkFunction(kind, f, f1, f2)
    raise ValueError(f"unknown link kind: {kind!r}")


def parse_link_name(text: str) -> LinkKind:
    """Parse a config/CLI link name: identity, monomial:<d>, sigmoid, logistic."""
    text = text.strip()
    if text in ("identity", "sigmoid", "logistic"):
        return LinkKind(text)
    if text.startswith("monomial:"):
        raw = text.split(":", 1)[1]
        try:
            degree = int(raw)
        except ValueError:
            raise ConfigError("links", f"bad monomial degree {raw!r}") from None
        try:
            return monomial(degree)
        except ValueError as exc:
            raise ConfigError("links", str(exc)) from None
    raise ConfigError("links", f"unknown link name {text!r}")


def link_name(kind: LinkKind) -> str:
    if kind.name == "monomial":
        return f"monomial:{kind.degree}"
    return kind.name
