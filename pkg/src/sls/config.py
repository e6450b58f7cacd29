"""Run configuration: a YAML document with exactly one top-level command
section (generate / estimate / experiment / verify).

Parsing is strict: unknown keys, wrong types, and violated invariants all
raise ConfigError carrying the offending field path, so a typo never
silently falls back to a default.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
import yaml

from .bench import ExperimentPlan, SampleSizeSweep, SubsampleSweep
from .errors import ConfigError
from .estimator import RootOptions
from .links import LinkKind, parse_link_name
from .synth import DesignDistribution, GaussianGeneral, GaussianIsotropic, SynthConfig, UniformBox

__all__ = [
    "GenerateConfig",
    "EstimateConfig",
    "ExperimentConfig",
    "VerifyConfig",
    "RunConfig",
    "parse_config",
    "VERIFY_CHECKS",
]

COMMANDS = ("generate", "estimate", "experiment", "verify")
VERIFY_CHECKS = ("stein", "sigmoid_scale", "proportionality")
METRICS = ("err_l2_rel", "err_linf_rel")


@dataclass(frozen=True)
class GenerateConfig:
    synth: SynthConfig
    out: str


@dataclass(frozen=True)
class EstimateConfig:
    data: str
    links: tuple[LinkKind, ...]
    subsample: Union[int, float, None]
    root: RootOptions
    seed: int
    out: str


@dataclass(frozen=True)
class ExperimentConfig:
    plan: ExperimentPlan
    csv: str
    plot: Optional[str]
    metric: str


@dataclass(frozen=True)
class VerifyConfig:
    checks: tuple[str, ...]
    n_mc: int
    seed: int
    out: str


Payload = Union[GenerateConfig, EstimateConfig, ExperimentConfig, VerifyConfig]


@dataclass(frozen=True)
class RunConfig:
    command: str
    payload: Payload


class _Section:
    """A mapping being consumed key by key; leftovers are unknown keys."""

    def __init__(self, mapping, path: str):
        if not isinstance(mapping, dict):
            raise ConfigError(path, f"expected a mapping, got {type(mapping).__name__}")
        self._data = dict(mapping)
        self.path = path

    def _sub(self, key: str) -> str:
        return f"{self.path}.{key}" if self.path else key

    def take(self, key: str, default=..., required: bool = False):
        if key not in self._data:
            if required:
                raise ConfigError(self._sub(key), "missing required key")
            return None if default is ... else default
        return self._data.pop(key)

    def take_int(self, key: str, default=..., required=False, minimum=None):
        v = self.take(key, default, required)
        if v is None:
            return v
        if isinstance(v, bool) or not isinstance(v, int):
            raise ConfigError(self._sub(key), f"expected an integer, got {v!r}")
        if minimum is not None and v < minimum:
            raise ConfigError(self._sub(key), f"must be >= {minimum}, got {v}")
        return v

    def take_float(self, key: str, default=..., required=False):
        v = self.take(key, default, required)
        if v is None:
            return v
        if isinstance(v, str):
            try:
                return float(v)  # YAML 1.1 reads "1e6" as a string
            except ValueError:
                raise ConfigError(self._sub(key), f"expected a number, got {v!r}") from None
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(self._sub(key), f"expected a number, got {v!r}")
        return float(v)

    def take_str(self, key: str, default=..., required=False, nonempty=True):
        v = self.take(key, default, required)
        if v is None:
            return v
        if not isinstance(v, str):
            raise ConfigError(self._sub(key), f"expected a string, got {v!r}")
        if nonempty and not v:
            raise ConfigError(self._sub(key), "must be non-empty")
        return v

    def take_bool(self, key: str, default=...):
        v = self.take(key, default)
        if v is None or isinstance(v, bool):
            return v
        raise ConfigError(self._sub(key), f"expected a boolean, got {v!r}")

    def take_list(self, key: str, default=..., required=False):
        v = self.take(key, default, required)
        if v is None:
            return v
        if not isinstance(v, list):
            raise ConfigError(self._sub(key), f"expected a list, got {v!r}")
        return v

    def finish(self):
        if self._data:
            key = sorted(self._data)[0]
            raise ConfigError(self._sub(key), "unknown key")


def _parse_links(section: _Section, required=True) -> tuple[LinkKind, ...]:
    raw = section.take_list("links", required=required)
    if raw is None:
        return ()
    if not raw:
        raise ConfigError(section._sub("links"), "must be non-empty")
    kinds = []
    for i, name in enumerate(raw):
        if not isinstance(name, str):
            raise ConfigError(f"{section._sub('links')}[{i}]", f"expected a string, got {name!r}")
        try:
            kinds.append(parse_link_name(name))
        except ConfigError as exc:
            raise ConfigError(f"{section._sub('links')}[{i}]", exc.reason) from None
    return tuple(kinds)


def _parse_design(section: _Section) -> DesignDistribution:
    raw = section.take("design", default="gaussian_isotropic")
    path = section._sub("design")
    if isinstance(raw, str):
        raw = {"kind": raw}
    sub = _Section(raw, path)
    kind = sub.take_str("kind", required=True)
    try:
        if kind == "gaussian_isotropic":
            dist = GaussianIsotropic()
        elif kind == "uniform_box":
            dist = UniformBox(half_width=sub.take_float("half_width", default=None))
        elif kind == "gaussian_general":
            factor = sub.take_list("sigma_factor", required=True)
            dist = GaussianGeneral(np.asarray(factor, dtype=float))
        else:
            raise ConfigError(f"{path}.kind", f"unknown design {kind!r}")
    except (ValueError, TypeError) as exc:
        raise ConfigError(path, str(exc)) from None
    sub.finish()
    return dist


def _parse_root(section: _Section) -> RootOptions:
    raw = section.take("root", default=None)
    if raw is None:
        return RootOptions()
    sub = _Section(raw, section._sub("root"))
    kwargs = dict(
        c_init=sub.take_float("c_init", default=1.0),
        c_max=sub.take_float("c_max", default=1e6),
        tol=sub.take_float("tol", default=1e-10),
        max_iter=sub.take_int("max_iter", default=100),
        deriv_floor=sub.take_float("deriv_floor", default=1e-12),
        root_subsample=sub.take_int("root_subsample", default=None, minimum=1),
    )
    sub.finish()
    try:
        return RootOptions(**kwargs)
    except ValueError as exc:
        raise ConfigError(section._sub("root"), str(exc)) from None


def _parse_subsample(section: _Section):
    v = section.take("subsample", default=None)
    if v is None:
        return None
    path = section._sub("subsample")
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(path, f"expected a fraction or row count, got {v!r}")
    if isinstance(v, float) and not (0.0 < v <= 1.0):
        raise ConfigError(path, f"fraction must be in (0, 1], got {v}")
    if isinstance(v, int) and v < 1:
        raise ConfigError(path, f"row count must be >= 1, got {v}")
    return v


def _parse_generate(raw, path) -> GenerateConfig:
    sec = _Section(raw, path)
    links = _parse_links(sec)
    kwargs = dict(
        n=sec.take_int("n", required=True, minimum=1),
        p=sec.take_int("p", required=True, minimum=1),
        k=sec.take_int("k", default=len(links), minimum=1),
        dist=_parse_design(sec),
        links=links,
        beta_mean=sec.take_float("beta_mean", default=1.0),
        beta_std=sec.take_float("beta_std", default=4.0),
        noise_std=sec.take_float("noise_std", default=1.0),
        master_seed=sec.take_int("seed", default=0, minimum=0),
    )
    out = sec.take_str("out", required=True)
    sec.finish()
    try:
        synth = SynthConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from None
    return GenerateConfig(synth=synth, out=out)


def _parse_estimate(raw, path) -> EstimateConfig:
    sec = _Section(raw, path)
    cfg = EstimateConfig(
        data=sec.take_str("data", required=True),
        links=_parse_links(sec),
        subsample=_parse_subsample(sec),
        root=_parse_root(sec),
        seed=sec.take_int("seed", default=0, minimum=0),
        out=sec.take_str("out", required=True),
    )
    sec.finish()
    return cfg


def _parse_sweep(section: _Section):
    raw = section.take("sweep", required=True)
    path = section._sub("sweep")
    sub = _Section(raw, path)
    fractions = sub.take_list("fractions", default=None)
    try:
        if fractions is not None:
            n = sub.take_int("n", required=True, minimum=1)
            sweep = SubsampleSweep(fractions=tuple(fractions), n=n)
        else:
            values = sub.take_list("n", required=True)
            sweep = SampleSizeSweep(values=tuple(values))
    except (ValueError, TypeError) as exc:
        raise ConfigError(path, str(exc)) from None
    sub.finish()
    return sweep


def _parse_experiment(raw, path) -> ExperimentConfig:
    sec = _Section(raw, path)
    kwargs = dict(
        sweep=_parse_sweep(sec),
        p=sec.take_int("p", required=True, minimum=1),
        dist=_parse_design(sec),
        links=_parse_links(sec),
        repeats=sec.take_int("repeats", default=20, minimum=1),
        master_seed=sec.take_int("seed", default=0, minimum=0),
        noise_std=sec.take_float("noise_std", default=1.0),
        beta_mean=sec.take_float("beta_mean", default=1.0),
        beta_std=sec.take_float("beta_std", default=4.0),
        pin_beta=sec.take_bool("pin_beta", default=False),
        root_opts=_parse_root(sec),
    )
    metric = sec.take_str("metric", default="err_l2_rel")
    if metric not in METRICS:
        raise ConfigError(f"{path}.metric", f"expected one of {METRICS}, got {metric!r}")
    csv = sec.take_str("csv", required=True)
    plot = sec.take_str("plot", default=None)
    sec.finish()
    try:
        plan = ExperimentPlan(**kwargs)
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from None
    return ExperimentConfig(plan=plan, csv=csv, plot=plot, metric=metric)


def _parse_verify(raw, path) -> VerifyConfig:
    sec = _Section(raw, path)
    checks = sec.take_list("checks", default=["stein", "sigmoid_scale"])
    for i, c in enumerate(checks):
        if c not in VERIFY_CHECKS:
            raise ConfigError(f"{path}.checks[{i}]",
                              f"expected one of {VERIFY_CHECKS}, got {c!r}")
    cfg = VerifyConfig(
        checks=tuple(checks),
        n_mc=sec.take_int("n_mc", default=1_000_000, minimum=1),
        seed=sec.take_int("seed", default=0, minimum=0),
        out=sec.take_str("out", required=True),
    )
    sec.finish()
    return cfg


_PARSERS = {
    "generate": _parse_generate,
    "estimate": _parse_estimate,
    "experiment": _parse_experiment,
    "verify": _parse_verify,
}


def parse_config(text: str) -> RunConfig:
    """Parse and validate a config document into a RunConfig."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError("", f"invalid YAML: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError("", "top level must be a mapping with one command section")
    commands = [k for k in doc if k in COMMANDS]
    unknown = [k for k in doc if k not in COMMANDS]
    if unknown:
        raise ConfigError(str(unknown[0]), "unknown top-level key")
    if len(commands) != 1:
        raise ConfigError("", f"exactly one of {COMMANDS} must be present, got {commands}")
    command = commands[0]
    payload = _PARSERS[command](doc[command], command)
    return RunConfig(command=command, payload=payload)
