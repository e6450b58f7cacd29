"""Command-line entry point.

Subcommands: generate, estimate, experiment, verify. Each takes
``--config <path>`` plus optional overrides ``--seed``, ``--threads``,
``--out``. Exit codes: 0 success, 1 at least one direction failed to
estimate (partial results are still written), 2 configuration error,
3 I/O error.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import os
import sys
from typing import Optional

import numpy as np

from . import __version__
from .bench import SampleSizeSweep, emit_csv, emit_plot, run_experiment, summarize
from .config import (EstimateConfig, ExperimentConfig, GenerateConfig, RunConfig,
                     VerifyConfig, parse_config)
from .datafile import load_dataset, save_dataset
from .errors import ConfigError, DataFormatError
from .links import link_name, make_link, monomial, IDENTITY, SIGMOID
from .estimator import sls_estimate
from .synth import generate, stream_rng
from .verify import proportionality_gap, sigmoid_scale_check, stein_identity_gap

EXIT_OK = 0
EXIT_ESTIMATION_FAILURE = 1
EXIT_CONFIG = 2
EXIT_IO = 3

#  verify sub-stream labels
_STREAM_STEIN, _STREAM_PROP = 10, 11


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def _manifest(command: str, config_text: str, seed: int) -> str:
    digest = hashlib.sha256(config_text.encode("utf-8")).hexdigest()[:16]
    return f"manifest: command={command} config_sha256={digest} seed={seed} version={__version__}"


def _write_report(path: str, lines: list[str]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _cmd_generate(cfg: GenerateConfig, manifest: str) -> int:
    data, spec = generate(cfg.synth)
    save_dataset(cfg.out, data, spec.beta_star)
    print(manifest)
    print(f"wrote {cfg.out}: n={data.n} p={data.p} k={data.k}")
    return EXIT_OK


def _cmd_estimate(cfg: EstimateConfig, manifest: str) -> int:
    data, beta_star = load_dataset(cfg.data)
    if len(cfg.links) != data.k:
        raise ConfigError("estimate.links",
                          f"dataset has k={data.k} coefficient columns, got {len(cfg.links)} links")
    links = [make_link(kind) for kind in cfg.links]
    result = sls_estimate(data, links, subsample=cfg.subsample,
                          opts=cfg.root, subsample_seed=cfg.seed)
    option = "full" if cfg.subsample is None else f"subsample:{cfg.subsample}"
    lines = [manifest, "command = estimate", f"data = {cfg.data}",
             f"n = {data.n}", f"p = {data.p}", f"k = {data.k}", f"option = {option}"]
    failed = False
    for j, diag in enumerate(result.diagnostics):
        lines.append(f"link_{j} = {link_name(cfg.links[j])}")
        lines.append(f"failed_{j} = {_fmt(diag.failed)}")
        if diag.failed:
            failed = True
            lines.append(f"error_{j} = {diag.error}")
        else:
            lines.append(f"c_hat_{j} = {_fmt(float(result.c_hat[j]))}")
            lines.append(f"converged_{j} = {_fmt(diag.converged)}")
            lines.append(f"newton_iters_{j} = {diag.newton_iters}")
            lines.append(f"used_bisection_{j} = {_fmt(diag.used_bisection)}")
            lines.append(f"final_residual_{j} = {_fmt(diag.final_residual)}")
        if diag.assumption_note:
            lines.append(f"assumption_note_{j} = {diag.assumption_note}")
        lines.append(f"beta_nlr_{j} = " + " ".join(_fmt(float(v)) for v in result.beta_nlr[j]))
    if beta_star is not None and not failed:
        from .bench import relative_error_l2, relative_error_linf
        lines.append(f"err_l2_rel = {_fmt(relative_error_l2(result.beta_nlr, beta_star))}")
        lines.append(f"err_linf_rel = {_fmt(relative_error_linf(result.beta_nlr, beta_star))}")
    _write_report(cfg.out, lines)
    print(manifest)
    print(f"wrote {cfg.out}")
    return EXIT_ESTIMATION_FAILURE if failed else EXIT_OK


def _cmd_experiment(cfg: ExperimentConfig, manifest: str, threads: int) -> int:
    records = run_experiment(cfg.plan, threads=threads)
    emit_csv(records, cfg.csv)
    xlabel = "n" if isinstance(cfg.plan.sweep, SampleSizeSweep) else "|S|/n"
    if cfg.plot:
        emit_plot(records, cfg.plot, metric=cfg.metric, xlabel=xlabel)
    print(manifest)
    values, mean, _, lo, hi = summarize(records, cfg.metric)
    for v, m, a, b in zip(values, mean, lo, hi):
        print(f"{xlabel}={v:g} mean_{cfg.metric}={m:.6g} min={a:.6g} max={b:.6g}")
    print(f"wrote {cfg.csv}" + (f" and {cfg.plot}" if cfg.plot else ""))
    failed = any(rec.failed for rec in records)
    return EXIT_ESTIMATION_FAILURE if failed else EXIT_OK


def _cmd_verify(cfg: VerifyConfig, manifest: str) -> int:
    lines = [manifest, "command = verify", f"n_mc = {cfg.n_mc}"]
    if "stein" in cfg.checks:
        sig = make_link(SIGMOID)
        rng = stream_rng(cfg.seed, _STREAM_STEIN)
        pairs = [
            ("identity", lambda z: z, lambda z: np.ones_like(z)),
            ("sigmoid", sig.eval, sig.d1),
            ("sigmoid_d1", sig.d1, sig.d2),
        ]
        for name, g, gp in pairs:
            gap = stein_identity_gap(g, gp, cfg.n_mc, rng)
            lines.append(f"stein_gap_{name} = {_fmt(gap)}")
    if "proportionality" in cfg.checks:
        rng = stream_rng(cfg.seed, _STREAM_PROP)
        p = 20
        factor = np.eye(p) / np.sqrt(p)
        beta = rng.normal(1.0, 4.0, size=p)
        for kind in (IDENTITY, monomial(3), SIGMOID):
            gap = proportionality_gap(make_link(kind), beta, factor, cfg.n_mc, rng)
            lines.append(f"proportionality_gap_{link_name(kind)} = {_fmt(gap)}")
    if "sigmoid_scale" in cfg.checks:
        report = sigmoid_scale_check()
        for field in ("a", "b", "ell_at_6", "min_ell_deriv", "passed"):
            lines.append(f"{field} = {_fmt(getattr(report, field))}")
    _write_report(cfg.out, lines)
    print(manifest)
    print(f"wrote {cfg.out}")
    return EXIT_OK


def _apply_overrides(cfg: RunConfig, seed: Optional[int], out: Optional[str]) -> RunConfig:
    payload = cfg.payload
    if seed is not None:
        if isinstance(payload, GenerateConfig):
            payload = dataclasses.replace(
                payload, synth=dataclasses.replace(payload.synth, master_seed=seed))
        elif isinstance(payload, ExperimentConfig):
            payload = dataclasses.replace(
                payload, plan=dataclasses.replace(payload.plan, master_seed=seed))
        else:
            payload = dataclasses.replace(payload, seed=seed)
    if out is not None:
        if isinstance(payload, ExperimentConfig):
            payload = dataclasses.replace(payload, csv=out)
        else:
            payload = dataclasses.replace(payload, out=out)
    return dataclasses.replace(cfg, payload=payload)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sls",
        description="Scaled least squares estimation: data generation, "
                    "estimation, benchmark sweeps, and theory checks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("generate", "draw a synthetic dataset and write it to a binary container"),
        ("estimate", "run the estimator on a dataset file and write a report"),
        ("experiment", "run a benchmark sweep and write CSV (and optionally an SVG plot)"),
        ("verify", "run theory checks and write a report"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="path to the YAML config")
        p.add_argument("--seed", type=int, default=None, help="override the master seed")
        p.add_argument("--threads", type=int, default=None,
                       help="worker thread cap (default: available parallelism)")
        p.add_argument("--out", default=None, help="override the primary output path")
    return parser


def run(cfg: RunConfig, config_text: str, threads: int) -> int:
    """Dispatch a parsed RunConfig; returns the process exit code."""
    payload = cfg.payload
    if isinstance(payload, GenerateConfig):
        manifest = _manifest(cfg.command, config_text, payload.synth.master_seed)
        return _cmd_generate(payload, manifest)
    if isinstance(payload, EstimateConfig):
        manifest = _manifest(cfg.command, config_text, payload.seed)
        return _cmd_estimate(payload, manifest)
    if isinstance(payload, ExperimentConfig):
        manifest = _manifest(cfg.command, config_text, payload.plan.master_seed)
        return _cmd_experiment(payload, manifest, threads)
    manifest = _manifest(cfg.command, config_text, payload.seed)
    return _cmd_verify(payload, manifest)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            config_text = fh.read()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        cfg = parse_config(config_text)
        if cfg.command != args.command:
            raise ConfigError(cfg.command,
                              f"config is for '{cfg.command}' but subcommand is '{args.command}'")
        cfg = _apply_overrides(cfg, args.seed, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    threads = args.threads if args.threads else (os.cpu_count() or 1)
    try:
        return run(cfg, config_text, threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, DataFormatError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
