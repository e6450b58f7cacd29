import numpy as np
import pytest

from sls import (GaussianIsotropic, IDENTITY, SynthConfig, generate,
                 load_dataset, parse_config, save_dataset)
from sls.cli import main
from sls.config import EstimateConfig, GenerateConfig, VerifyConfig
from sls.errors import ConfigError, DataFormatError
from sls.links import monomial
from sls.bench import SampleSizeSweep, SubsampleSweep
from sls.synth import UniformBox


# ---------------------------------------------------------------------------
# Dataset container
# ---------------------------------------------------------------------------

class TestDatafile:
    def _data(self, seed=0, **kw):
        base = dict(n=200, p=5, k=2, dist=GaussianIsotropic(),
                    links=(IDENTITY, monomial(3)), master_seed=seed)
        base.update(kw)
        return generate(SynthConfig(**base))

    def test_round_trip_bitwise(self, tmp_path):
        data, spec = self._data()
        path = tmp_path / "d.sls"
        save_dataset(path, data, spec.beta_star)
        loaded, beta = load_dataset(path)
        assert np.array_equal(loaded.X, data.X)
        assert np.array_equal(loaded.Z, data.Z)
        assert np.array_equal(loaded.y, data.y)
        assert np.array_equal(beta, spec.beta_star)

    def test_round_trip_without_beta(self, tmp_path):
        data, _ = self._data(seed=1)
        path = tmp_path / "d.sls"
        save_dataset(path, data)
        loaded, beta = load_dataset(path)
        assert beta is None
        assert np.array_equal(loaded.y, data.y)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "junk.sls"
        path.write_bytes(b"NOTADATA" + b"\x00" * 64)
        with pytest.raises(DataFormatError):
            load_dataset(path)

    def test_truncation(self, tmp_path):
        data, spec = self._data(seed=2)
        path = tmp_path / "d.sls"
        save_dataset(path, data, spec.beta_star)
        raw = path.read_bytes()
        path.write_bytes(raw[:-16])
        with pytest.raises(DataFormatError):
            load_dataset(path)

    def test_trailing_garbage(self, tmp_path):
        data, _ = self._data(seed=3)
        path = tmp_path / "d.sls"
        save_dataset(path, data)
        with open(path, "ab") as fh:
            fh.write(b"\x00")
        with pytest.raises(DataFormatError):
            load_dataset(path)


# ---------------------------------------------------------------------------
# Config parsing
# ---------------------------------------------------------------------------

class TestParseConfig:
    def test_minimal_experiment_gets_defaults(self):
        cfg = parse_config("""
experiment:
  sweep: {n: [1000, 2000, 4000]}
  p: 10
  links: [sigmoid]
  seed: 3
  csv: out.csv
""")
        assert cfg.command == "experiment"
        plan = cfg.payload.plan
        assert plan.repeats == 20
        assert plan.noise_std == 1.0
        assert plan.beta_mean == 1.0 and plan.beta_std == 4.0
        assert plan.master_seed == 3
        assert isinstance(plan.sweep, SampleSizeSweep)
        assert cfg.payload.plot is None

    def test_subsample_sweep(self):
        cfg = parse_config("""
experiment:
  sweep: {fractions: [0.1, 0.5, 1.0], n: 5000}
  p: 4
  links: [identity]
  csv: out.csv
""")
        sweep = cfg.payload.plan.sweep
        assert isinstance(sweep, SubsampleSweep)
        assert sweep.n == 5000 and sweep.fractions == (0.1, 0.5, 1.0)

    def test_even_monomial_degree_rejected(self):
        with pytest.raises(ConfigError):
            parse_config("""
experiment:
  sweep: {n: [100, 200, 400]}
  p: 4
  links: ["monomial:2"]
  csv: out.csv
""")

    def test_zero_repeats_rejected(self):
        with pytest.raises(ConfigError):
            parse_config("""
experiment:
  sweep: {n: [100, 200]}
  p: 4
  links: [identity]
  repeats: 0
  csv: out.csv
""")

    def test_unknown_key_rejected_with_path(self):
        with pytest.raises(ConfigError) as err:
            parse_config("""
generate:
  n: 100
  p: 4
  links: [identity]
  out: d.sls
  typo_key: 1
""")
        assert "typo_key" in str(err.value)

    def test_wrong_type_rejected(self):
        with pytest.raises(ConfigError):
            parse_config("""
generate:
  n: lots
  p: 4
  links: [identity]
  out: d.sls
""")

    def test_generate_design_variants(self):
        cfg = parse_config("""
generate:
  n: 100
  p: 3
  links: [identity]
  design: {kind: uniform_box, half_width: 0.25}
  out: d.sls
""")
        assert isinstance(cfg.payload, GenerateConfig)
        assert isinstance(cfg.payload.synth.dist, UniformBox)
        assert cfg.payload.synth.dist.half_width == 0.25

    def test_estimate_defaults(self):
        cfg = parse_config("""
estimate:
  data: d.sls
  links: [sigmoid, sigmoid]
  out: report.txt
""")
        payload = cfg.payload
        assert isinstance(payload, EstimateConfig)
        assert payload.subsample is None
        assert payload.root.c_init == 1.0 and payload.root.c_max == 1e6
        assert payload.root.tol == 1e-10 and payload.root.max_iter == 100

    def test_estimate_root_string_scientific(self):
        cfg = parse_config("""
estimate:
  data: d.sls
  links: [sigmoid]
  root: {c_max: 1e4}
  out: report.txt
""")
        assert cfg.payload.root.c_max == 1e4

    def test_verify_defaults(self):
        cfg = parse_config("""
verify:
  out: v.txt
""")
        payload = cfg.payload
        assert isinstance(payload, VerifyConfig)
        assert payload.checks == ("stein", "sigmoid_scale")
        assert payload.n_mc == 1_000_000

    def test_verify_unknown_check(self):
        with pytest.raises(ConfigError):
            parse_config("verify:\n  checks: [nonsense]\n  out: v.txt\n")

    def test_two_commands_rejected(self):
        with pytest.raises(ConfigError):
            parse_config("generate:\n  n: 10\nverify:\n  out: v.txt\n")

    def test_empty_path_rejected(self):
        with pytest.raises(ConfigError):
            parse_config("verify:\n  out: ''\n")


# ---------------------------------------------------------------------------
# CLI end to end
# ---------------------------------------------------------------------------

def _write(path, text):
    path.write_text(text)
    return str(path)


class TestCliEndToEnd:
    def test_generate_then_estimate(self, tmp_path, capsys):
        data_path = tmp_path / "d.sls"
        gen_cfg = _write(tmp_path / "gen.yaml", f"""
generate:
  n: 100000
  p: 20
  links: [identity]
  noise_std: 0.0
  seed: 0
  out: {data_path}
""")
        assert main(["generate", "--config", gen_cfg]) == 0
        assert "manifest:" in capsys.readouterr().out

        report = tmp_path / "report.txt"
        est_cfg = _write(tmp_path / "est.yaml", f"""
estimate:
  data: {data_path}
  links: [identity]
  out: {report}
""")
        assert main(["estimate", "--config", est_cfg]) == 0
        text = report.read_text()
        assert text.startswith("manifest:")
        fields = dict(
            line.split(" = ", 1) for line in text.splitlines() if " = " in line)
        assert float(fields["err_l2_rel"]) <= 0.03
        assert fields["converged_0"] == "true"
        assert 0.97 <= float(fields["c_hat_0"]) <= 1.03

    def test_dataset_round_trips_through_cli(self, tmp_path):
        data_path = tmp_path / "d.sls"
        gen_cfg = _write(tmp_path / "gen.yaml", f"""
generate:
  n: 500
  p: 6
  links: ["monomial:3"]
  seed: 9
  out: {data_path}
""")
        assert main(["generate", "--config", gen_cfg]) == 0
        cfg = SynthConfig(n=500, p=6, k=1, dist=GaussianIsotropic(),
                          links=(monomial(3),), master_seed=9)
        data, spec = generate(cfg)
        loaded, beta = load_dataset(data_path)
        assert np.array_equal(loaded.X, data.X)
        assert np.array_equal(loaded.y, data.y)
        assert np.array_equal(beta, spec.beta_star)

    def test_estimate_failure_exit_code(self, tmp_path):
        # a logistic link admits no scale root on this data
        cfg = SynthConfig(n=2000, p=4, k=1, dist=GaussianIsotropic(),
                          links=(IDENTITY,), master_seed=4)
        data, _ = generate(cfg)
        data_path = tmp_path / "d.sls"
        save_dataset(data_path, data)
        report = tmp_path / "report.txt"
        est_cfg = _write(tmp_path / "est.yaml", f"""
estimate:
  data: {data_path}
  links: [logistic]
  out: {report}
""")
        assert main(["estimate", "--config", est_cfg]) == 1
        text = report.read_text()
        assert "failed_0 = true" in text
        assert "NoRootInRange" in text

    def test_config_error_exit_code(self, tmp_path, capsys):
        bad = _write(tmp_path / "bad.yaml", "generate:\n  n: 10\n")
        assert main(["generate", "--config", bad]) == 2
        assert "config error" in capsys.readouterr().err

    def test_command_mismatch_is_config_error(self, tmp_path):
        cfg = _write(tmp_path / "v.yaml", "verify:\n  out: v.txt\n")
        assert main(["generate", "--config", cfg]) == 2

    def test_missing_config_is_io_error(self, tmp_path):
        assert main(["verify", "--config", str(tmp_path / "nope.yaml")]) == 3

    def test_missing_dataset_is_io_error(self, tmp_path):
        est_cfg = _write(tmp_path / "est.yaml", f"""
estimate:
  data: {tmp_path / 'missing.sls'}
  links: [identity]
  out: {tmp_path / 'r.txt'}
""")
        assert main(["estimate", "--config", est_cfg]) == 3

    def test_experiment_writes_csv_and_plot(self, tmp_path, capsys):
        csv_path = tmp_path / "out.csv"
        plot_path = tmp_path / "out.svg"
        exp_cfg = _write(tmp_path / "exp.yaml", f"""
experiment:
  sweep: {{n: [300, 600]}}
  p: 4
  links: [identity]
  repeats: 2
  noise_std: 0.1
  seed: 5
  csv: {csv_path}
  plot: {plot_path}
""")
        assert main(["experiment", "--config", exp_cfg]) == 0
        lines = csv_path.read_text().splitlines()
        assert len(lines) == 5  # header + 2 values x 2 repeats
        assert plot_path.exists()
        out = capsys.readouterr().out
        assert "manifest:" in out and "mean_err_l2_rel" in out

    def test_verify_command(self, tmp_path):
        out = tmp_path / "v.txt"
        v_cfg = _write(tmp_path / "v.yaml", f"""
verify:
  n_mc: 100000
  seed: 1
  out: {out}
""")
        assert main(["verify", "--config", v_cfg]) == 0
        text = out.read_text()
        fields = dict(
            line.split(" = ", 1) for line in text.splitlines() if " = " in line)
        assert fields["passed"] == "true"
        assert float(fields["ell_at_6"]) > 1.22
        assert float(fields["min_ell_deriv"]) >= 0.19
        assert float(fields["stein_gap_identity"]) <= 0.05

    def test_seed_and_out_overrides(self, tmp_path):
        d1 = tmp_path / "a.sls"
        d2 = tmp_path / "b.sls"
        gen_cfg = _write(tmp_path / "gen.yaml", f"""
generate:
  n: 300
  p: 4
  links: [identity]
  seed: 1
  out: {d1}
""")
        assert main(["generate", "--config", gen_cfg]) == 0
        assert main(["generate", "--config", gen_cfg, "--seed", "2",
                     "--out", str(d2)]) == 0
        a, _ = load_dataset(d1)
        b, _ = load_dataset(d2)
        assert not np.array_equal(a.X, b.X)
