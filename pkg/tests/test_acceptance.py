"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line with the measured values next to its threshold.

Run with `pytest tests/test_acceptance.py -v -s`. The sweeps here are the
desk-scale grid (n up to 200k); they finish in a few minutes total.
"""

import time

import numpy as np
import pytest

import sls

THREADS = 2

N_SWEEP = (12_500, 25_000, 50_000, 100_000, 200_000)


@pytest.fixture(scope="module")
def sigmoid_n_sweep():
    plan = sls.ExperimentPlan(
        sweep=sls.SampleSizeSweep(N_SWEEP), p=20, dist=sls.GaussianIsotropic(),
        links=(sls.SIGMOID,) * 3, repeats=20, master_seed=0)
    t0 = time.perf_counter()
    records = sls.run_experiment(plan, threads=THREADS)
    return records, time.perf_counter() - t0


def test_criterion_1_identity_link_recovery(criterion_report):
    cfg = sls.SynthConfig(n=100_000, p=20, k=1, dist=sls.GaussianIsotropic(),
                          links=(sls.IDENTITY,), noise_std=0.0, master_seed=0)
    t0 = time.perf_counter()
    data, spec = sls.generate(cfg)
    result = sls.sls_estimate(data, spec.links)
    elapsed = time.perf_counter() - t0
    err = sls.relative_error_l2(result.beta_nlr, spec.beta_star)
    c = float(result.c_hat[0])
    ok = err <= 0.03 and 0.97 <= c <= 1.03 and elapsed < 10.0
    criterion_report("criterion 1 identity-link recovery", ok,
           f"err={err:.4f} (<=0.03), c={c:.6f} (in [0.97,1.03]), {elapsed:.1f}s (<10s)")


def test_criterion_2_cubic_closed_form_oracle(criterion_report):
    p = 20
    rng = np.random.default_rng(1000)
    direction = rng.normal(1.0, 4.0, size=p)
    beta = direction / np.linalg.norm(direction) / np.sqrt(3.0)
    c_oracle, beta_ols_oracle = sls.cubic_oracle(beta, np.eye(p))
    assert c_oracle == pytest.approx(1.0, rel=1e-12)
    cfg = sls.SynthConfig(n=200_000, p=p, k=1, dist=sls.GaussianGeneral(np.eye(p)),
                          links=(sls.monomial(3),), master_seed=0,
                          beta_star=beta[None, :])
    t0 = time.perf_counter()
    data, spec = sls.generate(cfg)
    result = sls.sls_estimate(data, spec.links)
    elapsed = time.perf_counter() - t0
    c = float(result.c_hat[0])
    err = sls.relative_error_l2(result.beta_nlr, spec.beta_star)
    ols_gap = (np.linalg.norm(result.beta_ols[0] - beta_ols_oracle)
               / np.linalg.norm(beta_ols_oracle))
    ok = abs(c - 1.0) <= 0.05 and err <= 0.05 and ols_gap <= 0.05 and elapsed < 20.0
    criterion_report("criterion 2 cubic closed-form oracle", ok,
           f"c={c:.4f} (|c-1|<=0.05), err={err:.4f} (<=0.05), "
           f"ols_vs_oracle={ols_gap:.4f} (<=0.05), {elapsed:.1f}s (<20s)")


def test_criterion_3_convergence_slope(sigmoid_n_sweep, criterion_report):
    records, elapsed = sigmoid_n_sweep
    slope = sls.fit_convergence_slope(records)
    _, mean, _, _, _ = sls.summarize(records)
    decreasing = bool(np.all(np.diff(mean) < 0))
    ok = -0.65 <= slope <= -0.35 and decreasing and elapsed < 300.0
    criterion_report("criterion 3 convergence slope", ok,
           f"slope={slope:.3f} (in [-0.65,-0.35]), means="
           f"{np.array2string(mean, precision=3)} strictly decreasing={decreasing}, "
           f"{elapsed:.0f}s (<300s)")


def test_criterion_4_subsampling_plateau(criterion_report):
    plan = sls.ExperimentPlan(
        sweep=sls.SubsampleSweep((0.01, 0.05, 0.2, 1.0), n=200_000),
        p=20, dist=sls.GaussianIsotropic(), links=(sls.SIGMOID,) * 3,
        repeats=20, master_seed=0)
    t0 = time.perf_counter()
    records = sls.run_experiment(plan, threads=THREADS)
    elapsed = time.perf_counter() - t0
    values, mean, _, _, _ = sls.summarize(records)
    err_02 = mean[list(values).index(0.2)]
    err_10 = mean[list(values).index(1.0)]
    ratio = err_02 / err_10
    ok = ratio <= 1.5 and elapsed < 300.0
    criterion_report("criterion 4 sub-sampling plateau", ok,
           f"err(0.2n)={err_02:.4f}, err(n)={err_10:.4f}, ratio={ratio:.3f} "
           f"(<=1.5), {elapsed:.0f}s (<300s)")


def test_criterion_5_uniform_design_linf(criterion_report):
    plan = sls.ExperimentPlan(
        sweep=sls.SampleSizeSweep(N_SWEEP), p=20, dist=sls.UniformBox(),
        links=(sls.SIGMOID,) * 3, repeats=20, master_seed=0)
    t0 = time.perf_counter()
    records = sls.run_experiment(plan, threads=THREADS)
    elapsed = time.perf_counter() - t0
    _, _, median, _, _ = sls.summarize(records, "err_linf_rel")
    non_increasing = bool(np.all(np.diff(median) <= 0))
    ok = non_increasing and elapsed < 300.0
    criterion_report("criterion 5 uniform-design l-inf error", ok,
           f"medians={np.array2string(median, precision=3)} "
           f"non-increasing={non_increasing}, {elapsed:.0f}s (<300s)")


def test_criterion_6_sigmoid_scale_constants(criterion_report):
    t0 = time.perf_counter()
    rep = sls.sigmoid_scale_check()
    elapsed = time.perf_counter() - t0
    ok = (rep.ell_at_6 > 1.22 and rep.min_ell_deriv >= 0.19
          and abs(rep.a - 0.21877) <= 1e-4 and abs(rep.b - 0.05947) <= 1e-4
          and rep.passed and elapsed < 1.0)
    criterion_report("criterion 6 sigmoid scale constants", ok,
           f"ell(6)={rep.ell_at_6:.5f} (>1.22), min ell'={rep.min_ell_deriv:.5f} "
           f"(>=0.19), a={rep.a:.5f} (0.21877±1e-4), b={rep.b:.5f} (0.05947±1e-4), "
           f"{elapsed * 1e3:.0f}ms (<1s)")


def test_criterion_7_stein_identity(criterion_report):
    link = sls.make_link(sls.SIGMOID)
    t0 = time.perf_counter()
    rng = np.random.default_rng(0)
    gaps = {
        "identity": sls.stein_identity_gap(lambda z: z, lambda z: np.ones_like(z),
                                           10**6, rng),
        "sigmoid": sls.stein_identity_gap(link.eval, link.d1, 10**6, rng),
        "sigmoid_d1": sls.stein_identity_gap(link.d1, link.d2, 10**6, rng),
    }
    elapsed = time.perf_counter() - t0
    ok = all(g <= 0.01 for g in gaps.values()) and elapsed < 5.0
    detail = ", ".join(f"{k}={v:.5f}" for k, v in gaps.items())
    criterion_report("criterion 7 Stein identity", ok,
           f"{detail} (all <=0.01), {elapsed:.1f}s (<5s)")


def test_criterion_8_property_suite(tmp_path, criterion_report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(8)

    # derivative finite-difference consistency across all link families
    h = 1e-6
    for kind in (sls.IDENTITY, sls.monomial(3), sls.monomial(5), sls.SIGMOID,
                 sls.LOGISTIC):
        link = sls.make_link(kind)
        z = rng.uniform(-20, 20, size=1000)
        fd1 = (link.eval(z + h) - link.eval(z - h)) / (2 * h)
        fd2 = (link.d1(z + h) - link.d1(z - h)) / (2 * h)
        assert np.max(np.abs(link.d1(z) - fd1) / (1 + np.abs(link.d1(z)))) <= 1e-5
        assert np.max(np.abs(link.d2(z) - fd2) / (1 + np.abs(link.d2(z)))) <= 1e-5

    # normal-equation residual of the per-direction solve
    cfg = sls.SynthConfig(n=20_000, p=20, k=2, dist=sls.GaussianIsotropic(),
                          links=(sls.SIGMOID, sls.IDENTITY), master_seed=3)
    data, _ = sls.generate(cfg)
    ginv = sls.gram_inverse_full(data.X)
    for j in range(2):
        Yj = data.Z[:, j] * data.y
        b = sls.ols_direction(ginv, data.X, data.y, data.Z[:, j])
        resid = np.max(np.abs(data.X.T @ (data.X @ b - Yj)))
        assert resid <= 1e-6 * np.max(np.abs(data.X.T @ Yj))

    # the sub-sampled Gram inverse with S = all rows is bitwise the full one
    sub = sls.gram_inverse_subsampled(data.X, np.arange(data.n))
    assert np.array_equal(sub.matrix, ginv.matrix)

    # Newton root agrees with the monomial closed form
    m3 = sls.make_link(sls.monomial(3))
    yt = rng.normal(0.0, 2.0, size=1000)
    c_hat, _ = sls.newton_root(yt, m3)
    assert abs(c_hat - (3.0 * np.mean(yt ** 2)) ** (-1.0 / 3.0)) <= 1e-9

    # CSV round-trip recovers all numeric fields bitwise
    plan = sls.ExperimentPlan(sweep=sls.SampleSizeSweep((300, 600)), p=4,
                              dist=sls.GaussianIsotropic(), links=(sls.IDENTITY,),
                              repeats=3, master_seed=5, noise_std=0.1)
    records = sls.run_experiment(plan, threads=1)
    csv_path = tmp_path / "roundtrip.csv"
    sls.emit_csv(records, csv_path)
    for rec, line in zip(records, csv_path.read_text().splitlines()[1:]):
        parts = line.split(",")
        assert float(parts[0]) == rec.sweep_value
        assert int(parts[2]) == rec.seed
        assert float(parts[3]) == rec.err_l2_rel
        assert float(parts[6]) == rec.runtime_ms

    # identical results no matter how many worker threads run the sweep
    again = sls.run_experiment(plan, threads=4)
    for a, b in zip(records, again):
        assert (a.sweep_value, a.repeat_index, a.seed) == \
               (b.sweep_value, b.repeat_index, b.seed)
        assert a.err_l2_rel == b.err_l2_rel
        assert a.err_linf_rel == b.err_linf_rel
        assert a.c_hat == b.c_hat

    elapsed = time.perf_counter() - t0
    ok = elapsed < 60.0
    criterion_report("criterion 8 property suite", ok,
           f"derivatives, normal equations, S=[n] bitwise, closed-form root, "
           f"CSV round-trip, thread determinism all hold, {elapsed:.0f}s (<60s)")
