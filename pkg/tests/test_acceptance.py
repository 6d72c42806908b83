"""Acceptance gate: one test per criterion, each printing its pass/fail line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
report lines. Statistical criteria use fixed seeds throughout, so outcomes
are reproducible bit for bit on a given platform.
"""

import math
import time

import numpy as np

from oracles import F_MINUS_1, F_SHIFTED_BOTH_FEATURES, STD_NORMAL_CDF_TABLE
from conftest import random_spec

from shiftlab.cli import main as cli_main
from shiftlab.domains import GaussianDomainSpec, MixingMap, sample_domain
from shiftlab.domains import test_spec as make_test_spec
from shiftlab.experiments import ExperimentConfig, run_mc_check, run_training_experiment
from shiftlab.risk import (
    LinearClassifier,
    bayes_classifier,
    bayes_risk,
    linear_classifier_risk,
    std_normal_cdf,
)
from shiftlab.rng import generator
from shiftlab.suppression import SuppressionWeights, suppress_latents
from shiftlab.swad import SwadConfig, SwadState, schedule
from shiftlab.training import (
    PretrainKind,
    TrainConfig,
    effective_rule,
    feature_distortion,
    init_pretrained,
    loss_and_grads,
    train,
)


def _report(number: int, name: str, ok: bool, detail: str, elapsed: float, budget: float):
    status = "PASS" if ok and elapsed < budget else "FAIL"
    print(f"criterion {number:02d} {name}: {status} ({detail}) [{elapsed:.2f}s < {budget:g}s]")
    assert ok, f"criterion {number} {name}: {detail}"
    assert elapsed < budget, f"criterion {number} exceeded budget: {elapsed:.2f}s"


def test_criterion_01_cdf_accuracy():
    t0 = time.perf_counter()
    max_err = max(abs(std_normal_cdf(x) - expected) for x, expected in STD_NORMAL_CDF_TABLE)
    _report(1, "cdf-accuracy", max_err <= 1e-10, f"max_err={max_err:.2e}",
            time.perf_counter() - t0, 1.0)


def test_criterion_02_closed_form_self_consistency():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(100):
        spec = random_spec(rng)
        weights = SuppressionWeights(rng.uniform(0, 1), rng.uniform(0, 1))
        beta = bayes_classifier(spec, weights)
        for domain in ("train", "test"):
            gap = abs(
                bayes_risk(spec, weights, domain)
                - linear_classifier_risk(spec, weights, beta, domain)
            )
            worst = max(worst, gap)
    _report(2, "self-consistency", worst <= 1e-12, f"max_gap={worst:.2e}",
            time.perf_counter() - t0, 1.0)


def test_criterion_03_mc_vs_closed_form():
    t0 = time.perf_counter()
    rows, _ = run_mc_check(points=20, samples=10**6, seed=2024)
    hits = sum(r["within_4_sigma"] for r in rows)
    _report(3, "mc-agreement", hits >= 19, f"{hits}/20 within 4 sigma",
            time.perf_counter() - t0, 60.0)


def test_criterion_04_risk_landscape():
    t0 = time.perf_counter()
    base = GaussianDomainSpec(mu_d=[1.0], mu_s=[0.5])

    reversed_spec = make_test_spec(base, -1.0)
    grid = [0.1 * k for k in range(11)]
    risks = [bayes_risk(reversed_spec, SuppressionWeights(1.0, w), "test") for w in grid]
    ok_a = risks[0] == min(risks)

    boosted = make_test_spec(base, 4.0)
    keep = bayes_risk(boosted, SuppressionWeights(1.0, 1.0), "test")
    drop = bayes_risk(boosted, SuppressionWeights(1.0, 0.0), "test")
    ok_b = (
        abs(keep - F_SHIFTED_BOTH_FEATURES) <= 1e-6
        and abs(drop - F_MINUS_1) <= 1e-6
        and keep < drop
    )

    ok_c = True
    rng = np.random.default_rng(4)
    for _ in range(25):
        w = SuppressionWeights(rng.uniform(0, 1), rng.uniform(0, 1))
        unshifted = make_test_spec(base, 1.0)
        ok_c &= bayes_risk(unshifted, w, "train") == bayes_risk(unshifted, w, "test")

    ok_d = True
    for gamma in (1.0, 2.0, 4.0):
        spec = make_test_spec(base, gamma)
        grid = [0.05 * k for k in range(21)]
        vals = [bayes_risk(spec, SuppressionWeights(1.0, w), "test") for w in grid]
        ok_d &= all(b <= a + 1e-15 for a, b in zip(vals, vals[1:]))

    detail = f"a={ok_a} b={ok_b} (R(1,1)={keep:.6f} R(1,0)={drop:.6f}) c={ok_c} d={ok_d}"
    _report(4, "risk-landscape", ok_a and ok_b and ok_c and ok_d, detail,
            time.perf_counter() - t0, 1.0)


def test_criterion_05_suppression_channel():
    t0 = time.perf_counter()
    n, sigma = 10**5, 1.3
    mu = np.array([0.8, -0.4])
    ok = True
    details = []
    for i, w in enumerate((0.0, 0.3, 0.6, 1.0)):
        g = generator(505, i)
        z = mu + sigma * g.standard_normal((n, 2))
        out = suppress_latents(z, w, sigma, rng_seed=(505, "noise", i))
        mean_err = np.abs(out.mean(axis=0) - w * mu).max()
        var_err = np.abs(out.var(axis=0, ddof=1) - sigma**2).max()
        mean_ci = 5.0 * sigma / math.sqrt(n)
        var_ci = 5.0 * sigma**2 * math.sqrt(2.0 / (n - 1))
        ok &= mean_err <= mean_ci and var_err <= var_ci
        details.append(f"w={w}: dm={mean_err:.4f} dv={var_err:.4f}")
    _report(5, "suppression-channel", ok, "; ".join(details), time.perf_counter() - t0, 5.0)


def test_criterion_06_trainer_consistency():
    t0 = time.perf_counter()
    spec = GaussianDomainSpec(mu_d=[1.0, 0.0], mu_s=[0.0, 0.5])
    mix = MixingMap.identity(spec.dim)
    data = sample_domain(spec, mix, 50000, seed=(2024, "acc6"))
    model = init_pretrained(mix, PretrainKind.oracle_silent(), spec.p_d)
    cfg = TrainConfig(lr_ft=0.1, ft_iters=2000, lp_iters=0, seed=(2024, "acc6-train"))
    trained, _ = train(model, data, cfg, "erm")
    rule = effective_rule(trained)
    learned = np.concatenate([rule.beta_d, rule.beta_s])
    bayes_dir = np.concatenate([2.0 * spec.mu_d, 2.0 * spec.mu_s])
    cos = float(learned @ bayes_dir / (np.linalg.norm(learned) * np.linalg.norm(bayes_dir)))

    rng = np.random.default_rng(606)
    x = rng.normal(size=(30, spec.dim))
    y = np.where(rng.random(30) < 0.5, 1.0, -1.0)
    probe = init_pretrained(mix, PretrainKind.oracle_silent(), spec.p_d)
    probe.W = np.eye(spec.dim) + 0.3 * rng.normal(size=(spec.dim, spec.dim))
    probe.head = LinearClassifier(rng.normal(size=2) * 0.4, rng.normal(size=2) * 0.4, 0.05)
    _, g_w, g_h, g_b = loss_and_grads(probe, x, y)
    analytic = np.concatenate([g_w.ravel(), g_h, [g_b]])
    vec = probe.pack()
    step = 1e-5
    numeric = np.empty_like(vec)
    for i in range(vec.size):
        up, down = vec.copy(), vec.copy()
        up[i] += step
        down[i] -= step
        probe_up, probe_down = probe.copy(), probe.copy()
        probe_up.unpack(up)
        probe_down.unpack(down)
        loss_up = float(np.logaddexp(0.0, -y * probe_up.scores(x)).mean())
        loss_down = float(np.logaddexp(0.0, -y * probe_down.scores(x)).mean())
        numeric[i] = (loss_up - loss_down) / (2 * step)
    rel = float(np.abs(analytic - numeric).max() / max(np.abs(numeric).max(), 1e-12))

    ok = cos >= 0.99 and rel <= 1e-6
    _report(6, "trainer-consistency", ok, f"cosine={cos:.5f} grad_rel_err={rel:.2e}",
            time.perf_counter() - t0, 30.0)


def test_criterion_07_probe_then_tune_preserves_features():
    t0 = time.perf_counter()
    spec = GaussianDomainSpec(mu_d=[1.0], mu_s=[0.1])
    mix = MixingMap.identity(2)
    bayes_silent = float(
        np.linalg.norm(bayes_classifier(spec, SuppressionWeights(1.0, 1.0)).beta_s)
    )
    fd_wins = drop_wins = 0
    for seed in range(10):
        data = sample_domain(spec, mix, 4000, seed=(2024, "acc7", seed))
        init = init_pretrained(mix, PretrainKind.oracle_silent(), spec.p_d)
        erm_model, _ = train(
            init, data, TrainConfig(lr_ft=0.05, ft_iters=300, lp_iters=0, seed=(1, seed)), "erm"
        )
        lpft_model, _ = train(
            init,
            data,
            TrainConfig(lr_lp=0.5, lr_ft=0.05, lp_iters=150, ft_iters=150, seed=(1, seed)),
            "lp_ft",
        )
        fd_wins += feature_distortion(init, lpft_model, data) < feature_distortion(
            init, erm_model, data
        )
        drop_erm = bayes_silent - float(np.linalg.norm(effective_rule(erm_model).beta_s))
        drop_lpft = bayes_silent - float(np.linalg.norm(effective_rule(lpft_model).beta_s))
        drop_wins += drop_lpft < drop_erm
    ok = fd_wins >= 8 and drop_wins >= 8
    _report(7, "probe-then-tune-preservation", ok,
            f"distortion {fd_wins}/10, silent-drop {drop_wins}/10 seeds",
            time.perf_counter() - t0, 120.0)


def test_criterion_08_weight_averaging():
    t0 = time.perf_counter()
    ok_a = schedule([0.9, 0.7, 0.75, 0.72, 0.9], SwadConfig(r=0.1, n_s=3)) == (1, 4)

    rng = np.random.default_rng(808)
    state = SwadState(SwadConfig())
    vecs = rng.normal(size=(37, 9))
    for t, v in enumerate(vecs):
        state.accumulate(t, v)
    avg, _ = state.finalize()
    ok_b = np.abs(avg - vecs.mean(axis=0)).max() <= 1e-12

    spec = GaussianDomainSpec(mu_d=[1.0], mu_s=[0.5])
    shifted = make_test_spec(spec, 4.0)
    mix = MixingMap.identity(2)
    full = SuppressionWeights(1.0, 1.0)
    diffs = []
    for seed in range(20):
        data = sample_domain(spec, mix, 2000, seed=(2024, "acc8", seed))
        init = init_pretrained(mix, PretrainKind.oracle_silent(), spec.p_d)
        cfg = TrainConfig(
            lr_lp=0.5, lr_ft=0.05, lp_iters=50, ft_iters=300, seed=(2, seed), minibatch=32
        )
        averaged, trace = train(
            init, data, cfg, "lp_ft", SwadConfig(r=0.1, eval_interval=10, n_s=3)
        )
        r_avg = linear_classifier_risk(shifted, full, effective_rule(averaged), "test")
        r_final = linear_classifier_risk(
            shifted, full, effective_rule(trace.final_iterate), "test"
        )
        diffs.append(r_avg - r_final)
    mean_diff = float(np.mean(diffs))
    ok_c = mean_diff <= 0.002
    _report(8, "weight-averaging", ok_a and ok_b and ok_c,
            f"trace={ok_a} mean={ok_b} paired_diff={mean_diff:+.5f}<=0.002",
            time.perf_counter() - t0, 180.0)


def test_criterion_09_probe_only_ordering():
    t0 = time.perf_counter()
    cfg = ExperimentConfig(
        scenario="probe-only",
        spec=GaussianDomainSpec(mu_d=[1.0], mu_s=[0.2, 0.0, 0.0]),
        gammas=(1.0, 4.0),
        train_grid=(TrainConfig(lr_lp=0.5, lr_ft=0.05, lp_iters=300, ft_iters=0),),
        schedules=("lp_only",),
        pretrains=("oracle_silent", "oracle_dominant"),
        n_train=250,
        mc_samples=0,
        master_seed=2024,
        rep_seeds=(0, 1, 2),
    )
    rows, _, _ = run_training_experiment(cfg)

    def mean_risk(pretrain, gamma):
        return [
            r.test_risk
            for r in rows
            if r.seed == "mean" and r.pretrain == pretrain and r.gamma == gamma
        ][0]

    tie_tolerance = 0.005
    silent_4, dominant_4 = mean_risk("oracle_silent", 4.0), mean_risk("oracle_dominant", 4.0)
    silent_1, dominant_1 = mean_risk("oracle_silent", 1.0), mean_risk("oracle_dominant", 1.0)
    ok_shifted = silent_4 < dominant_4
    ok_unshifted = silent_1 >= dominant_1 - tie_tolerance
    _report(9, "probe-only-ordering", ok_shifted and ok_unshifted,
            f"g=4: {silent_4:.4f} vs {dominant_4:.4f}; g=1: {silent_1:.4f} vs {dominant_1:.4f}",
            time.perf_counter() - t0, 60.0)


def test_criterion_10_experiment_determinism(tmp_path):
    t0 = time.perf_counter()
    cfg = ExperimentConfig(
        scenario="determinism",
        gammas=(1.0, 4.0),
        train_grid=(TrainConfig(lr_lp=0.3, lr_ft=0.05, lp_iters=25, ft_iters=25),),
        schedules=("lp_only", "lp_ft_swad"),
        pretrains=("oracle_silent",),
        n_train=250,
        mc_samples=500,
        master_seed=1010,
        rep_seeds=(0, 1, 2),
    )
    ini = tmp_path / "cfg.ini"
    ini.write_text(cfg.to_ini())
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert cli_main(["--out", str(out_a), "experiment", "--config", str(ini)]) == 0
    assert cli_main(["--out", str(out_b), "experiment", "--config", str(ini)]) == 0
    same_csv = (out_a / "results.csv").read_bytes() == (out_b / "results.csv").read_bytes()
    same_json = (out_a / "run.json").read_bytes() == (out_b / "run.json").read_bytes()
    _report(10, "experiment-determinism", same_csv and same_json,
            f"csv={same_csv} json={same_json}", time.perf_counter() - t0, 60.0)
