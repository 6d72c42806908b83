"""Experiment protocols: risk sweeps, training arms, grid selection, demos.

Runs are reproducible end to end: every stochastic component draws from a
stream derived from the master seed plus structural tags (config id, arm,
repetition seed), so results are independent of scheduling order, and the
emitted CSV/JSON artifacts are byte-identical across repeated runs. Wall
times are collected separately and are the one deliberately non-deterministic
output.
"""

from __future__ import annotations

import configparser
import dataclasses
import io
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .domains import (
    Dataset,
    GaussianDomainSpec,
    MixingMap,
    mixing_for,
    sample_domain,
    spec_from_config,
    spec_to_config,
    test_spec,
)
from .errors import ProtocolError, ShiftLabError
from .montecarlo import mc_model_risk, mc_risk
from .risk import LinearClassifier, bayes_classifier, bayes_risk, linear_classifier_risk
from .rng import generator
from .suppression import SuppressionWeights
from .swad import SwadConfig
from .training import (
    PretrainKind,
    TrainConfig,
    effective_rule,
    feature_distortion,
    init_pretrained,
    train,
    validation_split,
)

CONFIG_VERSION = 1
FULL_WEIGHTS = SuppressionWeights(1.0, 1.0)

SCHEDULE_ARMS = ("erm", "lp_only", "lp_ft", "lp_ft_swad")
PRETRAIN_ARMS = ("oracle_silent", "oracle_dominant")


def _default_spec() -> GaussianDomainSpec:
    return GaussianDomainSpec(mu_d=[1.0, 0.0], mu_s=[0.5], sigma_d=1.0, sigma_s=1.0, eta=0.5)


def _default_train_grid() -> tuple[TrainConfig, ...]:
    return (
        TrainConfig(lr_lp=0.1, lr_ft=0.05, lp_iters=200, ft_iters=300, val_fraction=0.2),
    )


@dataclass
class ExperimentConfig:
    """Everything one reproducible run needs; serializable to a versioned INI."""

    scenario: str = "demo"
    spec: GaussianDomainSpec = field(default_factory=_default_spec)
    mixing_kind: str = "identity"
    mixing_seed: int = 0
    gammas: tuple[float, ...] = (-1.0, 0.5, 1.0, 4.0)
    w_d_grid: tuple[float, ...] = (1.0,)
    w_s_grid: tuple[float, ...] = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0)
    train_grid: tuple[TrainConfig, ...] = field(default_factory=_default_train_grid)
    schedules: tuple[str, ...] = SCHEDULE_ARMS
    pretrains: tuple[str, ...] = PRETRAIN_ARMS
    n_train: int = 4000
    swad: SwadConfig = field(default_factory=lambda: SwadConfig(r=0.1, eval_interval=10, n_s=3))
    mc_samples: int = 100000
    master_seed: int = 2024
    rep_seeds: tuple[int, ...] = (0, 1, 2)
    jobs: int = 1

    def __post_init__(self):
        if not (self.gammas and self.w_d_grid and self.w_s_grid and self.train_grid):
            raise ProtocolError("experiment grids must be nonempty")
        if len(set(self.rep_seeds)) != len(self.rep_seeds) or not self.rep_seeds:
            raise ProtocolError("repetition seeds must be nonempty and distinct")

    def mixing(self) -> MixingMap:
        return mixing_for(self.spec, self.mixing_kind, self.mixing_seed)

    def to_ini(self) -> str:
        out = io.StringIO()
        out.write("[experiment]\n")
        out.write(f"version = {CONFIG_VERSION}\n")
        out.write(f"scenario = {self.scenario}\n")
        out.write(f"master_seed = {self.master_seed}\n")
        out.write("rep_seeds = " + " ".join(str(s) for s in self.rep_seeds) + "\n")
        out.write(f"mc_samples = {self.mc_samples}\n")
        out.write(f"n_train = {self.n_train}\n")
        out.write(f"jobs = {self.jobs}\n")
        out.write("schedules = " + " ".join(self.schedules) + "\n")
        out.write("pretrains = " + " ".join(self.pretrains) + "\n\n")
        out.write(spec_to_config(self.spec, section="domain") + "\n")
        out.write("[mixing]\n")
        out.write(f"kind = {self.mixing_kind}\n")
        out.write(f"seed = {self.mixing_seed}\n\n")
        out.write("[shift]\n")
        out.write("gammas = " + " ".join(repr(float(g)) for g in self.gammas) + "\n\n")
        out.write("[suppression_grid]\n")
        out.write("w_d = " + " ".join(repr(float(w)) for w in self.w_d_grid) + "\n")
        out.write("w_s = " + " ".join(repr(float(w)) for w in self.w_s_grid) + "\n\n")
        out.write("[swad]\n")
        out.write(f"r = {self.swad.r!r}\n")
        out.write(f"eval_interval = {self.swad.eval_interval}\n")
        out.write(f"n_s = {self.swad.n_s}\n")
        for i, tc in enumerate(self.train_grid):
            out.write(f"\n[traincfg.{i}]\n")
            out.write(f"lr_lp = {tc.lr_lp!r}\n")
            out.write(f"lr_ft = {tc.lr_ft!r}\n")
            out.write(f"lp_iters = {tc.lp_iters}\n")
            out.write(f"ft_iters = {tc.ft_iters}\n")
            out.write(f"val_fraction = {tc.val_fraction!r}\n")
            out.write(f"minibatch = {tc.minibatch if tc.minibatch is not None else 'full'}\n")
        return out.getvalue()

    @classmethod
    def from_ini(cls, text: str) -> "ExperimentConfig":
        try:
            return cls._from_ini(text)
        except (KeyError, ValueError, configparser.Error) as exc:
            if isinstance(exc, ProtocolError):
                raise
            raise ProtocolError(f"malformed experiment config: {exc}") from exc

    @classmethod
    def _from_ini(cls, text: str) -> "ExperimentConfig":
        parser = configparser.ConfigParser()
        parser.read_string(text)
        exp = parser["experiment"]
        if exp.getint("version") != CONFIG_VERSION:
            raise ProtocolError(f"unsupported experiment config version: {exp.get('version')}")
        spec = spec_from_config(text, section="domain")
        train_sections = sorted(
            (s for s in parser.sections() if s.startswith("traincfg.")),
            key=lambda s: int(s.split(".", 1)[1]),
        )
        grid = []
        for s in train_sections:
            sec = parser[s]
            mb = sec.get("minibatch", "full")
            grid.append(
                TrainConfig(
                    lr_lp=sec.getfloat("lr_lp"),
                    lr_ft=sec.getfloat("lr_ft"),
                    lp_iters=sec.getint("lp_iters"),
                    ft_iters=sec.getint("ft_iters"),
                    val_fraction=sec.getfloat("val_fraction", fallback=0.2),
                    minibatch=None if mb == "full" else int(mb),
                )
            )
        swad_sec = parser["swad"]
        return cls(
            scenario=exp.get("scenario"),
            spec=spec,
            mixing_kind=parser["mixing"].get("kind"),
            mixing_seed=parser["mixing"].getint("seed"),
            gammas=tuple(float(v) for v in parser["shift"]["gammas"].split()),
            w_d_grid=tuple(float(v) for v in parser["suppression_grid"]["w_d"].split()),
            w_s_grid=tuple(float(v) for v in parser["suppression_grid"]["w_s"].split()),
            train_grid=tuple(grid) if grid else _default_train_grid(),
            schedules=tuple(exp.get("schedules").split()),
            pretrains=tuple(exp.get("pretrains").split()),
            n_train=exp.getint("n_train"),
            swad=SwadConfig(
                r=swad_sec.getfloat("r"),
                eval_interval=swad_sec.getint("eval_interval"),
                n_s=swad_sec.getint("n_s"),
            ),
            mc_samples=exp.getint("mc_samples"),
            master_seed=exp.getint("master_seed"),
            rep_seeds=tuple(int(v) for v in exp.get("rep_seeds").split()),
            jobs=exp.getint("jobs", fallback=1),
        )


def defaults_ini() -> str:
    return ExperimentConfig().to_ini()


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return repr(value)
    return str(value)


# ---------------------------------------------------------------------------
# Risk sweeps
# ---------------------------------------------------------------------------


@dataclass
class SweepRow:
    w_d: float
    w_s: float
    gamma: float
    method: str
    train_risk: float | None = None
    test_risk: float | None = None
    train_stderr: float | None = None
    test_stderr: float | None = None
    n: int | None = None
    error: str | None = None


SWEEP_HEADER = "w_d,w_s,gamma,method,train_risk,test_risk,train_stderr,test_stderr,n,error"


def sweep_csv(rows: list[SweepRow]) -> str:
    lines = [SWEEP_HEADER]
    for r in rows:
        lines.append(
            ",".join(
                [
                    repr(float(r.w_d)),
                    repr(float(r.w_s)),
                    repr(float(r.gamma)),
                    r.method,
                    _fmt(r.train_risk),
                    _fmt(r.test_risk),
                    _fmt(r.train_stderr),
                    _fmt(r.test_stderr),
                    _fmt(r.n),
                    (r.error or "").replace(",", ";"),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def run_sweep(cfg: ExperimentConfig) -> list[SweepRow]:
    """Closed-form Bayes risks over the (w_d, w_s, gamma) grid, with optional
    Monte-Carlo cross-check rows. Row order follows the grid enumeration."""
    mixing = cfg.mixing()
    points = list(product(enumerate(cfg.w_d_grid), enumerate(cfg.w_s_grid)))

    def evaluate(point) -> list[SweepRow]:
        (i_d, w_d), (i_s, w_s) = point
        out: list[SweepRow] = []
        weights = SuppressionWeights(w_d, w_s)
        for i_g, gamma in enumerate(cfg.gammas):
            shifted = test_spec(cfg.spec, gamma)
            try:
                out.append(
                    SweepRow(
                        w_d=w_d,
                        w_s=w_s,
                        gamma=gamma,
                        method="closed_form",
                        train_risk=bayes_risk(shifted, weights, "train"),
                        test_risk=bayes_risk(shifted, weights, "test"),
                    )
                )
            except ShiftLabError as exc:
                out.append(
                    SweepRow(w_d=w_d, w_s=w_s, gamma=gamma, method="closed_form", error=str(exc))
                )
                continue
            if cfg.mc_samples > 0:
                try:
                    beta = bayes_classifier(cfg.spec, weights)
                    seed = (cfg.master_seed, "sweep-mc", i_d, i_s, i_g)
                    est_train = mc_risk(
                        shifted, weights, beta, "train", mixing, cfg.mc_samples, (seed, "tr")
                    )
                    est_test = mc_risk(
                        shifted, weights, beta, "test", mixing, cfg.mc_samples, (seed, "te")
                    )
                    out.append(
                        SweepRow(
                            w_d=w_d,
                            w_s=w_s,
                            gamma=gamma,
                            method="monte_carlo",
                            train_risk=est_train.mean,
                            test_risk=est_test.mean,
                            train_stderr=est_train.stderr,
                            test_stderr=est_test.stderr,
                            n=cfg.mc_samples,
                        )
                    )
                except ShiftLabError as exc:
                    out.append(
                        SweepRow(
                            w_d=w_d, w_s=w_s, gamma=gamma, method="monte_carlo", error=str(exc)
                        )
                    )
        return out

    if cfg.jobs > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            blocks = list(pool.map(evaluate, points))
    else:
        blocks = [evaluate(p) for p in points]
    return [row for block in blocks for row in block]


# ---------------------------------------------------------------------------
# Monte-Carlo agreement check
# ---------------------------------------------------------------------------

MC_CHECK_HEADER = (
    "point,p_d,p_s,eta,sigma_d,sigma_s,gamma,w_d,w_s,domain,closed_form,mc_mean,mc_stderr,"
    "abs_diff,within_4_sigma"
)


def run_mc_check(points: int, samples: int, seed: int) -> tuple[list[dict], str]:
    """Random-grid agreement check between closed-form and Monte-Carlo risks.

    Each point draws a random spec, suppression weights, gamma and a random
    linear rule (a perturbed Bayes rule), then compares the exact risk with
    the sampled estimate at 4 binomial standard errors.
    """
    g = generator(seed, "mc-check")
    rows: list[dict] = []
    lines = [MC_CHECK_HEADER]
    for i in range(points):
        p_d = int(g.integers(1, 4))
        p_s = int(g.integers(1, 4))
        spec = GaussianDomainSpec(
            mu_d=g.normal(0.0, 1.0, p_d),
            mu_s=g.normal(0.0, 0.6, p_s),
            sigma_d=float(g.uniform(0.6, 1.8)),
            sigma_s=float(g.uniform(0.6, 1.8)),
            eta=float(g.uniform(0.25, 0.75)),
            gamma=float(g.uniform(-2.0, 4.0)),
        )
        weights = SuppressionWeights(float(g.uniform(0.0, 1.0)), float(g.uniform(0.0, 1.0)))
        base = bayes_classifier(spec, weights)
        beta = LinearClassifier(
            base.beta_d + g.normal(0.0, 0.3, p_d),
            base.beta_s + g.normal(0.0, 0.3, p_s),
            base.beta_0 + float(g.normal(0.0, 0.2)),
        )
        domain = "test" if i % 2 else "train"
        mixing = MixingMap.identity(spec.dim)
        closed = linear_classifier_risk(spec, weights, beta, domain)
        est = mc_risk(spec, weights, beta, domain, mixing, samples, (seed, "pt", i))
        diff = abs(est.mean - closed)
        ok = diff <= 4.0 * est.stderr
        rows.append(
            {
                "point": i,
                "closed_form": closed,
                "mc_mean": est.mean,
                "mc_stderr": est.stderr,
                "abs_diff": diff,
                "within_4_sigma": ok,
            }
        )
        lines.append(
            ",".join(
                [
                    str(i),
                    str(p_d),
                    str(p_s),
                    repr(spec.eta),
                    repr(spec.sigma_d),
                    repr(spec.sigma_s),
                    repr(spec.gamma),
                    repr(weights.w_d),
                    repr(weights.w_s),
                    domain,
                    repr(closed),
                    repr(est.mean),
                    repr(est.stderr),
                    repr(diff),
                    str(int(ok)),
                ]
            )
        )
    return rows, "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Training experiments
# ---------------------------------------------------------------------------


@dataclass
class TrainRow:
    scenario: str
    config_id: int
    arm: str
    pretrain: str
    seed: str
    gamma: float
    train_risk: float | None = None
    test_risk: float | None = None
    val_risk: float | None = None
    mc_test_risk: float | None = None
    mc_test_stderr: float | None = None
    mc_n: int | None = None
    feature_distortion: float | None = None
    swad_t_s: int | None = None
    swad_t_e: int | None = None
    swad_snapshots: int | None = None
    swad_fallback: bool | None = None
    error: str | None = None


TRAIN_HEADER = (
    "scenario,config_id,arm,pretrain,seed,gamma,train_risk,test_risk,val_risk,"
    "mc_test_risk,mc_test_stderr,mc_n,feature_distortion,"
    "swad_t_s,swad_t_e,swad_snapshots,swad_fallback,error"
)


def training_csv(rows: list[TrainRow]) -> str:
    lines = [TRAIN_HEADER]
    for r in rows:
        lines.append(
            ",".join(
                [
                    r.scenario,
                    str(r.config_id),
                    r.arm,
                    r.pretrain,
                    r.seed,
                    repr(float(r.gamma)),
                    _fmt(r.train_risk),
                    _fmt(r.test_risk),
                    _fmt(r.val_risk),
                    _fmt(r.mc_test_risk),
                    _fmt(r.mc_test_stderr),
                    _fmt(r.mc_n),
                    _fmt(r.feature_distortion),
                    _fmt(r.swad_t_s),
                    _fmt(r.swad_t_e),
                    _fmt(r.swad_snapshots),
                    _fmt(r.swad_fallback),
                    (r.error or "").replace(",", ";"),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def rows_from_csv(text: str) -> list[TrainRow]:
    lines = [ln for ln in text.strip("\n").split("\n") if ln]
    if not lines or lines[0] != TRAIN_HEADER:
        raise ProtocolError("unrecognized training results header")

    def opt_float(v: str) -> float | None:
        return float(v) if v else None

    def opt_int(v: str) -> int | None:
        return int(v) if v else None

    rows = []
    for ln in lines[1:]:
        f = ln.split(",")
        rows.append(
            TrainRow(
                scenario=f[0],
                config_id=int(f[1]),
                arm=f[2],
                pretrain=f[3],
                seed=f[4],
                gamma=float(f[5]),
                train_risk=opt_float(f[6]),
                test_risk=opt_float(f[7]),
                val_risk=opt_float(f[8]),
                mc_test_risk=opt_float(f[9]),
                mc_test_stderr=opt_float(f[10]),
                mc_n=opt_int(f[11]),
                feature_distortion=opt_float(f[12]),
                swad_t_s=opt_int(f[13]),
                swad_t_e=opt_int(f[14]),
                swad_snapshots=opt_int(f[15]),
                swad_fallback=bool(int(f[16])) if f[16] else None,
                error=f[17] or None,
            )
        )
    return rows


def _pretrain_kind(name: str) -> PretrainKind:
    """Parse an arm name; noisy oracles carry their scale as "noisy_oracle:0.1"."""
    if name.startswith("noisy_oracle"):
        eps = float(name.split(":", 1)[1]) if ":" in name else 0.0
        return PretrainKind("noisy_oracle", eps)
    return PretrainKind(name)


def _run_arm(cfg, mixing, data, i_cfg, schedule_name, pretrain_name, rep_seed):
    """Train one (config, schedule, pretrain, seed) arm and evaluate it."""
    template = cfg.train_grid[i_cfg]
    init = init_pretrained(
        mixing,
        _pretrain_kind(pretrain_name),
        cfg.spec.p_d,
        seed=(cfg.master_seed, "pretrain", rep_seed),
    )
    run_cfg = dataclasses.replace(
        template, seed=(cfg.master_seed, "train", i_cfg, schedule_name, pretrain_name, rep_seed)
    )
    base_schedule = "lp_ft" if schedule_name == "lp_ft_swad" else schedule_name
    swad_cfg = cfg.swad if schedule_name == "lp_ft_swad" else None
    trained, trace = train(init, data, run_cfg, base_schedule, swad_cfg)
    rule = effective_rule(trained)
    _, val_idx = validation_split(run_cfg, len(data))
    val_risk = float(np.mean(trained.predict(data.x[val_idx]) != data.y[val_idx]))
    result = {
        "train_risk": linear_classifier_risk(cfg.spec, FULL_WEIGHTS, rule, "train"),
        "val_risk": val_risk,
        "feature_distortion": feature_distortion(init, trained, data),
        "rule": rule,
        "model": trained,
        "swad_report": trace.swad_report,
    }
    return result


def run_training_experiment(cfg: ExperimentConfig) -> tuple[list[TrainRow], dict, dict]:
    """Train every (config, schedule, pretrain) arm on each repetition seed.

    Per-seed rows carry exact closed-form risks of the trained effective rule
    plus a Monte-Carlo cross-check on fresh shifted test sets; aggregate rows
    (seed = "mean"/"std", sample std over repetitions) follow the per-seed
    block. Returns (rows, run metadata, wall-clock timings).
    """
    t_start = time.perf_counter()
    mixing = cfg.mixing()
    datasets: dict[int, Dataset] = {
        s: sample_domain(cfg.spec, mixing, cfg.n_train, (cfg.master_seed, "train-data", s))
        for s in cfg.rep_seeds
    }
    test_sets: dict[tuple[int, int], Dataset] = {}
    if cfg.mc_samples > 0:
        for s in cfg.rep_seeds:
            for i_g, gamma in enumerate(cfg.gammas):
                test_sets[(s, i_g)] = sample_domain(
                    test_spec(cfg.spec, gamma),
                    mixing,
                    cfg.mc_samples,
                    (cfg.master_seed, "test-data", s, i_g),
                )

    tasks = [
        (i_cfg, sched, pre, s)
        for i_cfg in range(len(cfg.train_grid))
        for sched in cfg.schedules
        for pre in cfg.pretrains
        for s in cfg.rep_seeds
    ]

    def run_task(task):
        i_cfg, sched, pre, s = task
        t0 = time.perf_counter()
        try:
            result = _run_arm(cfg, mixing, datasets[s], i_cfg, sched, pre, s)
            err = None
        except ShiftLabError as exc:
            result, err = None, str(exc)
        return task, result, err, time.perf_counter() - t0

    if cfg.jobs > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            outcomes = list(pool.map(run_task, tasks))
    else:
        outcomes = [run_task(t) for t in tasks]

    rows: list[TrainRow] = []
    timing_arms: dict[str, float] = {}
    for (i_cfg, sched, pre, s), result, err, wall in outcomes:
        timing_arms[f"cfg{i_cfg}/{sched}/{pre}/seed{s}"] = wall
        for i_g, gamma in enumerate(cfg.gammas):
            row = TrainRow(
                scenario=cfg.scenario,
                config_id=i_cfg,
                arm=sched,
                pretrain=pre,
                seed=str(s),
                gamma=gamma,
            )
            if err is not None:
                row.error = err
            else:
                shifted = test_spec(cfg.spec, gamma)
                row.train_risk = result["train_risk"]
                row.test_risk = linear_classifier_risk(
                    shifted, FULL_WEIGHTS, result["rule"], "test"
                )
                row.val_risk = result["val_risk"]
                row.feature_distortion = result["feature_distortion"]
                if cfg.mc_samples > 0:
                    est = mc_model_risk(result["model"], test_sets[(s, i_g)])
                    row.mc_test_risk = est.mean
                    row.mc_test_stderr = est.stderr
                    row.mc_n = est.n
                if result["swad_report"] is not None:
                    rep = result["swad_report"]
                    row.swad_t_s = rep["t_s"]
                    row.swad_t_e = rep["t_e"]
                    row.swad_snapshots = rep["n_snapshots"]
                    row.swad_fallback = rep["fallback_used"]
            rows.append(row)

    expected = len(cfg.train_grid) * len(cfg.schedules) * len(cfg.pretrains)
    expected *= len(cfg.rep_seeds) * len(cfg.gammas)
    if len(rows) != expected:
        raise ProtocolError(f"row count {len(rows)} != expected {expected}")

    rows.extend(_aggregate_rows(cfg, rows))
    meta = {
        "config_version": CONFIG_VERSION,
        "scenario": cfg.scenario,
        "master_seed": cfg.master_seed,
        "rep_seeds": list(cfg.rep_seeds),
        "per_seed_rows": expected,
        "total_rows": len(rows),
        "row_schema": TRAIN_HEADER,
        "config_ini": cfg.to_ini(),
    }
    timing = {"total_s": time.perf_counter() - t_start, "arms": timing_arms}
    return rows, meta, timing


def _aggregate_rows(cfg: ExperimentConfig, per_seed: list[TrainRow]) -> list[TrainRow]:
    """Mean and sample-std rows over repetition seeds, per (config, arm, pretrain, gamma)."""
    aggregates: list[TrainRow] = []
    numeric = ("train_risk", "test_risk", "val_risk", "mc_test_risk", "feature_distortion")
    for i_cfg in range(len(cfg.train_grid)):
        for sched in cfg.schedules:
            for pre in cfg.pretrains:
                for gamma in cfg.gammas:
                    group = [
                        r
                        for r in per_seed
                        if r.config_id == i_cfg
                        and r.arm == sched
                        and r.pretrain == pre
                        and r.gamma == gamma
                        and r.error is None
                    ]
                    for stat in ("mean", "std"):
                        row = TrainRow(
                            scenario=cfg.scenario,
                            config_id=i_cfg,
                            arm=sched,
                            pretrain=pre,
                            seed=stat,
                            gamma=gamma,
                        )
                        if not group:
                            row.error = "all repetitions failed"
                        else:
                            for name in numeric:
                                vals = [getattr(r, name) for r in group]
                                if any(v is None for v in vals):
                                    continue
                                if stat == "mean":
                                    setattr(row, name, float(np.mean(vals)))
                                else:
                                    setattr(
                                        row,
                                        name,
                                        float(np.std(vals, ddof=1)) if len(vals) > 1 else 0.0,
                                    )
                        aggregates.append(row)
    return aggregates


def grid_select(rows: list[TrainRow], criterion: str) -> int:
    """Pick the best config id from per-seed rows of one scenario.

    Within each config the per-seed model is the one already selected on the
    training-domain validation split; across configs the criterion is the
    mean training-domain validation risk ("train_val") or the mean
    closed-form test risk over seeds and shifts ("test_val"). Ties resolve
    to the lowest config id.
    """
    if criterion not in ("train_val", "test_val"):
        raise ProtocolError(f"criterion must be train_val or test_val, got {criterion!r}")
    per_seed = [r for r in rows if r.seed not in ("mean", "std")]
    if not per_seed:
        raise ProtocolError("no per-seed rows to select from")
    configs = sorted({r.config_id for r in per_seed})
    arms = sorted({(r.arm, r.pretrain) for r in per_seed})
    seeds = sorted({r.seed for r in per_seed})
    gammas = sorted({r.gamma for r in per_seed})
    cells = {(r.config_id, r.arm, r.pretrain, r.seed, r.gamma): r for r in per_seed}
    missing = [
        (c, a, p, s, g)
        for c in configs
        for (a, p) in arms
        for s in seeds
        for g in gammas
        if (c, a, p, s, g) not in cells
    ]
    broken = [key for key, r in cells.items() if r.error is not None]
    if missing or broken:
        raise ProtocolError(
            f"incomplete grid: {len(missing)} missing, {len(broken)} failed cells",
            missing=missing + broken,
        )
    column = "val_risk" if criterion == "train_val" else "test_risk"
    best_id, best_value = None, None
    for c in configs:
        vals = [getattr(r, column) for r in per_seed if r.config_id == c]
        value = float(np.mean(vals))
        if best_value is None or value < best_value:
            best_id, best_value = c, value
    return best_id


# ---------------------------------------------------------------------------
# Two-feature demo scenario
# ---------------------------------------------------------------------------

FIG3_LINES_HEADER = "arm,coef_dominant,coef_silent,intercept"


def demo_fig3(n: int = 400, gamma: float = 4.0, seed: int = 2024) -> dict:
    """Two-dimensional shift demo: dominant "texture" axis, silent "shape" axis.

    Emits train/test point clouds and the decision lines of a silent-
    preserving pipeline versus a dominant-only pipeline, as plain CSV for
    external plotting.
    """
    spec = GaussianDomainSpec(mu_d=[1.0], mu_s=[0.5], sigma_d=1.0, sigma_s=1.0, eta=0.5)
    mixing = MixingMap.identity(2)
    train_ds = sample_domain(spec, mixing, n, (seed, "fig3-train"))
    test_ds = sample_domain(test_spec(spec, gamma), mixing, n, (seed, "fig3-test"))
    lines = [FIG3_LINES_HEADER]
    silent_coefs = {}
    for arm, weights in (
        ("oracle_silent", SuppressionWeights(1.0, 1.0)),
        ("oracle_dominant", SuppressionWeights(1.0, 0.0)),
    ):
        model = init_pretrained(mixing, PretrainKind(arm), spec.p_d)
        model.head = bayes_classifier(spec, weights)
        rule = effective_rule(model)
        silent_coefs[arm] = float(rule.beta_s[0])
        lines.append(
            ",".join(
                [arm, repr(float(rule.beta_d[0])), repr(float(rule.beta_s[0])), repr(rule.beta_0)]
            )
        )
    return {
        "train_points_csv": train_ds.to_csv(include_latents=False),
        "test_points_csv": test_ds.to_csv(include_latents=False),
        "lines_csv": "\n".join(lines) + "\n",
        "meta": {
            "scenario": "two-feature-demo",
            "gamma": gamma,
            "n": n,
            "axes": {"x_0": "texture (dominant)", "x_1": "shape (silent)"},
            "silent_coefficients": silent_coefs,
        },
    }
