"""Endpoint handlers: plain functions from request model to response model.

The FastAPI app adds transport only, so the CLI can call these handlers in
process with identical behavior.
"""

from __future__ import annotations

import numpy as np

from ..domains import mixing_for, sample_domain, spec_to_config, test_spec
from ..experiments import (
    ExperimentConfig,
    SweepRow,
    defaults_ini,
    demo_fig3,
    grid_select,
    rows_from_csv,
    run_mc_check,
    run_sweep,
    run_training_experiment,
    sweep_csv,
    training_csv,
)
from ..risk import linear_classifier_risk
from ..suppression import SuppressionWeights
from ..training import (
    PretrainKind,
    effective_rule,
    feature_distortion,
    init_pretrained,
    train,
    validation_split,
)
from . import schemas as sc


def handle_generate(req: sc.GenerateRequest) -> sc.GenerateResponse:
    spec = req.spec.to_spec()
    mixing = mixing_for(spec, req.mixing.kind, req.mixing.seed)
    data = sample_domain(spec, mixing, req.n, req.seed)
    return sc.GenerateResponse(
        csv=data.to_csv(include_latents=req.include_latents),
        spec_config=spec_to_config(spec),
        n=len(data),
        dim=spec.dim,
    )


def handle_sweep(req: sc.SweepRequest) -> sc.SweepResponse:
    cfg = ExperimentConfig(
        scenario="sweep",
        spec=req.spec.to_spec(),
        mixing_kind=req.mixing.kind,
        mixing_seed=req.mixing.seed,
        gammas=tuple(req.gammas),
        w_d_grid=tuple(req.w_d),
        w_s_grid=tuple(req.w_s),
        mc_samples=req.mc_samples,
        master_seed=req.seed,
    )
    rows = run_sweep(cfg)

    def to_model(r: SweepRow) -> sc.RiskPointModel:
        return sc.RiskPointModel(
            w_d=r.w_d,
            w_s=r.w_s,
            gamma=r.gamma,
            method=r.method,
            train_risk=r.train_risk,
            test_risk=r.test_risk,
            train_stderr=r.train_stderr,
            test_stderr=r.test_stderr,
            n=r.n,
            error=r.error,
        )

    return sc.SweepResponse(csv=sweep_csv(rows), rows=[to_model(r) for r in rows])


def handle_mc_check(req: sc.McCheckRequest) -> sc.McCheckResponse:
    rows, csv = run_mc_check(req.points, req.samples, req.seed)
    n_ok = sum(1 for r in rows if r["within_4_sigma"])
    return sc.McCheckResponse(
        csv=csv, points=req.points, n_within_4_sigma=n_ok, ok=n_ok >= req.points - 1
    )


def handle_train(req: sc.TrainRequest) -> sc.TrainResponse:
    spec = req.spec.to_spec()
    mixing = mixing_for(spec, req.mixing.kind, req.mixing.seed)
    data = sample_domain(spec, mixing, req.n, (req.seed, "train-data"))
    kind = PretrainKind(req.pretrain, req.pretrain_epsilon)
    init = init_pretrained(mixing, kind, spec.p_d, seed=(req.seed, "pretrain"))
    cfg = req.train.to_config(seed=(req.seed, "train"))
    swad_cfg = req.swad.to_config() if req.swad is not None else None
    trained, trace = train(init, data, cfg, req.schedule, swad_cfg)
    rule = effective_rule(trained)
    full = SuppressionWeights(1.0, 1.0)
    _, val_idx = validation_split(cfg, len(data))
    val_risk = float(np.mean(trained.predict(data.x[val_idx]) != data.y[val_idx]))
    test_risks = {
        repr(float(g)): linear_classifier_risk(test_spec(spec, g), full, rule, "test")
        for g in req.eval_gammas
    }
    return sc.TrainResponse(
        trace_csv=trace.to_csv(),
        checkpoint=trained.save(),
        effective_rule=sc.EffectiveRuleModel(
            beta_d=[float(v) for v in rule.beta_d],
            beta_s=[float(v) for v in rule.beta_s],
            beta_0=rule.beta_0,
        ),
        train_risk=linear_classifier_risk(spec, full, rule, "train"),
        test_risks=test_risks,
        val_risk=val_risk,
        feature_distortion=feature_distortion(init, trained, data),
        swad_report=trace.swad_report,
    )


def handle_experiment(req: sc.ExperimentRequest) -> sc.ExperimentResponse:
    cfg = ExperimentConfig.from_ini(req.config_ini)
    rows, meta, timing = run_training_experiment(cfg)
    return sc.ExperimentResponse(results_csv=training_csv(rows), run_meta=meta, timing=timing)


def handle_grid_select(req: sc.GridSelectRequest) -> sc.GridSelectResponse:
    rows = rows_from_csv(req.results_csv)
    return sc.GridSelectResponse(
        config_id=grid_select(rows, req.criterion), criterion=req.criterion
    )


def handle_fig3(req: sc.Fig3Request) -> sc.Fig3Response:
    artifacts = demo_fig3(n=req.n, gamma=req.gamma, seed=req.seed)
    return sc.Fig3Response(**artifacts)


def handle_defaults() -> sc.DefaultsResponse:
    return sc.DefaultsResponse(config_ini=defaults_ini())


