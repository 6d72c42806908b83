"""Request/response models for the HTTP service.

These are the wire contracts; they convert to and from the core dataclasses
so endpoint handlers stay thin.
"""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field

from ..domains import GaussianDomainSpec
from ..swad import SwadConfig
from ..training import TrainConfig


class DomainSpecModel(BaseModel):
    mu_d: list[float] = Field(min_length=1)
    mu_s: list[float] = Field(min_length=1)
    sigma_d: float = 1.0
    sigma_s: float = 1.0
    eta: float = 0.5
    gamma: float = 1.0
    silent_norm_bound: float | None = None

    def to_spec(self) -> GaussianDomainSpec:
        return GaussianDomainSpec(
            mu_d=self.mu_d,
            mu_s=self.mu_s,
            sigma_d=self.sigma_d,
            sigma_s=self.sigma_s,
            eta=self.eta,
            gamma=self.gamma,
            silent_norm_bound=self.silent_norm_bound,
        )

    @classmethod
    def from_spec(cls, spec: GaussianDomainSpec) -> "DomainSpecModel":
        return cls(
            mu_d=[float(v) for v in spec.mu_d],
            mu_s=[float(v) for v in spec.mu_s],
            sigma_d=spec.sigma_d,
            sigma_s=spec.sigma_s,
            eta=spec.eta,
            gamma=spec.gamma,
            silent_norm_bound=spec.silent_norm_bound,
        )


class MixingModel(BaseModel):
    kind: Literal["identity", "seeded-orthogonal"] = "identity"
    seed: int = 0


class WeightsModel(BaseModel):
    w_d: float = Field(ge=0.0, le=1.0)
    w_s: float = Field(ge=0.0, le=1.0)


class TrainConfigModel(BaseModel):
    lr_lp: float = 0.1
    lr_ft: float = 0.1
    lp_iters: int = 0
    ft_iters: int = 500
    val_fraction: float = 0.2
    minibatch: int | None = None

    def to_config(self, seed) -> TrainConfig:
        return TrainConfig(
            lr_lp=self.lr_lp,
            lr_ft=self.lr_ft,
            lp_iters=self.lp_iters,
            ft_iters=self.ft_iters,
            val_fraction=self.val_fraction,
            seed=seed,
            minibatch=self.minibatch,
        )


class SwadConfigModel(BaseModel):
    r: float = 0.1
    eval_interval: int = 10
    n_s: int = 3

    def to_config(self) -> SwadConfig:
        return SwadConfig(r=self.r, eval_interval=self.eval_interval, n_s=self.n_s)


class GenerateRequest(BaseModel):
    spec: DomainSpecModel
    mixing: MixingModel = MixingModel()
    n: int = Field(default=1000, ge=1)
    seed: int = 0
    include_latents: bool = True


class GenerateResponse(BaseModel):
    csv: str
    spec_config: str
    n: int
    dim: int


class RiskPointModel(BaseModel):
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


class SweepRequest(BaseModel):
    spec: DomainSpecModel
    mixing: MixingModel = MixingModel()
    w_d: list[float] = [1.0]
    w_s: list[float] = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0]
    gammas: list[float] = [-1.0, 0.5, 1.0, 4.0]
    mc_samples: int = Field(default=0, ge=0)
    seed: int = 0


class SweepResponse(BaseModel):
    csv: str
    rows: list[RiskPointModel]


class McCheckRequest(BaseModel):
    points: int = Field(default=20, ge=1)
    samples: int = Field(default=1_000_000, ge=1000)
    seed: int = 0


class McCheckResponse(BaseModel):
    csv: str
    points: int
    n_within_4_sigma: int
    ok: bool


class TrainRequest(BaseModel):
    spec: DomainSpecModel
    mixing: MixingModel = MixingModel()
    n: int = Field(default=4000, ge=10)
    seed: int = 0
    pretrain: Literal["oracle_silent", "oracle_dominant", "noisy_oracle"] = "oracle_silent"
    pretrain_epsilon: float = 0.0
    schedule: Literal["erm", "lp_only", "lp_ft"] = "lp_ft"
    train: TrainConfigModel = TrainConfigModel()
    swad: SwadConfigModel | None = None
    eval_gammas: list[float] = [1.0, 4.0]


class EffectiveRuleModel(BaseModel):
    beta_d: list[float]
    beta_s: list[float]
    beta_0: float


class TrainResponse(BaseModel):
    trace_csv: str
    checkpoint: str
    effective_rule: EffectiveRuleModel
    train_risk: float
    test_risks: dict[str, float]
    val_risk: float
    feature_distortion: float
    swad_report: dict | None = None


class ExperimentRequest(BaseModel):
    config_ini: str


class ExperimentResponse(BaseModel):
    results_csv: str
    run_meta: dict
    timing: dict


class GridSelectRequest(BaseModel):
    results_csv: str
    criterion: Literal["train_val", "test_val"]


class GridSelectResponse(BaseModel):
    config_id: int
    criterion: str


class Fig3Request(BaseModel):
    n: int = Field(default=400, ge=2)
    gamma: float = 4.0
    seed: int = 2024


class Fig3Response(BaseModel):
    train_points_csv: str
    test_points_csv: str
    lines_csv: str
    meta: dict


class DefaultsResponse(BaseModel):
    config_ini: str


class ErrorResponse(BaseModel):
    error: str
    detail: str
