"""Gradient-descent training of a linear featurizer plus linear head.

The model is h(x) = head(W·x) with a (p×p) featurizer matrix W; training
minimizes the logistic loss on labels {+1, -1} with exact analytic
gradients. Schedules: "erm" (all parameters throughout), "lp_only" (head
only, featurizer frozen), and "lp_ft" (a head-only probing phase followed
by full fine-tuning). The logistic loss is used as the differentiable
surrogate for the 0-1 objective because its population minimizer is the
Gaussian log-odds rule, which makes the trained direction comparable to the
closed-form Bayes rule.

Optional dense weight averaging runs during the fine-tuning phase only,
driven by validation losses evaluated every ``eval_interval`` iterations on
the pre-update parameters.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .domains import Dataset, MixingMap
from .errors import ConfigurationError, DomainError, TrainingDivergedError
from .risk import LinearClassifier
from .rng import SeedLike, generator
from .swad import SwadConfig, SwadState

Schedule = Literal["erm", "lp_only", "lp_ft"]

CHECKPOINT_MAGIC = "shiftlab-model"
CHECKPOINT_VERSION = 1


@dataclass
class TrainConfig:
    lr_lp: float = 0.1
    lr_ft: float = 0.1
    lp_iters: int = 0
    ft_iters: int = 500
    val_fraction: float = 0.2
    seed: SeedLike = 0
    minibatch: int | None = None

    def __post_init__(self):
        if self.lp_iters + self.ft_iters <= 0:
            raise ConfigurationError("lp_iters + ft_iters must be positive")
        if not 0.0 < self.val_fraction < 1.0:
            raise ConfigurationError("val_fraction must lie in (0, 1)")
        if self.minibatch is not None and self.minibatch < 1:
            raise ConfigurationError("minibatch must be at least 1 when given")


@dataclass(frozen=True)
class PretrainKind:
    """Stand-ins for pretrained featurizers with and without silent directions.

    ``oracle_silent`` recovers both feature groups exactly (W·f = I);
    ``oracle_dominant`` additionally zeroes the silent output coordinates;
    ``noisy_oracle`` perturbs the exact recovery with epsilon-scaled Gaussian
    entries.
    """

    kind: Literal["oracle_silent", "oracle_dominant", "noisy_oracle"]
    epsilon: float = 0.0

    def __post_init__(self):
        if self.kind not in ("oracle_silent", "oracle_dominant", "noisy_oracle"):
            raise ConfigurationError(f"unknown pretrain kind: {self.kind!r}")
        if self.epsilon < 0:
            raise ConfigurationError("epsilon must be non-negative")

    @classmethod
    def oracle_silent(cls) -> "PretrainKind":
        return cls("oracle_silent")

    @classmethod
    def oracle_dominant(cls) -> "PretrainKind":
        return cls("oracle_dominant")

    @classmethod
    def noisy_oracle(cls, epsilon: float) -> "PretrainKind":
        return cls("noisy_oracle", epsilon)


@dataclass
class TwoStageModel:
    """Linear featurizer z = W·x and linear head over the featurizer output."""

    W: np.ndarray
    head: LinearClassifier
    mixing: MixingMap

    def __post_init__(self):
        self.W = np.asarray(self.W, dtype=np.float64)
        p = self.W.shape[0]
        if self.W.shape != (p, p) or self.mixing.dim != p:
            raise ConfigurationError("featurizer, head and mixing dimensions disagree")
        if self.head.beta_d.size + self.head.beta_s.size != p:
            raise ConfigurationError("head dimension does not match featurizer output")

    @property
    def p_d(self) -> int:
        return self.head.beta_d.size

    @property
    def dim(self) -> int:
        return self.W.shape[0]

    def head_vector(self) -> np.ndarray:
        return np.concatenate([self.head.beta_d, self.head.beta_s])

    def scores(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x) @ (self.W.T @ self.head_vector()) + self.head.beta_0

    def predict(self, x: np.ndarray) -> np.ndarray:
        return np.where(self.scores(x) >= 0.0, 1, -1)

    def copy(self) -> "TwoStageModel":
        return TwoStageModel(
            W=self.W.copy(),
            head=LinearClassifier(
                self.head.beta_d.copy(), self.head.beta_s.copy(), self.head.beta_0
            ),
            mixing=self.mixing,
        )

    def pack(self) -> np.ndarray:
        """Flatten all trainable parameters: W rows, head vector, bias."""
        return np.concatenate([self.W.ravel(), self.head_vector(), [self.head.beta_0]])

    def unpack(self, vec: np.ndarray) -> None:
        p = self.dim
        self.W = vec[: p * p].reshape(p, p).copy()
        head = vec[p * p : p * p + p]
        self.head = LinearClassifier(
            head[: self.p_d].copy(), head[self.p_d :].copy(), float(vec[-1])
        )

    def save(self) -> str:
        """Text checkpoint with a dimensions header; floats round-trip exactly."""
        out = io.StringIO()
        out.write(f"{CHECKPOINT_MAGIC} {CHECKPOINT_VERSION}\n")
        out.write(f"p_d {self.p_d} p_s {self.dim - self.p_d}\n")
        out.write(f"mixing {self.mixing.kind}\n")
        for name, mat in (("W", self.W), ("M", self.mixing.matrix)):
            out.write(name + "\n")
            for row in mat:
                out.write(" ".join(repr(float(v)) for v in row) + "\n")
        out.write("head_d " + " ".join(repr(float(v)) for v in self.head.beta_d) + "\n")
        out.write("head_s " + " ".join(repr(float(v)) for v in self.head.beta_s) + "\n")
        out.write(f"bias {self.head.beta_0!r}\n")
        return out.getvalue()

    @classmethod
    def load(cls, text: str) -> "TwoStageModel":
        lines = text.strip("\n").split("\n")
        magic, version = lines[0].rsplit(" ", 1)
        if magic != CHECKPOINT_MAGIC or int(version) != CHECKPOINT_VERSION:
            raise ConfigurationError(f"unsupported checkpoint header: {lines[0]!r}")
        _, p_d, _, p_s = lines[1].split()
        p_d, p_s = int(p_d), int(p_s)
        p = p_d + p_s
        kind = lines[2].split(" ", 1)[1]
        if lines[3] != "W":
            raise ConfigurationError("malformed checkpoint: expected W block")
        w_rows = [[float(v) for v in lines[4 + i].split()] for i in range(p)]
        if lines[4 + p] != "M":
            raise ConfigurationError("malformed checkpoint: expected M block")
        m_rows = [[float(v) for v in lines[5 + p + i].split()] for i in range(p)]
        head_d = [float(v) for v in lines[5 + 2 * p].split()[1:]]
        head_s = [float(v) for v in lines[6 + 2 * p].split()[1:]]
        bias = float(lines[7 + 2 * p].split()[1])
        return cls(
            W=np.array(w_rows),
            head=LinearClassifier(head_d, head_s, bias),
            mixing=MixingMap(kind, np.array(m_rows)),
        )


@dataclass
class TraceRow:
    iteration: int
    phase: str
    train_loss: float
    val_loss: float
    swad_active: bool = False


@dataclass
class TrainTrace:
    rows: list[TraceRow] = field(default_factory=list)
    swad_report: dict | None = None
    final_iterate: TwoStageModel | None = None

    def to_csv(self, include_swad: bool | None = None) -> str:
        """Rows ``iter,phase,train_loss,val_loss[,swad_active]``."""
        with_swad = self.swad_report is not None if include_swad is None else include_swad
        header = "iter,phase,train_loss,val_loss" + (",swad_active" if with_swad else "")
        out = [header]
        for r in self.rows:
            line = f"{r.iteration},{r.phase},{float(r.train_loss)!r},{float(r.val_loss)!r}"
            if with_swad:
                line += f",{int(r.swad_active)}"
            out.append(line)
        return "\n".join(out) + "\n"


def init_pretrained(
    mixing: MixingMap, kind: PretrainKind, p_d: int, seed: SeedLike = 0
) -> TwoStageModel:
    """Featurizer initialization per pretrain kind; the head starts at zero."""
    p = mixing.dim
    if not 1 <= p_d < p:
        raise ConfigurationError("p_d must leave at least one silent coordinate")
    w = mixing.matrix.T.copy()
    if kind.kind == "oracle_dominant":
        w[p_d:, :] = 0.0
    elif kind.kind == "noisy_oracle" and kind.epsilon > 0.0:
        w = w + kind.epsilon * generator(seed, "pretrain").standard_normal((p, p))
    return TwoStageModel(
        W=w,
        head=LinearClassifier(np.zeros(p_d), np.zeros(p - p_d), 0.0),
        mixing=mixing,
    )


def _sigmoid(t: np.ndarray) -> np.ndarray:
    out = np.empty_like(t)
    pos = t >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-t[pos]))
    e = np.exp(t[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def logistic_loss(scores: np.ndarray, y: np.ndarray) -> float:
    """Mean log(1 + exp(-y*score)) over the batch, evaluated stably."""
    return float(np.logaddexp(0.0, -y * scores).mean())


def loss_and_grads(model: TwoStageModel, x: np.ndarray, y: np.ndarray):
    """Logistic loss and exact gradients with respect to (W, head, bias)."""
    h = model.head_vector()
    s = x @ (model.W.T @ h) + model.head.beta_0
    t = -y * s
    loss = float(np.logaddexp(0.0, t).mean())
    c = (-y * _sigmoid(t)) / y.size
    q = x.T @ c
    g_w = np.outer(h, q)
    g_h = model.W @ q
    g_b = float(c.sum())
    return loss, g_w, g_h, g_b


def validation_split(cfg: TrainConfig, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Seeded shuffled split; the last ceil(val_fraction*n) indices validate."""
    n_val = math.ceil(cfg.val_fraction * n)
    if n_val < 1 or n_val >= n:
        raise ConfigurationError("val_fraction leaves no training or no validation samples")
    perm = generator(cfg.seed, "split").permutation(n)
    return perm[: n - n_val], perm[n - n_val :]


_SCHEDULE_PHASES = {
    "erm": (("ft",),),
    "lp_only": (("lp",),),
    "lp_ft": (("lp",), ("ft",)),
}


def train(
    model: TwoStageModel,
    data: Dataset,
    cfg: TrainConfig,
    schedule: Schedule = "erm",
    swad: SwadConfig | None = None,
) -> tuple[TwoStageModel, TrainTrace]:
    """Run the requested schedule; returns the trained model and its trace.

    Probing phases update the head only and leave the featurizer bit
    identical. When ``swad`` is given, weight averaging applies during the
    fine-tuning phase only and the pre-averaging final iterate is kept on
    the trace for comparison.
    """
    if schedule not in _SCHEDULE_PHASES:
        raise ConfigurationError(f"unknown schedule: {schedule!r}")
    if data.x.shape[1] != model.dim:
        raise ConfigurationError("dataset dimension does not match the model")
    model = model.copy()
    train_idx, val_idx = validation_split(cfg, len(data))
    x_train, y_train = data.x[train_idx], data.y[train_idx].astype(np.float64)
    x_val, y_val = data.x[val_idx], data.y[val_idx].astype(np.float64)
    batch_rng = generator(cfg.seed, "batch") if cfg.minibatch is not None else None

    trace = TrainTrace()
    giter = 0
    for (phase,) in _SCHEDULE_PHASES[schedule]:
        iters = cfg.lp_iters if phase == "lp" else cfg.ft_iters
        lr = cfg.lr_lp if phase == "lp" else cfg.lr_ft
        swad_on = phase == "ft" and swad is not None
        state = SwadState(swad) if swad_on else None
        for t in range(iters):
            if batch_rng is not None:
                take = min(cfg.minibatch, x_train.shape[0])
                sel = batch_rng.choice(x_train.shape[0], size=take, replace=False)
                xb, yb = x_train[sel], y_train[sel]
            else:
                xb, yb = x_train, y_train
            # Overflow here is the divergence signal, not a numpy error.
            with np.errstate(over="ignore", invalid="ignore"):
                loss, g_w, g_h, g_b = loss_and_grads(model, xb, yb)
                val_loss = logistic_loss(model.scores(x_val), y_val)
            if not (math.isfinite(loss) and math.isfinite(val_loss)):
                raise TrainingDivergedError(giter)
            if swad_on:
                if t % swad.eval_interval == 0:
                    state.record_loss(t, val_loss)
                state.accumulate(t, model.pack())
            trace.rows.append(TraceRow(giter, phase, loss, val_loss, swad_on))
            h = model.head_vector()
            b = model.head.beta_0
            if phase != "lp":
                model.W = model.W - lr * g_w
            h = h - lr * g_h
            b = b - lr * g_b
            model.head = LinearClassifier(h[: model.p_d], h[model.p_d :], b)
            giter += 1
        if swad_on and iters > 0:
            state.record_loss(iters, logistic_loss(model.scores(x_val), y_val))
            trace.final_iterate = model.copy()
            averaged, report = state.finalize(fallback=model.pack())
            model.unpack(averaged)
            trace.swad_report = report
    return model, trace


def feature_distortion(before: TwoStageModel, after: TwoStageModel, data: Dataset) -> float:
    """Mean Euclidean distance between featurizer outputs before and after training."""
    if before.W.shape != after.W.shape:
        raise ConfigurationError("featurizer shapes disagree")
    if len(data) == 0:
        raise DomainError("feature_distortion requires a nonempty dataset")
    delta = data.x @ (after.W - before.W).T
    return float(np.linalg.norm(delta, axis=1).mean())


def effective_rule(model: TwoStageModel) -> LinearClassifier:
    """Collapse head∘featurizer into one linear rule over the latent blocks.

    The x-space coefficient vector W'·head is pulled back to latent space
    through the mixing transpose, so the result is directly comparable with
    the closed-form Bayes rule; predictions agree with the model on every
    input.
    """
    v = model.W.T @ model.head_vector()
    u = model.mixing.matrix.T @ v
    return LinearClassifier(u[: model.p_d], u[model.p_d :], model.head.beta_0)
