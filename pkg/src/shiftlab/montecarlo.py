"""Sampling-based 0-1 risk estimates, the independent check on every closed form.

Data draws and suppression-noise draws use separate derived seed streams so
the two sources never alias; error counts are accumulated per canonical
chunk, so estimates do not depend on how chunks would be scheduled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .domains import Dataset, GaussianDomainSpec, MixingMap, sample_domain
from .errors import ConfigurationError
from .risk import LinearClassifier
from .rng import SeedLike
from .suppression import SuppressionWeights, suppressed_featurizer


@dataclass(frozen=True)
class RiskEstimate:
    mean: float
    stderr: float
    n: int
    seed: SeedLike

    CSV_HEADER = "mean,stderr,n"

    def within(self, target: float, k_sigma: float = 4.0) -> bool:
        return abs(self.mean - target) <= k_sigma * self.stderr


def _estimate(errors: int, n: int, seed: SeedLike) -> RiskEstimate:
    mean = errors / n
    return RiskEstimate(mean=mean, stderr=math.sqrt(mean * (1.0 - mean) / n), n=n, seed=seed)


def mc_risk(
    spec: GaussianDomainSpec,
    weights: SuppressionWeights,
    beta: LinearClassifier,
    domain: str,
    mixing: MixingMap,
    n: int,
    seed: SeedLike,
) -> RiskEstimate:
    """Misclassification fraction of ``beta`` over n fresh draws from ``domain``.

    Samples observed inputs, pushes them through the suppressed featurizer
    and applies sign(beta·[z̃; 1]); the training domain ignores the spec's
    gamma, matching the closed-form convention.
    """
    if domain not in ("train", "test"):
        raise ConfigurationError(f"domain must be 'train' or 'test', got {domain!r}")
    if n < 1:
        raise ConfigurationError("n must be at least 1")
    sampling_spec = spec if domain == "test" else replace(spec, gamma=1.0)
    data = sample_domain(sampling_spec, mixing, n, (seed, "data"), keep_latents=False)
    feat = suppressed_featurizer(mixing, weights, spec, (seed, "noise"))
    zd, zs = feat(data.x, offset=0)
    errors = int(np.count_nonzero(beta.predict(zd, zs) != data.y))
    return _estimate(errors, n, seed)


def mc_model_risk(model, dataset: Dataset) -> RiskEstimate:
    """Empirical 0-1 risk of a trained two-stage model on a held-out dataset."""
    if len(dataset) == 0:
        raise ConfigurationError("dataset must be nonempty")
    if dataset.x.shape[1] != model.W.shape[1]:
        raise ConfigurationError("dataset dimension does not match the model featurizer")
    errors = int(np.count_nonzero(model.predict(dataset.x) != dataset.y))
    return _estimate(errors, len(dataset), dataset.seed)
