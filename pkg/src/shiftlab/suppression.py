"""Mean-attenuating feature suppression with exact variance preservation.

A suppression weight w ∈ [0, 1] maps a latent block z ~ N(y·m, σ²I) to
z̃ ~ N(y·w·m, σ²I). The realization is the linear-Gaussian channel

    z̃ = w·z + sqrt(1 - w²)·ε,   ε ~ N(0, σ²I),

the unique such channel that scales the conditional mean by w while keeping
the per-coordinate variance at σ² (plain rescaling w·z would shrink it to
w²σ²). At w = 1 the channel is a bitwise identity and consumes no
randomness; at w = 0 the output is pure noise, independent of z.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .domains import GaussianDomainSpec, MixingMap
from .errors import ConfigurationError, DomainError
from .rng import SeedLike, chunked_normal


def _check_weight(w: float, name: str = "w") -> float:
    w = float(w)
    if math.isnan(w) or not 0.0 <= w <= 1.0:
        raise DomainError(f"{name} must lie in [0, 1], got {w}")
    return w


@dataclass(frozen=True)
class SuppressionWeights:
    """Per-group attenuation factors for the dominant and silent blocks."""

    w_d: float
    w_s: float

    def __post_init__(self):
        object.__setattr__(self, "w_d", _check_weight(self.w_d, "w_d"))
        object.__setattr__(self, "w_s", _check_weight(self.w_s, "w_s"))


def suppress_latents(z: np.ndarray, w: float, sigma: float, rng_seed: SeedLike) -> np.ndarray:
    """Apply the suppression channel to one latent vector or a batch of rows."""
    w = _check_weight(w)
    if sigma <= 0:
        raise DomainError("sigma must be positive")
    z = np.asarray(z, dtype=np.float64)
    if w == 1.0:
        return z.copy()
    rows = z.reshape(1, -1) if z.ndim == 1 else z
    eps = chunked_normal(rows.shape[1], rows.shape[0], 0, rng_seed, "suppress")
    out = w * rows + math.sqrt(1.0 - w * w) * sigma * eps
    return out[0] if z.ndim == 1 else out


@dataclass(frozen=True)
class SuppressedFeaturizer:
    """x -> (z̃_d, z̃_s): exact latent recovery followed by per-group suppression.

    The featurizer knows the true mixing map, so recovery is exact and the
    output distributions match the suppression definition in both domains.
    Noise rows are addressed by absolute sample position (``offset``) on the
    canonical chunk grid, making batched application order-independent.
    """

    mixing: MixingMap
    weights: SuppressionWeights
    sigma_d: float
    sigma_s: float
    p_d: int
    seed: SeedLike

    def __call__(self, x: np.ndarray, offset: int = 0) -> tuple[np.ndarray, np.ndarray]:
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        rows = x.reshape(1, -1) if single else x
        if rows.shape[1] != self.mixing.dim:
            raise ConfigurationError(
                f"input dimension {rows.shape[1]} does not match mixing {self.mixing.dim}"
            )
        z = self.mixing.inverse(rows)
        zd = self._suppress(z[:, : self.p_d], self.weights.w_d, self.sigma_d, "d", offset)
        zs = self._suppress(z[:, self.p_d :], self.weights.w_s, self.sigma_s, "s", offset)
        if single:
            return zd[0], zs[0]
        return zd, zs

    def _suppress(self, z, w, sigma, tag, offset):
        if w == 1.0:
            return z
        eps = chunked_normal(z.shape[1], z.shape[0], offset, self.seed, "noise-" + tag)
        return w * z + math.sqrt(1.0 - w * w) * sigma * eps


def suppressed_featurizer(
    mixing: MixingMap,
    weights: SuppressionWeights,
    spec: GaussianDomainSpec,
    seed: SeedLike,
) -> SuppressedFeaturizer:
    if mixing.dim != spec.dim:
        raise ConfigurationError(
            f"mixing dimension {mixing.dim} does not match spec dimension {spec.dim}"
        )
    return SuppressedFeaturizer(
        mixing=mixing,
        weights=weights,
        sigma_d=spec.sigma_d,
        sigma_s=spec.sigma_s,
        p_d=spec.p_d,
        seed=seed,
    )
