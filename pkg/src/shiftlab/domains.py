"""Two-group Gaussian domain model and seeded sample generation.

A domain draws a label y ∈ {+1, -1} with P(y=+1) = eta, then a dominant
feature block z_d ~ N(y·mu_d, sigma_d²·I) and a silent feature block
z_s ~ N(y·gamma·mu_s, sigma_s²·I); the observed input is x = f(z_d, z_s)
for an injective mixing map f. The training domain has gamma = 1; shifted
test domains rescale the silent-block mean by gamma.

Sampling is chunked on the canonical grid of :mod:`shiftlab.rng`: chunk c
owns the generator keyed by (seed, "domain", c) and draws, in order, the
label uniforms, the dominant normals, and the silent normals for its rows.
This draw order is part of the determinism contract.
"""

from __future__ import annotations

import dataclasses
import io
import warnings
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import ConfigurationError
from .rng import SeedLike, chunks, generator

SPEC_CONFIG_VERSION = 1


def _frozen_array(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 1:
        raise ConfigurationError(f"{name} must be a non-empty 1-d vector")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class GaussianDomainSpec:
    """Parameters of one domain: means, deviations, label prior and silent scaling."""

    mu_d: np.ndarray
    mu_s: np.ndarray
    sigma_d: float = 1.0
    sigma_s: float = 1.0
    eta: float = 0.5
    gamma: float = 1.0
    silent_norm_bound: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "mu_d", _frozen_array(self.mu_d, "mu_d"))
        object.__setattr__(self, "mu_s", _frozen_array(self.mu_s, "mu_s"))
        if not (self.sigma_d > 0 and self.sigma_s > 0):
            raise ConfigurationError("sigma_d and sigma_s must be positive")
        if not 0.0 < self.eta < 1.0:
            raise ConfigurationError("eta must lie strictly inside (0, 1)")
        if self.silent_norm_bound is not None:
            if self.silent_norm_bound <= 0:
                raise ConfigurationError("silent_norm_bound must be positive")
            if self.silent_mean_sq >= self.silent_norm_bound:
                # Breaks the weak-discriminativity assumption, not any formula.
                warnings.warn(
                    "||mu_s||^2 = %.6g is not below the silent norm bound %.6g"
                    % (self.silent_mean_sq, self.silent_norm_bound),
                    stacklevel=2,
                )

    def __eq__(self, other) -> bool:
        if not isinstance(other, GaussianDomainSpec):
            return NotImplemented
        return (
            np.array_equal(self.mu_d, other.mu_d)
            and np.array_equal(self.mu_s, other.mu_s)
            and self.sigma_d == other.sigma_d
            and self.sigma_s == other.sigma_s
            and self.eta == other.eta
            and self.gamma == other.gamma
            and self.silent_norm_bound == other.silent_norm_bound
        )

    @property
    def p_d(self) -> int:
        return self.mu_d.size

    @property
    def p_s(self) -> int:
        return self.mu_s.size

    @property
    def dim(self) -> int:
        return self.p_d + self.p_s

    @property
    def dominant_mean_sq(self) -> float:
        return float(self.mu_d @ self.mu_d)

    @property
    def silent_mean_sq(self) -> float:
        return float(self.mu_s @ self.mu_s)


def test_spec(train: GaussianDomainSpec, gamma: float) -> GaussianDomainSpec:
    """Shifted copy of a training spec: only the silent scaling changes."""
    if train.gamma != 1.0:
        raise ConfigurationError("test_spec expects a training spec with gamma = 1")
    return dataclasses.replace(train, gamma=float(gamma))


@dataclass(frozen=True)
class MixingMap:
    """Injective map from latents to observed inputs, realized as an orthogonal matrix."""

    kind: str
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ConfigurationError("mixing matrix must be square")
        if np.abs(m.T @ m - np.eye(m.shape[0])).max() > 1e-9:
            raise ConfigurationError("mixing matrix is not orthogonal within 1e-9")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def identity(cls, dim: int) -> "MixingMap":
        return cls("identity", np.eye(dim))

    @classmethod
    def seeded_orthogonal(cls, dim: int, seed: SeedLike) -> "MixingMap":
        """QR factor of a seeded Gaussian matrix, sign-fixed to make Q unique."""
        g = generator(seed, "mixing")
        q, r = np.linalg.qr(g.standard_normal((dim, dim)))
        q = q * np.sign(np.diag(r))
        return cls("seeded-orthogonal", q)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def forward(self, z: np.ndarray) -> np.ndarray:
        """x = f(z); rows are samples. Identity kind short-circuits for bitwise exactness."""
        if self.kind == "identity":
            return np.array(z, dtype=np.float64, copy=True)
        return z @ self.matrix.T

    def inverse(self, x: np.ndarray) -> np.ndarray:
        """Recover latents by the transpose (exact inverse up to roundoff)."""
        if self.kind == "identity":
            return np.array(x, dtype=np.float64, copy=True)
        return x @ self.matrix


@dataclass(frozen=True)
class LabeledSample:
    x: np.ndarray
    y: int
    latent: tuple[np.ndarray, np.ndarray] | None = None


@dataclass(frozen=True)
class Dataset:
    """Immutable seeded sample batch with optional ground-truth latents."""

    x: np.ndarray
    y: np.ndarray
    z_d: np.ndarray | None
    z_s: np.ndarray | None
    spec: GaussianDomainSpec
    mixing: MixingMap
    seed: SeedLike

    def __len__(self) -> int:
        return self.x.shape[0]

    def __getitem__(self, i: int) -> LabeledSample:
        latent = None
        if self.z_d is not None:
            latent = (self.z_d[i], self.z_s[i])
        return LabeledSample(self.x[i], int(self.y[i]), latent)

    @property
    def samples(self) -> Iterator[LabeledSample]:
        return (self[i] for i in range(len(self)))

    def to_csv(self, include_latents: bool = True) -> str:
        """Rows ``y,x_0,...,x_{p-1}[,zd_0,...,zs_0,...]`` with round-trip floats."""
        with_latents = include_latents and self.z_d is not None
        cols = ["y"] + [f"x_{j}" for j in range(self.x.shape[1])]
        if with_latents:
            cols += [f"zd_{j}" for j in range(self.z_d.shape[1])]
            cols += [f"zs_{j}" for j in range(self.z_s.shape[1])]
        buf = io.StringIO()
        buf.write(",".join(cols) + "\n")
        for i in range(len(self)):
            parts = [str(int(self.y[i]))]
            parts += [repr(float(v)) for v in self.x[i]]
            if with_latents:
                parts += [repr(float(v)) for v in self.z_d[i]]
                parts += [repr(float(v)) for v in self.z_s[i]]
            buf.write(",".join(parts) + "\n")
        return buf.getvalue()


def sample_domain(
    spec: GaussianDomainSpec,
    mixing: MixingMap,
    n: int,
    seed: SeedLike,
    keep_latents: bool = True,
) -> Dataset:
    """Draw n labeled samples from the domain described by ``spec``."""
    if n < 1:
        raise ConfigurationError("n must be at least 1")
    if mixing.dim != spec.dim:
        raise ConfigurationError(
            f"mixing dimension {mixing.dim} does not match spec dimension {spec.dim}"
        )
    y = np.empty(n, dtype=np.int64)
    z_d = np.empty((n, spec.p_d), dtype=np.float64)
    z_s = np.empty((n, spec.p_s), dtype=np.float64)
    for lo, hi, c in chunks(n):
        g = generator(seed, "domain", c)
        m = hi - lo
        u = g.random(m)
        yc = np.where(u < spec.eta, 1, -1)
        y[lo:hi] = yc
        yf = yc.astype(np.float64)[:, None]
        z_d[lo:hi] = yf * spec.mu_d + spec.sigma_d * g.standard_normal((m, spec.p_d))
        z_s[lo:hi] = (spec.gamma * yf) * spec.mu_s + spec.sigma_s * g.standard_normal(
            (m, spec.p_s)
        )
    x = mixing.forward(np.hstack([z_d, z_s]))
    for arr in (x, y, z_d, z_s):
        arr.setflags(write=False)
    return Dataset(
        x=x,
        y=y,
        z_d=z_d if keep_latents else None,
        z_s=z_s if keep_latents else None,
        spec=spec,
        mixing=mixing,
        seed=seed,
    )


def split_latents(spec: GaussianDomainSpec, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split a latent row/batch into (dominant, silent) blocks."""
    return z[..., : spec.p_d], z[..., spec.p_d :]


def spec_to_config(spec: GaussianDomainSpec, section: str = "domain") -> str:
    """Serialize a spec to the versioned plain-text key-value block."""
    lines = [f"[{section}]", f"version = {SPEC_CONFIG_VERSION}"]
    lines.append("mu_d = " + " ".join(repr(float(v)) for v in spec.mu_d))
    lines.append("mu_s = " + " ".join(repr(float(v)) for v in spec.mu_s))
    lines.append(f"sigma_d = {spec.sigma_d!r}")
    lines.append(f"sigma_s = {spec.sigma_s!r}")
    lines.append(f"eta = {spec.eta!r}")
    lines.append(f"gamma = {spec.gamma!r}")
    if spec.silent_norm_bound is not None:
        lines.append(f"silent_norm_bound = {spec.silent_norm_bound!r}")
    return "\n".join(lines) + "\n"


def spec_from_config(text: str, section: str = "domain") -> GaussianDomainSpec:
    """Parse the block produced by :func:`spec_to_config`."""
    import configparser

    parser = configparser.ConfigParser()
    parser.read_string(text)
    if section not in parser:
        raise ConfigurationError(f"missing [{section}] section in spec config")
    sec = parser[section]
    version = sec.getint("version", fallback=None)
    if version != SPEC_CONFIG_VERSION:
        raise ConfigurationError(f"unsupported spec config version: {version}")
    try:
        bound = sec.get("silent_norm_bound", fallback=None)
        return GaussianDomainSpec(
            mu_d=[float(v) for v in sec["mu_d"].split()],
            mu_s=[float(v) for v in sec["mu_s"].split()],
            sigma_d=float(sec["sigma_d"]),
            sigma_s=float(sec["sigma_s"]),
            eta=float(sec["eta"]),
            gamma=float(sec.get("gamma", "1.0")),
            silent_norm_bound=float(bound) if bound is not None else None,
        )
    except KeyError as exc:
        raise ConfigurationError(f"spec config missing key: {exc}") from exc


def mixing_for(spec: GaussianDomainSpec, kind: str, seed: SeedLike = 0) -> MixingMap:
    """Build a mixing map matching the spec's dimension."""
    if kind == "identity":
        return MixingMap.identity(spec.dim)
    if kind == "seeded-orthogonal":
        return MixingMap.seeded_orthogonal(spec.dim, seed)
    raise ConfigurationError(f"unknown mixing kind: {kind!r}")
