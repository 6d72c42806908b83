import numpy as np
import pytest

from shiftlab.domains import GaussianDomainSpec, MixingMap


@pytest.fixture
def basic_spec() -> GaussianDomainSpec:
    return GaussianDomainSpec(mu_d=[1.0, 0.0], mu_s=[0.5], sigma_d=1.0, sigma_s=1.0, eta=0.5)


@pytest.fixture
def identity_mixing(basic_spec) -> MixingMap:
    return MixingMap.identity(basic_spec.dim)


def random_spec(rng: np.random.Generator) -> GaussianDomainSpec:
    """Random well-conditioned spec for property tests."""
    p_d = int(rng.integers(1, 4))
    p_s = int(rng.integers(1, 4))
    return GaussianDomainSpec(
        mu_d=rng.normal(0.0, 1.0, p_d),
        mu_s=rng.normal(0.0, 0.6, p_s),
        sigma_d=float(rng.uniform(0.5, 2.0)),
        sigma_s=float(rng.uniform(0.5, 2.0)),
        eta=float(rng.uniform(0.1, 0.9)),
        gamma=float(rng.uniform(-2.0, 4.0)),
    )
