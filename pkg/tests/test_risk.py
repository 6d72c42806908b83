import math

import numpy as np
import pytest

from oracles import F_1_959963985, F_MINUS_1, STD_NORMAL_CDF_TABLE
from conftest import random_spec

from shiftlab.domains import GaussianDomainSpec
from shiftlab.domains import test_spec as make_test_spec
from shiftlab.errors import ConfigurationError, DomainError
from shiftlab.risk import (
    LinearClassifier,
    RiskReport,
    bayes_classifier,
    bayes_risk,
    linear_classifier_risk,
    std_normal_cdf,
)
from shiftlab.suppression import SuppressionWeights


# --- standard normal CDF -----------------------------------------------------


def test_cdf_against_frozen_oracle_table():
    for x, expected in STD_NORMAL_CDF_TABLE:
        assert abs(std_normal_cdf(x) - expected) <= 1e-10


def test_cdf_point_symmetry_and_anchors():
    assert std_normal_cdf(0.0) == 0.5
    assert abs(std_normal_cdf(-1.0) - F_MINUS_1) <= 1e-12
    assert abs(std_normal_cdf(1.959963985) - F_1_959963985) <= 1e-12


def test_cdf_reflection_identity():
    rng = np.random.default_rng(0)
    for x in rng.uniform(-8, 8, 300):
        assert abs(std_normal_cdf(-x) - (1.0 - std_normal_cdf(x))) <= 1e-12


def test_cdf_monotone_and_saturating():
    xs = np.linspace(-45, 45, 901)
    vals = [std_normal_cdf(x) for x in xs]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    assert std_normal_cdf(float("-inf")) == 0.0
    assert std_normal_cdf(float("inf")) == 1.0
    assert std_normal_cdf(-40.0) == 0.0
    assert std_normal_cdf(40.0) == 1.0


def test_cdf_rejects_nan():
    with pytest.raises(DomainError):
        std_normal_cdf(float("nan"))


# --- Bayes classifier --------------------------------------------------------


def test_bayes_classifier_closed_form(basic_spec):
    beta = bayes_classifier(basic_spec, SuppressionWeights(1.0, 1.0))
    assert np.array_equal(beta.beta_d, [2.0, 0.0])
    assert np.array_equal(beta.beta_s, [1.0])
    assert beta.beta_0 == 0.0


def test_bayes_classifier_bias_is_log_odds():
    spec = GaussianDomainSpec(mu_d=[1.0], mu_s=[0.5], eta=0.75)
    beta = bayes_classifier(spec, SuppressionWeights(1.0, 1.0))
    assert beta.beta_0 == pytest.approx(math.log(3.0), abs=1e-15)
    symmetric = GaussianDomainSpec(mu_d=[3.0, -1.0], mu_s=[0.2, 0.2], eta=0.5)
    assert bayes_classifier(symmetric, SuppressionWeights(0.3, 0.9)).beta_0 == 0.0


def test_bayes_classifier_zero_weight_silences_block(basic_spec):
    beta = bayes_classifier(basic_spec, SuppressionWeights(1.0, 0.0))
    assert np.array_equal(beta.beta_s, [0.0])


def test_bayes_classifier_scales_with_sigma():
    spec = GaussianDomainSpec(mu_d=[1.0], mu_s=[0.5], sigma_d=2.0, sigma_s=0.5)
    beta = bayes_classifier(spec, SuppressionWeights(1.0, 1.0))
    assert np.allclose(beta.beta_d, [0.5])
    assert np.allclose(beta.beta_s, [4.0])


# --- linear classifier risk --------------------------------------------------


def test_invariant_rule_risk_is_gamma_free():
    spec = GaussianDomainSpec(mu_d=[1.0], mu_s=[0.5])
    weights = SuppressionWeights(1.0, 0.0)
    beta = bayes_classifier(spec, weights)
    for gamma in (-3.0, -1.0, 0.5, 1.0, 4.0, 10.0):
        risk = linear_classifier_risk(make_test_spec(spec, gamma), weights, beta, "test")
        assert abs(risk - F_MINUS_1) <= 1e-12


def test_gamma_1_train_equals_test_exactly():
    rng = np.random.default_rng(1)
    for _ in range(20):
        spec = random_spec(rng)
        spec = make_test_spec(
            GaussianDomainSpec(
                mu_d=spec.mu_d, mu_s=spec.mu_s, sigma_d=spec.sigma_d,
                sigma_s=spec.sigma_s, eta=spec.eta,
            ),
            1.0,
        )
        weights = SuppressionWeights(rng.uniform(0, 1), rng.uniform(0, 1))
        beta = LinearClassifier(
            rng.normal(size=spec.p_d), rng.normal(size=spec.p_s), rng.normal()
        )
        assert linear_classifier_risk(spec, weights, beta, "train") == linear_classifier_risk(
            spec, weights, beta, "test"
        )
        assert bayes_risk(spec, weights, "train") == bayes_risk(spec, weights, "test")


def test_positive_scaling_leaves_risk_invariant(basic_spec):
    weights = SuppressionWeights(0.8, 0.6)
    beta = LinearClassifier([1.0, -0.5], [0.25], 0.0)
    base = linear_classifier_risk(basic_spec, weights, beta, "train")
    for c in (0.1, 3.0, 1e4):
        scaled = linear_classifier_risk(basic_spec, weights, beta.scaled(c), "train")
        assert abs(scaled - base) <= 1e-12


def test_sign_rule_invariance_on_inputs(basic_spec):
    rng = np.random.default_rng(2)
    beta = LinearClassifier(rng.normal(size=2), rng.normal(size=1), 0.3)
    zd = rng.normal(size=(500, 2))
    zs = rng.normal(size=(500, 1))
    assert np.array_equal(beta.predict(zd, zs), beta.scaled(7.0).predict(zd, zs))


def test_zero_score_predicts_positive():
    beta = LinearClassifier([0.0], [0.0], 0.0)
    assert beta.predict(np.zeros((1, 1)), np.zeros((1, 1)))[0] == 1


def test_constant_classifier_risks():
    spec = GaussianDomainSpec(mu_d=[1.0], mu_s=[0.5], eta=0.3)
    weights = SuppressionWeights(1.0, 1.0)
    positive = LinearClassifier([0.0], [0.0], 2.0)
    negative = LinearClassifier([0.0], [0.0], -2.0)
    assert linear_classifier_risk(spec, weights, positive, "train") == pytest.approx(0.7)
    assert linear_classifier_risk(spec, weights, negative, "test") == pytest.approx(0.3)


def test_dimension_mismatch_rejected(basic_spec):
    beta = LinearClassifier([1.0], [1.0], 0.0)
    with pytest.raises(ConfigurationError):
        linear_classifier_risk(basic_spec, SuppressionWeights(1, 1), beta, "train")
    good = bayes_classifier(basic_spec, SuppressionWeights(1, 1))
    with pytest.raises(ConfigurationError):
        linear_classifier_risk(basic_spec, SuppressionWeights(1, 1), good, "validation")


# --- Bayes risk --------------------------------------------------------------


def test_bayes_risk_consistent_with_linear_risk_at_bayes_rule():
    rng = np.random.default_rng(3)
    for _ in range(100):
        spec = random_spec(rng)
        weights = SuppressionWeights(rng.uniform(0, 1), rng.uniform(0, 1))
        beta = bayes_classifier(spec, weights)
        for domain in ("train", "test"):
            assert abs(
                bayes_risk(spec, weights, domain)
                - linear_classifier_risk(spec, weights, beta, domain)
            ) <= 1e-12


def test_bayes_risk_rotation_invariance():
    rng = np.random.default_rng(4)
    for _ in range(20):
        spec = random_spec(rng)
        q_d, _ = np.linalg.qr(rng.normal(size=(spec.p_d, spec.p_d)))
        q_s, _ = np.linalg.qr(rng.normal(size=(spec.p_s, spec.p_s)))
        rotated = GaussianDomainSpec(
            mu_d=q_d @ spec.mu_d,
            mu_s=q_s @ spec.mu_s,
            sigma_d=spec.sigma_d,
            sigma_s=spec.sigma_s,
            eta=spec.eta,
            gamma=spec.gamma,
        )
        weights = SuppressionWeights(rng.uniform(0, 1), rng.uniform(0, 1))
        for domain in ("train", "test"):
            assert abs(
                bayes_risk(spec, weights, domain) - bayes_risk(rotated, weights, domain)
            ) <= 1e-12


def test_degenerate_weights_fall_back_to_majority_class():
    for eta in (0.2, 0.5, 0.9):
        spec = GaussianDomainSpec(mu_d=[1.0], mu_s=[0.5], eta=eta)
        assert bayes_risk(spec, SuppressionWeights(0.0, 0.0), "train") == min(eta, 1 - eta)
        assert bayes_risk(spec, SuppressionWeights(0.0, 0.0), "test") == min(eta, 1 - eta)


def test_negative_gamma_makes_invariant_featurizer_optimal():
    spec = make_test_spec(GaussianDomainSpec(mu_d=[1.0], mu_s=[0.5]), -1.0)
    grid = [round(0.1 * k, 1) for k in range(11)]
    risks = [bayes_risk(spec, SuppressionWeights(1.0, w), "test") for w in grid]
    assert min(risks) == risks[0]
    assert all(r >= risks[0] for r in risks)


def test_gamma_above_1_rewards_keeping_silent_features():
    spec = make_test_spec(GaussianDomainSpec(mu_d=[1.0], mu_s=[0.5]), 4.0)
    base = bayes_risk(spec, SuppressionWeights(1.0, 0.0), "test")
    for w in (0.1, 0.4, 0.7, 1.0):
        assert bayes_risk(spec, SuppressionWeights(1.0, w), "test") <= base


def test_test_risk_monotone_in_w_s_for_gamma_at_least_1():
    for gamma in (1.0, 2.0, 4.0):
        spec = make_test_spec(GaussianDomainSpec(mu_d=[1.0], mu_s=[0.5]), gamma)
        grid = [0.05 * k for k in range(21)]
        risks = [bayes_risk(spec, SuppressionWeights(1.0, w), "test") for w in grid]
        assert all(b <= a + 1e-15 for a, b in zip(risks, risks[1:]))


def test_riskreport_csv_row():
    report = RiskReport(
        train_risk=0.125, test_risk=0.25, weights=SuppressionWeights(1.0, 0.5),
        gamma=4.0, method="closed_form",
    )
    assert RiskReport.CSV_HEADER == "w_d,w_s,gamma,method,train_risk,test_risk"
    assert report.csv_row() == "1.0,0.5,4.0,closed_form,0.125,0.25"
