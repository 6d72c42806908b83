"""shiftlab: risk analysis of two-group Gaussian models under silent-feature shift.

Core pieces: seeded domain sampling (:mod:`shiftlab.domains`), the
variance-preserving suppression channel (:mod:`shiftlab.suppression`),
closed-form Bayes and linear-rule risks (:mod:`shiftlab.risk`), Monte-Carlo
oracles (:mod:`shiftlab.montecarlo`), probe/fine-tune training with optional
dense weight averaging (:mod:`shiftlab.training`, :mod:`shiftlab.swad`), and
reproducible experiment protocols (:mod:`shiftlab.experiments`). The
:mod:`shiftlab.service` subpackage exposes everything over HTTP; the CLI in
:mod:`shiftlab.cli` is a thin client of the same handlers.
"""

__version__ = "0.1.0"

from .domains import (
    Dataset,
    GaussianDomainSpec,
    LabeledSample,
    MixingMap,
    sample_domain,
    test_spec,
)
from .errors import (
    ConfigurationError,
    ContractError,
    DomainError,
    ProtocolError,
    ShiftLabError,
    TrainingDivergedError,
)
from .montecarlo import RiskEstimate, mc_model_risk, mc_risk
from .risk import (
    LinearClassifier,
    RiskReport,
    bayes_classifier,
    bayes_risk,
    linear_classifier_risk,
    std_normal_cdf,
)
from .suppression import SuppressionWeights, suppress_latents, suppressed_featurizer
from .swad import SwadConfig, SwadState, schedule
from .training import (
    PretrainKind,
    TrainConfig,
    TrainTrace,
    TwoStageModel,
    effective_rule,
    feature_distortion,
    init_pretrained,
    train,
)

__all__ = [
    "__version__",
    "Dataset",
    "GaussianDomainSpec",
    "LabeledSample",
    "MixingMap",
    "sample_domain",
    "test_spec",
    "ConfigurationError",
    "ContractError",
    "DomainError",
    "ProtocolError",
    "ShiftLabError",
    "TrainingDivergedError",
    "RiskEstimate",
    "mc_model_risk",
    "mc_risk",
    "LinearClassifier",
    "RiskReport",
    "bayes_classifier",
    "bayes_risk",
    "linear_classifier_risk",
    "std_normal_cdf",
    "SuppressionWeights",
    "suppress_latents",
    "suppressed_featurizer",
    "SwadConfig",
    "SwadState",
    "schedule",
    "PretrainKind",
    "TrainConfig",
    "TrainTrace",
    "TwoStageModel",
    "effective_rule",
    "feature_distortion",
    "init_pretrained",
    "train",
]
