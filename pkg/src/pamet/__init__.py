"""Prediction advantage: model risk measured against the best label-marginal-only predictor."""

__version__ = "0.1.0"

from .confusion import (
    ConfusionCells,
    DominationReport,
    MetricPanel,
    canonicalize,
    cells_from_counts,
    check_domination,
    panel,
)
from .core import (
    BmpSolution,
    DegenerateBMPError,
    LabelDistribution,
    LossSpec,
    MetricError,
    PaResult,
    PredictionSet,
    ShapeMismatchError,
    bmp_absolute,
    bmp_cost_sensitive,
    bmp_cross_entropy,
    bmp_squared,
    bmp_zero_one,
    empirical_risk,
    estimate_marginal,
    hoeffding_interval,
    prediction_advantage,
)
from .evaluation import EvaluationReport, RegressionMoments, evaluate
from .synthesis import (
    DegradationConfig,
    LabeledSample,
    NoisyOraclePredictor,
    SweepGrid,
    inflate_imbalance,
    inject_label_noise,
    run_sweep,
    zero_crossing,
)
