import json
import math

import numpy as np
import pytest

from pamet.core import DegenerateBMPError, LabelDistribution, LossSpec, MetricError, PredictionSet
from pamet.evaluation import (
    FROM_EVAL_LABELS,
    SUPPLIED_DISTRIBUTION,
    SUPPLIED_MOMENTS,
    EvaluationReport,
    RegressionMoments,
    evaluate,
)
from pamet.fixtures import HABERMAN_MINORITY_COUNT, HABERMAN_N, haberman_labels, intern_report


def proportioned_predictions(n, n_minority, n_errors):
    """Minority rows first; errors are false alarms on majority rows."""
    y = np.zeros(n, dtype=int)
    y[:n_minority] = 1
    pred = y.copy()
    pred[n_minority:n_minority + n_errors] = 1
    return PredictionSet(y, pred)


def test_haberman_error_0273():
    # Haberman's 26.47% minority at n = 10000 so that a 0.273 error is an integer count
    report = evaluate(proportioned_predictions(10_000, 2647, 2730), LossSpec())
    assert report.model_risk == pytest.approx(0.273, abs=1e-15)
    assert report.bmp.bmp_risk == pytest.approx(0.2647, abs=1e-15)
    assert report.pa.pa == pytest.approx(-0.0313, abs=5e-4)
    assert report.marginal_source == FROM_EVAL_LABELS


def test_haberman_counts():
    y = haberman_labels()
    report = evaluate(PredictionSet(y, np.zeros_like(y)), LossSpec())
    assert report.bmp.bmp_risk == pytest.approx(HABERMAN_MINORITY_COUNT / HABERMAN_N)
    assert report.pa.pa == 0.0


def test_supplied_prior():
    report = evaluate(
        proportioned_predictions(1000, 300, 273), LossSpec(), marginal=LabelDistribution((0.7353, 0.2647))
    )
    assert report.marginal_source == SUPPLIED_DISTRIBUTION
    assert report.bmp.bmp_risk == pytest.approx(0.2647, abs=1e-12)
    assert report.pa.pa == pytest.approx(1 - 0.273 / 0.2647, abs=1e-12)


def test_intern():
    report = intern_report()
    assert report.pa.pa == -2.0
    assert report.metrics.accuracy == pytest.approx(0.97, abs=1e-12)
    assert report.bmp.bmp_risk == pytest.approx(0.01)


@pytest.mark.parametrize(
    "loss, y, pred",
    [
        (LossSpec(), [0, 1, 1, 0, 2], [0, 1, 1, 0, 2]),
        (LossSpec("cross_entropy"), [0, 1, 1], np.eye(2)[[0, 1, 1]]),
        (LossSpec("squared"), [1.0, 2.5, -3.0], [1.0, 2.5, -3.0]),
        (LossSpec("absolute"), [1.0, 2.5, -3.0], [1.0, 2.5, -3.0]),
        (LossSpec("cost_sensitive", ((0, 2), (3, 0))), [0, 1, 0], [0, 1, 0]),
    ],
)
def test_perfect_predictor(loss, y, pred):
    report = evaluate(PredictionSet(np.asarray(y), np.asarray(pred)), loss)
    assert report.pa.pa == 1.0
    assert not report.trivial_problem


def test_majority_predictor_zero_pa():
    y = np.array([0] * 7 + [1] * 3)
    report = evaluate(PredictionSet(y, np.zeros(10, dtype=int)), LossSpec())
    assert report.pa.pa == 0.0
    assert report.metrics.pa == 0.0
    assert report.metrics.f1 == 0.0


def test_cross_entropy_marginal_predictor_zero_pa():
    y = np.array([0, 0, 0, 1])
    probs = np.tile([0.75, 0.25], (4, 1))
    report = evaluate(PredictionSet(y, probs), LossSpec("cross_entropy"))
    assert report.pa.pa == pytest.approx(0.0, abs=1e-12)
    assert report.bmp.bmp_risk == pytest.approx(0.5623351446188083, abs=1e-12)


def test_cross_entropy_zero_probability_infinite():
    y = np.array([0, 1])
    probs = np.array([[0.5, 0.5], [1.0, 0.0]])
    report = evaluate(PredictionSet(y, probs), LossSpec("cross_entropy"))
    assert report.model_risk == math.inf
    assert report.pa.pa == -math.inf
    clamped = evaluate(PredictionSet(y, probs), LossSpec("cross_entropy", epsilon_clamp=1e-12))
    assert math.isfinite(clamped.pa.pa)


def test_degenerate_labels():
    y = np.zeros(5, dtype=int)
    pred = y.copy()
    pred[0] = 1
    with pytest.raises(DegenerateBMPError):
        evaluate(PredictionSet(y, pred, k=2), LossSpec())


def test_trivial_problem_flag():
    y = np.full(4, 3.0)
    report = evaluate(PredictionSet(y, y), LossSpec("squared"))
    assert report.pa.pa == 1.0 and report.trivial_problem


def test_regression_moments():
    y = np.array([1.0, 2.0, 3.0, 4.0, 10.0])
    pred = y + 1
    report = evaluate(PredictionSet(y, pred), LossSpec("squared"), RegressionMoments(mean=4.0, variance=10.0))
    assert report.marginal_source == SUPPLIED_MOMENTS
    assert report.pa.pa == pytest.approx(0.9)
    report = evaluate(PredictionSet(y, pred), LossSpec("absolute"), RegressionMoments(median=3.0, mad=2.2))
    assert report.pa.pa == pytest.approx(1 - 1 / 2.2)
    with pytest.raises(MetricError):
        evaluate(PredictionSet(y, pred), LossSpec("absolute"), RegressionMoments(mean=4.0, variance=10.0))


def test_supplied_marginal_class_count_mismatch():
    with pytest.raises(MetricError):
        evaluate(PredictionSet([0, 1], [0, 1]), LossSpec(), LabelDistribution((0.2, 0.3, 0.5)))


def test_multiclass_has_no_binary_block():
    report = evaluate(PredictionSet([0, 1, 2, 2], [0, 1, 2, 1]), LossSpec())
    assert report.cells is None and report.metrics is None
    assert report.pa.pa == pytest.approx(1 - 0.25 / 0.5)


def test_binary_block_cross_module():
    rng = np.random.default_rng(1)
    y = (rng.random(500) < 0.3).astype(int)
    pred = np.where(rng.random(500) < 0.8, y, 1 - y)
    report = evaluate(PredictionSet(y, pred), LossSpec())
    assert report.metrics.pa == pytest.approx(report.pa.pa, abs=1e-12)
    assert report.metrics.accuracy == pytest.approx(1 - report.model_risk, abs=1e-12)


def test_hoeffding_interval_in_report():
    y = np.array([0] * 70 + [1] * 30)
    pred = y.copy()
    pred[:10] = 1
    report = evaluate(PredictionSet(y, pred), LossSpec(), confidence=0.95)
    lo, hi = report.risk_interval
    # lower end clipped at 0
    assert lo == 0.0
    assert hi - report.model_risk == pytest.approx(math.sqrt(math.log(40) / 200), abs=1e-12)
    assert report.pa_interval[0] <= report.pa.pa <= report.pa_interval[1]
    with pytest.raises(MetricError, match="loss range required"):
        evaluate(PredictionSet([1.0, 2.0], [1.5, 2.0]), LossSpec("squared"), confidence=0.9)
    ok = evaluate(PredictionSet([1.0, 2.0], [1.5, 2.0]), LossSpec("squared"), confidence=0.9, declared_loss_range=4.0)
    assert ok.risk_interval[1] <= 4.0


@pytest.mark.parametrize(
    "preds, loss",
    [
        (PredictionSet([0, 1, 1, 0], [0, 1, 0, 0]), LossSpec()),
        (PredictionSet([0, 1, 2], np.array([[0.2, 0.5, 0.3], [0.1, 0.8, 0.1], [0.3, 0.3, 0.4]])), LossSpec("cross_entropy", log_base=2, epsilon_clamp=1e-9)),
        (PredictionSet([0.5, 1.5, 4.0], [0.0, 2.0, 3.0]), LossSpec("squared")),
        (PredictionSet([0, 1, 1], [1, 1, 0]), LossSpec("cost_sensitive", ((0, 1), (4, 0)))),
    ],
)
def test_report_dict_round_trip(preds, loss):
    report = evaluate(preds, loss, confidence=0.9 if loss.kind != "squared" else None)
    again = EvaluationReport.from_dict(json.loads(json.dumps(report.to_dict())))
    assert again == report
