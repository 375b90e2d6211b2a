"""Worked examples with known PA values: the multiple-choice exam, the 1% minority intern
classifier and published Haberman error rates."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import LabelDistribution, LossSpec, PredictionSet, bmp_zero_one, prediction_advantage
from .evaluation import EvaluationReport, evaluate

HABERMAN_N = 306
HABERMAN_MINORITY_COUNT = 81
# minority proportion as quoted (26.47%), i.e. the trivial 0/1 error
HABERMAN_BMP_RISK = 0.2647
FIXTURE_TOLERANCE = 0.005


@dataclass(frozen=True)
class HabermanFixture:
    name: str
    error: float
    expected_pa: float | None  # None: only the sign (negative) is quoted

    def computed_pa(self, bmp_risk: float = HABERMAN_BMP_RISK) -> float:
        return prediction_advantage(self.error, bmp_risk).pa

    def passes(self, bmp_risk: float = HABERMAN_BMP_RISK, tol: float = FIXTURE_TOLERANCE) -> bool:
        pa = self.computed_pa(bmp_risk)
        if self.expected_pa is None:
            return pa < 0
        return abs(pa - self.expected_pa) <= tol


HABERMAN_FIXTURES = (
    HabermanFixture("svm-reject-option", 0.27, -0.02),
    HabermanFixture("error-0.30", 0.30, -0.13),
    HabermanFixture("error-0.273", 0.273, -0.0313),
    HabermanFixture("error-0.2742", 0.2742, None),
    HabermanFixture("accuracy-73.4", 0.266, None),
    HabermanFixture("accuracy-71.7", 0.283, None),
)


def haberman_labels() -> np.ndarray:
    """A label column with Haberman's class counts (81 of 306 in the minority)."""
    labels = np.zeros(HABERMAN_N, dtype=np.int64)
    labels[:HABERMAN_MINORITY_COUNT] = 1
    return labels


@dataclass(frozen=True)
class ExamResult:
    student: str
    options: int
    loss: Fraction
    bmp_risk: Fraction
    pa: Fraction
    bmp_risk_float: float


def exam_results(grade: Fraction = Fraction(60, 100)) -> tuple[ExamResult, ExamResult]:
    """Bob answers a 3-option exam, Alice a 4-option one; both score ``grade``.

    A constant answer is right with probability 1/options, so the BMP risk is
    ``1 - 1/options``. The float BMP from :func:`bmp_zero_one` is carried
    alongside the exact value as a cross-check.
    """
    out = []
    for student, options in (("Bob", 3), ("Alice", 4)):
        loss = 1 - grade
        bmp_exact = 1 - Fraction(1, options)
        bmp_float = bmp_zero_one(LabelDistribution((1 / options,) * options)).bmp_risk
        pa = prediction_advantage(loss, bmp_exact).pa
        out.append(ExamResult(student, options, loss, bmp_exact, pa, bmp_float))
    return tuple(out)


def intern_predictions(n: int = 100) -> PredictionSet:
    """1% minority; the classifier misses every positive and raises twice as many false alarms.

    ``n`` must be a multiple of 100. Accuracy is 97% against a 99% baseline.
    """
    m = n // 100
    if m < 1 or m * 100 != n:
        raise ValueError("n must be a positive multiple of 100")
    y_true = np.zeros(n, dtype=np.int64)
    y_true[:m] = 1
    y_pred = np.zeros(n, dtype=np.int64)
    y_pred[m:3 * m] = 1
    return PredictionSet(y_true, y_pred)


def intern_report() -> EvaluationReport:
    return evaluate(intern_predictions(), LossSpec("zero_one"))
