"""End-to-end evaluation: model risk, marginal baseline, PA and (for binary 0/1) rival metrics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .confusion import ConfusionCells, MetricPanel, cells_from_counts, panel
from .core import (
    BmpSolution,
    LabelDistribution,
    LossSpec,
    MetricError,
    PaResult,
    PredictionSet,
    bmp_absolute,
    bmp_for_distribution,
    bmp_squared,
    estimate_marginal,
    hoeffding_interval,
    loss_range,
    prediction_advantage,
)

FROM_EVAL_LABELS = "eval_labels"
SUPPLIED_DISTRIBUTION = "supplied_distribution"
SUPPLIED_MOMENTS = "supplied_moments"


@dataclass(frozen=True)
class RegressionMoments:
    """Externally estimated regression baseline (e.g. from training data).

    Squared loss needs ``mean`` and ``variance``; absolute loss needs
    ``median`` and ``mad`` (mean absolute deviation around the median).
    """

    mean: float | None = None
    variance: float | None = None
    median: float | None = None
    mad: float | None = None

    def bmp(self, loss: LossSpec) -> BmpSolution:
        if loss.kind == "squared":
            center, risk = self.mean, self.variance
        elif loss.kind == "absolute":
            center, risk = self.median, self.mad
        else:
            raise MetricError("regression moments only apply to squared/absolute loss")
        if center is None or risk is None or risk < 0:
            names = "mean/variance" if loss.kind == "squared" else "median/mad"
            raise MetricError(f"{loss.kind} loss needs nonnegative {names} moments")
        return BmpSolution(float(center), float(risk))


@dataclass(frozen=True)
class EvaluationReport:
    loss: LossSpec
    n: int
    model_risk: float
    bmp: BmpSolution
    pa: PaResult
    marginal_source: str
    marginal: tuple[float, ...] | None = None
    cells: ConfusionCells | None = None
    metrics: MetricPanel | None = None
    confidence: float | None = None
    risk_interval: tuple[float, float] | None = None
    pa_interval: tuple[float, float] | None = None

    @property
    def trivial_problem(self) -> bool:
        return self.pa.trivial_problem

    def to_dict(self) -> dict:
        bmp_pred = self.bmp.constant_prediction
        return {
            "loss": {
                "kind": self.loss.kind,
                "cost_matrix": [list(r) for r in self.loss.cost_matrix]
                if self.loss.cost_matrix is not None
                else None,
                "log_base": self.loss.log_base,
                "epsilon_clamp": self.loss.epsilon_clamp,
            },
            "n": self.n,
            "model_risk": self.model_risk,
            "bmp": {
                "constant_prediction": list(bmp_pred) if isinstance(bmp_pred, tuple) else bmp_pred,
                "bmp_risk": self.bmp.bmp_risk,
            },
            "pa": self.pa.pa,
            "trivial_problem": self.pa.trivial_problem,
            "marginal_source": self.marginal_source,
            "marginal": list(self.marginal) if self.marginal is not None else None,
            "cells": None
            if self.cells is None
            else {
                "a": self.cells.a,
                "b": self.cells.b,
                "c": self.cells.c,
                "d": self.cells.d,
                "swapped": self.cells.swapped,
            },
            "metrics": self.metrics.to_dict() if self.metrics is not None else None,
            "confidence": self.confidence,
            "risk_interval": list(self.risk_interval) if self.risk_interval else None,
            "pa_interval": list(self.pa_interval) if self.pa_interval else None,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EvaluationReport":
        ld = data["loss"]
        loss = LossSpec(
            kind=ld["kind"],
            cost_matrix=ld["cost_matrix"],
            log_base=ld["log_base"],
            epsilon_clamp=ld["epsilon_clamp"],
        )
        bmp_pred = data["bmp"]["constant_prediction"]
        if isinstance(bmp_pred, list):
            bmp_pred = tuple(bmp_pred)
        bmp = BmpSolution(bmp_pred, data["bmp"]["bmp_risk"])
        pa = PaResult(data["model_risk"], bmp.bmp_risk, data["pa"], data["trivial_problem"])
        cells = ConfusionCells(**data["cells"]) if data["cells"] is not None else None
        metrics = MetricPanel.from_dict(data["metrics"]) if data["metrics"] is not None else None
        return cls(
            loss=loss,
            n=data["n"],
            model_risk=data["model_risk"],
            bmp=bmp,
            pa=pa,
            marginal_source=data["marginal_source"],
            marginal=tuple(data["marginal"]) if data["marginal"] is not None else None,
            cells=cells,
            metrics=metrics,
            confidence=data["confidence"],
            risk_interval=tuple(data["risk_interval"]) if data["risk_interval"] else None,
            pa_interval=tuple(data["pa_interval"]) if data["pa_interval"] else None,
        )


def _constant_losses(loss: LossSpec, y_true: np.ndarray, constant, k: int) -> np.ndarray:
    n = len(y_true)
    if loss.payload == "probs":
        pred = np.broadcast_to(np.asarray(constant, dtype=float), (n, k))
    elif loss.payload == "label":
        pred = np.full(n, int(constant))
    else:
        pred = np.full(n, float(constant))
    return loss.losses(y_true, pred)


def evaluate(
    preds: PredictionSet,
    loss: LossSpec,
    marginal: LabelDistribution | RegressionMoments | None = None,
    confidence: float | None = None,
    declared_loss_range: float | None = None,
) -> EvaluationReport:
    """Evaluate predictions against their marginal baseline.

    With ``marginal=None`` the baseline is estimated from the evaluation
    sample's own labels. In that case both risks are sums over the same
    records, and PA is formed from the loss totals so exact counts stay
    exact (e.g. 3 errors against a 1-error baseline gives exactly -2).
    """
    y_true, y_pred = preds.checked_arrays(loss)
    losses = loss.losses(y_true, y_pred)
    model_total = float(np.sum(losses))
    model_risk = float(np.mean(losses))
    k = preds.num_classes(loss) if loss.is_classification else 0
    dist = None

    if marginal is None:
        source = FROM_EVAL_LABELS
        if loss.is_classification:
            dist = estimate_marginal(y_true, k)
            bmp = bmp_for_distribution(loss, dist)
            base = _constant_losses(loss, y_true, bmp.constant_prediction, k)
            bmp = BmpSolution(bmp.constant_prediction, float(np.mean(base)))
            bmp_total = float(np.sum(base))
        else:
            bmp = bmp_squared(y_true) if loss.kind == "squared" else bmp_absolute(y_true)
            base = _constant_losses(loss, y_true, bmp.constant_prediction, k)
            bmp_total = float(np.sum(base))
        pa = prediction_advantage(model_total, bmp_total)
        pa = PaResult(model_risk, bmp.bmp_risk, pa.pa, pa.trivial_problem)
    elif isinstance(marginal, LabelDistribution):
        if not loss.is_classification:
            raise MetricError("a label distribution only applies to classification losses")
        if marginal.k != k:
            raise MetricError(f"supplied marginal has {marginal.k} classes, predictions have {k}")
        source = SUPPLIED_DISTRIBUTION
        dist = marginal
        bmp = bmp_for_distribution(loss, dist)
        pa = prediction_advantage(model_risk, bmp.bmp_risk)
    elif isinstance(marginal, RegressionMoments):
        if loss.is_classification:
            raise MetricError("regression moments only apply to squared/absolute loss")
        source = SUPPLIED_MOMENTS
        bmp = marginal.bmp(loss)
        pa = prediction_advantage(model_risk, bmp.bmp_risk)
    else:
        raise MetricError(f"unsupported marginal source {type(marginal).__name__}")

    cells = metrics = None
    if loss.kind == "zero_one" and k == 2:
        pos_pred, pos_true = y_pred == 1, y_true == 1
        cells = cells_from_counts(
            int(np.sum(pos_pred & pos_true)),
            int(np.sum(pos_pred & ~pos_true)),
            int(np.sum(~pos_pred & pos_true)),
            int(np.sum(~pos_pred & ~pos_true)),
        )
        metrics = panel(cells)

    risk_interval = pa_interval = None
    if confidence is not None:
        width = loss_range(loss, declared_loss_range)
        risk_interval = hoeffding_interval(model_risk, preds.n, width, confidence)
        if bmp.bmp_risk > 0:
            lo, hi = risk_interval
            pa_interval = (1 - hi / bmp.bmp_risk, 1 - lo / bmp.bmp_risk)

    return EvaluationReport(
        loss=loss,
        n=preds.n,
        model_risk=model_risk,
        bmp=bmp,
        pa=pa,
        marginal_source=source,
        marginal=dist.probs if dist is not None else None,
        cells=cells,
        metrics=metrics,
        confidence=confidence,
        risk_interval=risk_interval,
        pa_interval=pa_interval,
    )

