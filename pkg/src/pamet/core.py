"""Losses, Bayesian marginal predictions (BMP), empirical risk and the prediction advantage.

The BMP of a loss is the best prediction that only knows the label marginal
``P(Y)``. Its risk is the baseline every model has to beat; the prediction
advantage (PA) is ``1 - model_risk / bmp_risk``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real
from typing import Sequence

import numpy as np

LOSS_KINDS = ("zero_one", "cross_entropy", "squared", "absolute", "cost_sensitive")
CLASSIFICATION_KINDS = ("zero_one", "cross_entropy", "cost_sensitive")
REGRESSION_KINDS = ("squared", "absolute")

SIMPLEX_TOL = 1e-9
PROBA_TOL = 1e-6
DEFAULT_EPSILON_CLAMP = 1e-12


class MetricError(ValueError):
    """Base class for invalid metric inputs."""


class ShapeMismatchError(MetricError):
    """Prediction payloads do not match the requested loss."""


class DegenerateBMPError(MetricError):
    """The labels admit a zero-risk constant predictor, so PA is undefined."""


@dataclass(frozen=True)
class LabelDistribution:
    """Discrete label marginal over ``k >= 2`` classes."""

    probs: tuple[float, ...]
    class_ids: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        probs = tuple(float(p) for p in self.probs)
        class_ids = tuple(self.class_ids) if self.class_ids else tuple(range(len(probs)))
        if len(probs) < 2:
            raise MetricError("a label distribution needs at least 2 classes")
        if len(class_ids) != len(probs):
            raise MetricError(
                f"{len(class_ids)} class ids declared for {len(probs)} probabilities"
            )
        if len(set(class_ids)) != len(class_ids):
            raise MetricError("class ids must be distinct")
        if any(not math.isfinite(p) or p < 0 for p in probs):
            raise MetricError(f"probabilities must be finite and nonnegative: {probs}")
        if abs(math.fsum(probs) - 1.0) > SIMPLEX_TOL:
            raise MetricError(f"probabilities sum to {math.fsum(probs)!r}, not 1")
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "class_ids", class_ids)

    @property
    def k(self) -> int:
        return len(self.probs)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.probs, dtype=float)


@dataclass(frozen=True)
class LossSpec:
    """Tagged loss family.

    ``cost_matrix[i][j]`` is the cost of predicting class ``i`` when the truth
    is ``j``. ``epsilon_clamp`` only affects cross-entropy: when set, predicted
    probabilities are clamped to ``[epsilon_clamp, 1]`` before taking logs.
    """

    kind: str = "zero_one"
    cost_matrix: tuple[tuple[float, ...], ...] | None = None
    log_base: float = math.e
    epsilon_clamp: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in LOSS_KINDS:
            raise MetricError(f"unknown loss kind {self.kind!r}; expected one of {LOSS_KINDS}")
        if (self.cost_matrix is not None) != (self.kind == "cost_sensitive"):
            raise MetricError("a cost matrix is required iff kind == 'cost_sensitive'")
        if self.cost_matrix is not None:
            matrix = tuple(tuple(float(v) for v in row) for row in self.cost_matrix)
            k = len(matrix)
            if k < 2 or any(len(row) != k for row in matrix):
                raise MetricError("cost matrix must be square with k >= 2")
            if any(not math.isfinite(v) or v < 0 for row in matrix for v in row):
                raise MetricError("cost matrix entries must be finite and nonnegative")
            object.__setattr__(self, "cost_matrix", matrix)
        if not (self.log_base > 0 and self.log_base != 1 and math.isfinite(self.log_base)):
            raise MetricError(f"log_base must be positive and != 1, got {self.log_base!r}")
        if self.epsilon_clamp is not None and not 0 < self.epsilon_clamp < 1:
            raise MetricError("epsilon_clamp must lie in (0, 1)")

    @property
    def is_classification(self) -> bool:
        return self.kind in CLASSIFICATION_KINDS

    @property
    def payload(self) -> str:
        """Prediction payload type: ``label``, ``probs`` or ``real``."""
        if self.kind == "cross_entropy":
            return "probs"
        if self.kind in REGRESSION_KINDS:
            return "real"
        return "label"

    def cost_array(self) -> np.ndarray:
        if self.cost_matrix is None:
            raise MetricError("loss has no cost matrix")
        return np.asarray(self.cost_matrix, dtype=float)

    def losses(self, y_true: np.ndarray, y_pred: np.ndarray) -> np.ndarray:
        """Per-record losses for already shape-checked arrays."""
        if self.kind == "zero_one":
            return (y_true != y_pred).astype(float)
        if self.kind == "cost_sensitive":
            return self.cost_array()[y_pred, y_true]
        if self.kind == "squared":
            return (y_pred - y_true) ** 2
        if self.kind == "absolute":
            return np.abs(y_pred - y_true)
        p_true = y_pred[np.arange(len(y_true)), y_true]
        if self.epsilon_clamp is not None:
            p_true = np.clip(p_true, self.epsilon_clamp, 1.0)
        with np.errstate(divide="ignore"):
            return -np.log(p_true) / math.log(self.log_base)


@dataclass(frozen=True, eq=False)
class PredictionSet:
    """Pairs ``(y_true, f(x))``; the features themselves are never stored.

    ``y_pred`` is 1-d (class ids or reals) or 2-d ``(n, k)`` for probability
    vectors. Arrays are copied and frozen on construction.
    """

    y_true: np.ndarray
    y_pred: np.ndarray
    k: int | None = None

    def __post_init__(self) -> None:
        y_true = np.array(self.y_true)
        y_pred = np.array(self.y_pred)
        if y_true.ndim != 1 or len(y_true) == 0:
            raise ShapeMismatchError("y_true must be a nonempty 1-d sequence")
        if len(y_pred) != len(y_true):
            raise ShapeMismatchError(
                f"{len(y_true)} labels but {len(y_pred)} predictions"
            )
        if y_pred.ndim not in (1, 2):
            raise ShapeMismatchError("y_pred must be 1-d or 2-d")
        y_true.setflags(write=False)
        y_pred.setflags(write=False)
        object.__setattr__(self, "y_true", y_true)
        object.__setattr__(self, "y_pred", y_pred)

    @property
    def n(self) -> int:
        return len(self.y_true)

    @classmethod
    def from_records(cls, records: Sequence[tuple], k: int | None = None) -> "PredictionSet":
        if not records:
            raise ShapeMismatchError("no records")
        y_true, y_pred = zip(*records)
        return cls(np.asarray(y_true), np.asarray(y_pred), k=k)

    def num_classes(self, loss: LossSpec) -> int:
        """Number of classes implied by the loss and payload."""
        if loss.kind == "cross_entropy":
            return self.y_pred.shape[1]
        if loss.kind == "cost_sensitive":
            return len(loss.cost_matrix)
        if self.k is not None:
            return self.k
        return max(2, int(max(self.y_true.max(), self.y_pred.max())) + 1)

    def checked_arrays(self, loss: LossSpec) -> tuple[np.ndarray, np.ndarray]:
        """Validate payload against ``loss`` and return ``(y_true, y_pred)`` arrays."""
        if loss.payload == "real":
            if self.y_pred.ndim != 1:
                raise ShapeMismatchError(f"{loss.kind} loss needs scalar predictions")
            try:
                y_true = self.y_true.astype(float)
                y_pred = self.y_pred.astype(float)
            except (TypeError, ValueError) as exc:
                raise ShapeMismatchError(f"non-numeric regression payload: {exc}") from exc
            if not (np.isfinite(y_true).all() and np.isfinite(y_pred).all()):
                raise ShapeMismatchError("regression values must be finite")
            return y_true, y_pred

        y_true = _as_labels(self.y_true, "y_true")
        if loss.payload == "probs":
            if self.y_pred.ndim != 2 or self.y_pred.shape[1] < 2:
                raise ShapeMismatchError("cross-entropy loss needs (n, k) probability vectors")
            y_pred = self.y_pred.astype(float)
            if (y_pred < 0).any() or not np.isfinite(y_pred).all():
                raise ShapeMismatchError("probability vectors must be finite and nonnegative")
            bad = np.flatnonzero(np.abs(y_pred.sum(axis=1) - 1.0) > PROBA_TOL)
            if bad.size:
                raise ShapeMismatchError(f"probability vector at record {bad[0]} does not sum to 1")
        else:
            if self.y_pred.ndim != 1:
                raise ShapeMismatchError(f"{loss.kind} loss needs class-id predictions")
            y_pred = _as_labels(self.y_pred, "y_pred")
        k = self.num_classes(loss)
        if y_true.max() >= k or (loss.payload == "label" and y_pred.max() >= k):
            raise ShapeMismatchError(f"class id out of range for k={k}")
        return y_true, y_pred


def _as_labels(values: np.ndarray, name: str) -> np.ndarray:
    arr = np.asarray(values)
    if arr.dtype.kind == "f":
        if not np.all(np.isfinite(arr)) or not np.all(arr == np.round(arr)):
            raise ShapeMismatchError(f"{name} must hold integer class ids")
        arr = arr.astype(np.int64)
    elif arr.dtype.kind not in "iub":
        raise ShapeMismatchError(f"{name} must hold integer class ids")
    arr = arr.astype(np.int64)
    if (arr < 0).any():
        raise ShapeMismatchError(f"{name} contains negative class ids")
    return arr


@dataclass(frozen=True)
class BmpSolution:
    constant_prediction: object
    bmp_risk: float


@dataclass(frozen=True)
class PaResult:
    model_risk: float
    bmp_risk: float
    pa: float
    trivial_problem: bool = False

    @property
    def meaningful(self) -> bool:
        """True when the model beats its marginal baseline."""
        return self.pa > 0


def estimate_marginal(labels: Sequence[int], k: int) -> LabelDistribution:
    """Plug-in class frequencies ``count(i) / n``."""
    arr = np.asarray(labels)
    if arr.size == 0:
        raise MetricError("no labels")
    arr = _as_labels(arr, "labels")
    if arr.max() >= k:
        raise MetricError(f"unknown class id {int(arr.max())} for k={k}")
    counts = np.bincount(arr, minlength=k)
    return LabelDistribution(tuple(counts / arr.size), tuple(range(k)))


def bmp_zero_one(dist: LabelDistribution) -> BmpSolution:
    # np.argmax returns the first maximum, i.e. the lowest class id on ties
    i = int(np.argmax(dist.probs))
    # sum of the other classes equals 1 - max without cancellation for small minorities
    risk = math.fsum(p for j, p in enumerate(dist.probs) if j != i)
    return BmpSolution(dist.class_ids[i], risk)


def shannon_entropy(probs: Sequence[float], log_base: float = math.e) -> float:
    return -math.fsum(p * math.log(p) for p in probs if p > 0) / math.log(log_base)


def bmp_cross_entropy(dist: LabelDistribution, log_base: float = math.e) -> BmpSolution:
    """The marginal itself is optimal; its risk is the Shannon entropy."""
    return BmpSolution(dist.probs, shannon_entropy(dist.probs, log_base))


def bmp_squared(y_values: Sequence[float]) -> BmpSolution:
    """Mean prediction with population variance as risk."""
    y = _real_values(y_values)
    # constant labels must give an exactly zero baseline
    mean = float(y[0]) if np.all(y == y[0]) else float(np.mean(y))
    return BmpSolution(mean, float(np.mean((y - mean) ** 2)))


def bmp_absolute(y_values: Sequence[float]) -> BmpSolution:
    """Median prediction with mean absolute deviation around it as risk.

    For even ``n`` the midpoint of the two middle order statistics is used;
    every point between them gives the same risk.
    """
    y = _real_values(y_values)
    median = float(np.median(y))
    return BmpSolution(median, float(np.mean(np.abs(y - median))))


def bmp_cost_sensitive(dist: LabelDistribution, cost_matrix) -> BmpSolution:
    """Constant class minimising expected cost ``sum_j B[i][j] * P(Y=j)``."""
    B = np.asarray(cost_matrix, dtype=float)
    if B.shape != (dist.k, dist.k):
        raise ShapeMismatchError(f"cost matrix shape {B.shape} does not match k={dist.k}")
    if (B < 0).any():
        raise MetricError("cost matrix entries must be nonnegative")
    expected = B @ dist.as_array()
    i = int(np.argmin(expected))
    return BmpSolution(dist.class_ids[i], float(expected[i]))


def bmp_for_distribution(loss: LossSpec, dist: LabelDistribution) -> BmpSolution:
    if loss.kind == "zero_one":
        return bmp_zero_one(dist)
    if loss.kind == "cross_entropy":
        return bmp_cross_entropy(dist, loss.log_base)
    if loss.kind == "cost_sensitive":
        return bmp_cost_sensitive(dist, loss.cost_matrix)
    raise MetricError(f"{loss.kind} BMP is computed from label values, not a distribution")


def _real_values(y_values: Sequence[float]) -> np.ndarray:
    y = np.asarray(y_values, dtype=float)
    if y.ndim != 1 or y.size == 0:
        raise MetricError("need a nonempty 1-d sample of label values")
    if not np.isfinite(y).all():
        raise MetricError("label values must be finite")
    return y


def empirical_risk(preds: PredictionSet, loss: LossSpec) -> float:
    """Mean per-record loss; ``inf`` for cross-entropy with a zero true-class probability."""
    y_true, y_pred = preds.checked_arrays(loss)
    return float(np.mean(loss.losses(y_true, y_pred)))


def prediction_advantage(model_risk, bmp_risk) -> PaResult:
    """``1 - model_risk / bmp_risk``.

    Exact inputs (ints, ``Fraction``) stay exact. A zero baseline with a
    zero model risk is reported as PA 1 with ``trivial_problem`` set.
    """
    for name, value in (("model_risk", model_risk), ("bmp_risk", bmp_risk)):
        if not isinstance(value, Real) or math.isnan(value) or value < 0:
            raise MetricError(f"{name} must be a nonnegative number, got {value!r}")
    if math.isinf(bmp_risk):
        raise MetricError("bmp_risk must be finite")
    if bmp_risk == 0:
        if model_risk > 0:
            raise DegenerateBMPError(
                "degenerate BMP: labels admit a zero-risk constant predictor"
            )
        one = Fraction(1) if isinstance(model_risk, Fraction) else 1.0
        return PaResult(model_risk, bmp_risk, one, trivial_problem=True)
    if math.isinf(model_risk):
        return PaResult(model_risk, bmp_risk, -math.inf)
    return PaResult(model_risk, bmp_risk, 1 - model_risk / bmp_risk)


def loss_range(loss: LossSpec, declared: float | None = None) -> float:
    """Width of the loss's value range, as needed by concentration bounds."""
    if declared is not None:
        if not declared > 0:
            raise MetricError("declared loss range must be positive")
        return float(declared)
    if loss.kind == "zero_one":
        return 1.0
    if loss.kind == "cost_sensitive":
        return float(loss.cost_array().max())
    if loss.kind == "cross_entropy" and loss.epsilon_clamp is not None:
        return -math.log(loss.epsilon_clamp) / math.log(loss.log_base)
    raise MetricError("loss range required")


def hoeffding_interval(
    point_risk: float, n: int, loss_range: float | None, confidence: float
) -> tuple[float, float]:
    """Two-sided Hoeffding interval for a mean of bounded losses, clipped to the range."""
    if loss_range is None or not math.isfinite(loss_range):
        raise MetricError("loss range required")
    if loss_range <= 0:
        raise MetricError("loss range must be positive")
    if n < 1:
        raise MetricError("n must be >= 1")
    if not 0 < confidence < 1:
        raise MetricError("confidence must lie strictly between 0 and 1")
    half = loss_range * math.sqrt(math.log(2 / (1 - confidence)) / (2 * n))
    return max(0.0, point_risk - half), min(loss_range, point_risk + half)
