"""Seeded imbalance/noise degradation of a binary labeled sample and the metric sweep over it.

Each grid point is reproducible on its own: its seed is derived from the
base seed and the point's (imbalance, noise) coordinates, and split into
independent streams for bootstrap, prediction and label noise.
"""

from __future__ import annotations

import csv
import hashlib
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Sequence

import numpy as np

from .confusion import ConfusionCells, MetricPanel, cells_from_counts, panel
from .core import MetricError, PaResult, bmp_zero_one, estimate_marginal, prediction_advantage

MINORITY = 1
MASK64 = (1 << 64) - 1
# guards floor() against products such as 0.29 * 100 == 28.999999999999996
_FLOOR_SLACK = 1e-9

DEFAULT_IMBALANCE_AXIS = tuple(round(0.05 * i, 2) for i in range(1, 11))
DEFAULT_NOISE_AXIS = (0.1, 0.2, 0.3)

CSV_COLUMNS = (
    "imbalance", "noise", "error", "pa", "kappa", "f1", "ba",
    "accuracy", "tp", "tn", "pre", "rec", "seed",
)


class NoiseIncompatibleError(MetricError):
    """More flips per class were requested than the smaller class holds."""


def _floor(x: float) -> int:
    return math.floor(x + _FLOOR_SLACK)


@dataclass(frozen=True, eq=False)
class LabeledSample:
    """Binary labels plus opaque per-row handles that are carried along untouched.

    ``features`` defaults to the row indices ``0..n-1``, which lets a
    prediction table keyed by original row follow rows through bootstrap.
    """

    labels: np.ndarray
    features: np.ndarray | None = None

    def __post_init__(self) -> None:
        labels = np.array(self.labels)
        if labels.ndim != 1 or labels.size < 2:
            raise MetricError("a labeled sample needs at least 2 rows")
        if not np.isin(labels, (0, 1)).all():
            raise MetricError("labels must be binary class ids 0/1")
        labels = labels.astype(np.int8)
        features = np.arange(labels.size) if self.features is None else np.array(self.features)
        if len(features) != labels.size:
            raise MetricError(f"{labels.size} labels but {len(features)} feature rows")
        labels.setflags(write=False)
        features.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "features", features)

    @property
    def n(self) -> int:
        return self.labels.size

    def class_counts(self) -> tuple[int, int]:
        ones = int(self.labels.sum())
        return self.n - ones, ones


@dataclass(frozen=True)
class DegradationConfig:
    target_minority_fraction: float = 0.5
    noise_level: float = 0.0
    seed: int = 0
    n_out: int | None = None

    def __post_init__(self) -> None:
        if not 0 < self.target_minority_fraction <= 0.5:
            raise MetricError("target minority fraction must lie in (0, 0.5]")
        if not 0 <= self.noise_level < 0.5:
            raise MetricError("noise level must lie in [0, 0.5)")
        if self.n_out is not None and self.n_out < 2:
            raise MetricError("n_out must be >= 2")
        object.__setattr__(self, "seed", int(self.seed) & MASK64)


def inflate_imbalance(sample: LabeledSample, cfg: DegradationConfig) -> LabeledSample:
    """Class-stratified bootstrap to ``floor(target * n_out)`` minority rows."""
    rng = np.random.default_rng(cfg.seed)
    n_out = cfg.n_out if cfg.n_out is not None else sample.n
    n_min = _floor(cfg.target_minority_fraction * n_out)
    if n_min < 1:
        raise MetricError(
            f"target fraction {cfg.target_minority_fraction} yields no minority rows at n_out={n_out}"
        )
    minority_pool = np.flatnonzero(sample.labels == MINORITY)
    majority_pool = np.flatnonzero(sample.labels != MINORITY)
    if minority_pool.size == 0 or majority_pool.size == 0:
        raise MetricError("empty class pool: both classes must be present")
    idx = np.concatenate(
        [
            rng.choice(minority_pool, size=n_min, replace=True),
            rng.choice(majority_pool, size=n_out - n_min, replace=True),
        ]
    )
    idx = rng.permutation(idx)
    return LabeledSample(sample.labels[idx], sample.features[idx])


def noise_flip_indices(labels: np.ndarray, noise_level: float, rng: np.random.Generator) -> np.ndarray:
    """Pick ``floor(noise * n / 2)`` rows from each class, uniformly without replacement."""
    labels = np.asarray(labels)
    m = _floor(noise_level * labels.size / 2)
    pools = [np.flatnonzero(labels == cls) for cls in (0, 1)]
    if any(m > pool.size for pool in pools):
        raise NoiseIncompatibleError(
            f"noise level incompatible with imbalance: {m} flips per class, "
            f"class sizes {[p.size for p in pools]}"
        )
    chosen = [rng.choice(pool, size=m, replace=False) for pool in pools]
    return np.sort(np.concatenate(chosen))


def flip_labels(sample: LabeledSample, indices: np.ndarray) -> LabeledSample:
    labels = sample.labels.copy()
    labels[indices] ^= 1
    return LabeledSample(labels, sample.features)


def inject_label_noise(sample: LabeledSample, cfg: DegradationConfig) -> LabeledSample:
    """Flip equal-size random subsets of both classes; class counts are unchanged."""
    if cfg.noise_level == 0:
        return sample
    rng = np.random.default_rng(cfg.seed)
    return flip_labels(sample, noise_flip_indices(sample.labels, cfg.noise_level, rng))


Predictor = Callable[[LabeledSample, np.random.Generator], np.ndarray]


@dataclass(frozen=True)
class NoisyOraclePredictor:
    """Predicts the pre-noise label, then flips ``floor(epsilon * n)`` random predictions."""

    epsilon: float = 0.0

    def __post_init__(self) -> None:
        if not 0 <= self.epsilon < 1:
            raise MetricError("epsilon must lie in [0, 1)")

    def __call__(self, sample: LabeledSample, rng: np.random.Generator) -> np.ndarray:
        preds = sample.labels.copy()
        n_err = _floor(self.epsilon * sample.n)
        if n_err:
            preds[rng.choice(sample.n, size=n_err, replace=False)] ^= 1
        return preds

    def describe(self) -> str:
        return f"noisy-oracle(epsilon={self.epsilon!r})"


class LookupPredictor:
    """Fixed predictions per original row, e.g. out-of-fold predictions of a trained model."""

    def __init__(self, predictions: Sequence[int]):
        preds = np.asarray(predictions)
        if preds.ndim != 1 or not np.isin(preds, (0, 1)).all():
            raise MetricError("lookup predictions must be a 1-d sequence of 0/1")
        self.predictions = preds.astype(np.int8)

    def __call__(self, sample: LabeledSample, rng: np.random.Generator) -> np.ndarray:
        handles = sample.features.astype(np.int64)
        if handles.size and (handles.min() < 0 or handles.max() >= self.predictions.size):
            raise MetricError("row handle outside the prediction table")
        return self.predictions[handles]

    def describe(self) -> str:
        return f"lookup(n={self.predictions.size})"


def point_seed(base_seed: int, imbalance: float, noise: float) -> int:
    digest = hashlib.blake2b(f"{imbalance!r}|{noise!r}".encode(), digest_size=8).digest()
    return (int(base_seed) ^ int.from_bytes(digest, "big")) & MASK64


@dataclass(frozen=True)
class GridPoint:
    imbalance: float
    noise: float
    seed: int
    status: str = "ok"
    error: float | None = None
    pa: PaResult | None = None
    cells: ConfusionCells | None = None
    metrics: MetricPanel | None = None
    detail: str = ""

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def csv_row(self) -> list[str]:
        m = self.metrics
        values = [
            self.imbalance, self.noise, self.error, self.pa.pa if self.pa else None,
            *(getattr(m, k) if m else None for k in ("kappa", "f1", "ba", "accuracy", "tp", "tn", "pre", "rec")),
        ]
        return ["" if v is None else repr(float(v)) for v in values] + [str(self.seed)]

    def to_dict(self) -> dict:
        return {
            "imbalance": self.imbalance,
            "noise": self.noise,
            "seed": self.seed,
            "status": self.status,
            "error": self.error,
            "pa": None
            if self.pa is None
            else {
                "model_risk": self.pa.model_risk,
                "bmp_risk": self.pa.bmp_risk,
                "pa": self.pa.pa,
                "trivial_problem": self.pa.trivial_problem,
            },
            "cells": None
            if self.cells is None
            else {k: getattr(self.cells, k) for k in ("a", "b", "c", "d", "swapped")},
            "metrics": self.metrics.to_dict() if self.metrics else None,
            "detail": self.detail,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GridPoint":
        return cls(
            imbalance=data["imbalance"],
            noise=data["noise"],
            seed=data["seed"],
            status=data["status"],
            error=data["error"],
            pa=PaResult(**data["pa"]) if data["pa"] else None,
            cells=ConfusionCells(**data["cells"]) if data["cells"] else None,
            metrics=MetricPanel.from_dict(data["metrics"]) if data["metrics"] else None,
            detail=data["detail"],
        )


@dataclass(frozen=True)
class SweepGrid:
    """Rectangular (noise x imbalance) grid; ``points`` is noise-major."""

    imbalance_axis: tuple[float, ...]
    noise_axis: tuple[float, ...]
    points: tuple[GridPoint, ...]
    base_seed: int = 0
    n_out: int | None = None
    predictor: str = ""

    def row(self, noise: float) -> list[GridPoint]:
        i = self.noise_axis.index(noise)
        w = len(self.imbalance_axis)
        return list(self.points[i * w:(i + 1) * w])

    def point(self, noise: float, imbalance: float) -> GridPoint:
        return self.row(noise)[self.imbalance_axis.index(imbalance)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for p in self.points:
            writer.writerow(p.csv_row())
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "imbalance_axis": list(self.imbalance_axis),
            "noise_axis": list(self.noise_axis),
            "base_seed": self.base_seed,
            "n_out": self.n_out,
            "predictor": self.predictor,
            "points": [p.to_dict() for p in self.points],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SweepGrid":
        return cls(
            imbalance_axis=tuple(data["imbalance_axis"]),
            noise_axis=tuple(data["noise_axis"]),
            points=tuple(GridPoint.from_dict(p) for p in data["points"]),
            base_seed=data["base_seed"],
            n_out=data["n_out"],
            predictor=data["predictor"],
        )


def _stream_seeds(seed: int, count: int) -> list[int]:
    children = np.random.SeedSequence(seed).spawn(count)
    return [int(c.generate_state(1, dtype=np.uint64)[0]) for c in children]


def evaluate_point(
    sample: LabeledSample,
    imbalance: float,
    noise: float,
    predictor: Predictor,
    base_seed: int = 0,
    n_out: int | None = None,
) -> GridPoint:
    seed = point_seed(base_seed, imbalance, noise)
    boot_seed, pred_seed, noise_seed = _stream_seeds(seed, 3)
    cfg = DegradationConfig(imbalance, noise, boot_seed, n_out)
    clean = inflate_imbalance(sample, cfg)
    preds = np.asarray(predictor(clean, np.random.default_rng(pred_seed)))
    if preds.shape != clean.labels.shape:
        raise MetricError(f"predictor returned shape {preds.shape}, expected {clean.labels.shape}")
    try:
        noisy = inject_label_noise(clean, replace(cfg, seed=noise_seed))
    except NoiseIncompatibleError as exc:
        return GridPoint(imbalance, noise, seed, status="infeasible", detail=str(exc))

    y = noisy.labels
    tp = int(np.sum((preds == 1) & (y == 1)))
    fp = int(np.sum((preds == 1) & (y == 0)))
    fn = int(np.sum((preds == 0) & (y == 1)))
    tn = int(np.sum((preds == 0) & (y == 0)))
    cells = cells_from_counts(tp, fp, fn, tn)
    n = noisy.n
    bmp = bmp_zero_one(estimate_marginal(y, 2))
    # counts keep PA exact where the grid arithmetic allows it
    bmp_errors = n - int(np.bincount(y, minlength=2).max())
    raw = prediction_advantage(fp + fn, bmp_errors)
    pa = PaResult((fp + fn) / n, bmp.bmp_risk, raw.pa, raw.trivial_problem)
    return GridPoint(
        imbalance, noise, seed, error=(fp + fn) / n, pa=pa, cells=cells, metrics=panel(cells)
    )


def _check_axis(values: Iterable[float], name: str, lo: float, hi: float, hi_open: bool) -> tuple[float, ...]:
    axis = tuple(float(v) for v in values)
    if not axis:
        raise MetricError(f"{name} axis is empty")
    for v in axis:
        if not (lo <= v and (v < hi if hi_open else v <= hi)):
            raise MetricError(f"{name} value {v} out of range")
    if len(set(axis)) != len(axis):
        raise MetricError(f"{name} axis has duplicate values")
    return axis


def run_sweep(
    sample: LabeledSample,
    imbalance_axis: Sequence[float] = DEFAULT_IMBALANCE_AXIS,
    noise_axis: Sequence[float] = DEFAULT_NOISE_AXIS,
    predictor: Predictor | float | None = None,
    base_seed: int = 0,
    n_out: int | None = None,
    max_workers: int | None = None,
) -> SweepGrid:
    """Degrade and evaluate ``sample`` at every (noise, imbalance) point.

    ``predictor`` is a callable ``(clean_sample, rng) -> predictions`` or a
    float, read as the error rate of :class:`NoisyOraclePredictor`. Points
    whose noise level needs more flips than the minority class holds are
    kept in the grid with ``status="infeasible"`` and no metrics.
    Threaded execution (``max_workers > 1``) gives the same grid as
    sequential execution.
    """
    imb = _check_axis(imbalance_axis, "imbalance", 0.0, 0.5, hi_open=False)
    if 0.0 in imb:
        raise MetricError("imbalance value 0.0 out of range")
    noise = _check_axis(noise_axis, "noise", 0.0, 0.5, hi_open=True)
    if predictor is None or isinstance(predictor, (int, float)):
        predictor = NoisyOraclePredictor(float(predictor or 0.0))
    if min(sample.class_counts()) == 0:
        raise MetricError("both classes must be present before degradation")

    coords = [(i, z) for z in noise for i in imb]

    def run(coord: tuple[float, float]) -> GridPoint:
        return evaluate_point(sample, coord[0], coord[1], predictor, base_seed, n_out)

    if max_workers and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            points = list(pool.map(run, coords))
    else:
        points = [run(c) for c in coords]
    describe = getattr(predictor, "describe", None)
    return SweepGrid(
        imbalance_axis=imb,
        noise_axis=noise,
        points=tuple(points),
        base_seed=int(base_seed) & MASK64,
        n_out=n_out,
        predictor=describe() if describe else repr(predictor),
    )


@dataclass(frozen=True)
class ZeroCrossing:
    noise: float
    crossings: tuple[float, ...]
    monotone: bool

    @property
    def threshold(self) -> float | None:
        """Single crossing of a monotone row; ``None`` means no sign change."""
        return self.crossings[0] if self.crossings else None


def _crossings(xs: Sequence[float], ys: Sequence[float]) -> list[float]:
    found: list[float] = []
    for (x0, y0), (x1, y1) in zip(zip(xs, ys), zip(xs[1:], ys[1:])):
        if y0 == 0:
            if not found or found[-1] != x0:
                found.append(x0)
        elif y0 * y1 < 0:
            found.append(x0 + (0 - y0) * (x1 - x0) / (y1 - y0))
    if ys and ys[-1] == 0 and (not found or found[-1] != xs[-1]):
        found.append(xs[-1])
    return found


def zero_crossing(grid: SweepGrid) -> dict[float, ZeroCrossing]:
    """Imbalance level(s) at which PA changes sign, per noise row.

    Rows are sorted by imbalance and linearly interpolated; infeasible
    points are skipped. Monotonicity is checked and reported, and a
    non-monotone row lists one crossing per sign-changing segment.
    """
    out = {}
    for z in grid.noise_axis:
        pts = sorted((p for p in grid.row(z) if p.ok), key=lambda p: p.imbalance)
        xs = [p.imbalance for p in pts]
        ys = [float(p.pa.pa) for p in pts]
        diffs = np.diff(ys)
        monotone = bool(np.all(diffs >= 0) or np.all(diffs <= 0))
        out[z] = ZeroCrossing(z, tuple(_crossings(xs, ys)), monotone)
    return out
