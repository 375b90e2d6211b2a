"""File formats: prediction CSV/JSONL, cost matrices, marginals, labeled samples, report documents."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .core import LabelDistribution, LossSpec, MetricError, PredictionSet
from .evaluation import EvaluationReport, RegressionMoments
from .synthesis import LabeledSample, SweepGrid

INPUT_FORMATS = ("csv", "jsonl")


class DataError(MetricError):
    """Malformed input file."""


def input_format_for(path: Path, declared: str | None = None) -> str:
    if declared is not None:
        if declared not in INPUT_FORMATS:
            raise DataError(f"unknown input format {declared!r}")
        return declared
    suffix = Path(path).suffix.lower().lstrip(".")
    if suffix in INPUT_FORMATS:
        return suffix
    raise DataError(f"{path}: cannot tell the input format from the extension; pass --input-format")


def _parse_label(text, where: str) -> int:
    if isinstance(text, bool):
        raise DataError(f"{where}: expected an integer class id, got {text!r}")
    if isinstance(text, int):
        value = text
    else:
        try:
            value = int(str(text).strip())
        except ValueError:
            raise DataError(f"{where}: expected an integer class id, got {text!r}") from None
    if value < 0:
        raise DataError(f"{where}: negative class id {value}")
    return value


def _parse_real(text, where: str) -> float:
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise DataError(f"{where}: expected a number, got {text!r}") from None
    if not math.isfinite(value):
        raise DataError(f"{where}: non-finite value {text!r}")
    return value


def read_predictions(path, loss: LossSpec, input_format: str | None = None, k: int | None = None) -> PredictionSet:
    """Load ``(y_true, prediction)`` records.

    CSV needs a header with ``y_true`` plus either ``y_pred`` or, for
    cross-entropy, ``p_0 .. p_{k-1}``. JSONL records are objects with
    ``y_true`` and ``y_pred`` (a list of probabilities for cross-entropy).
    """
    path = Path(path)
    fmt = input_format_for(path, input_format)
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise DataError(f"{path}: not valid UTF-8 ({exc})") from None
    if fmt == "csv":
        rows = _read_csv_predictions(path, text, loss)
    else:
        rows = _read_jsonl_predictions(path, text, loss)
    if not rows:
        raise DataError(f"{path}: no records")
    y_true, y_pred = zip(*rows)
    if loss.payload == "probs":
        widths = {len(p) for p in y_pred}
        if len(widths) != 1:
            raise DataError(f"{path}: probability vectors of differing lengths {sorted(widths)}")
    return PredictionSet(np.asarray(y_true), np.asarray(y_pred), k=k)


def _read_csv_predictions(path: Path, text: str, loss: LossSpec) -> list[tuple]:
    reader = csv.reader(text.splitlines())
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise DataError(f"{path}: empty file, header row required") from None
    if "y_true" not in header:
        raise DataError(f"{path}:1: header lacks a 'y_true' column")
    i_true = header.index("y_true")
    if loss.payload == "probs":
        prob_cols = []
        while f"p_{len(prob_cols)}" in header:
            prob_cols.append(header.index(f"p_{len(prob_cols)}"))
        if len(prob_cols) < 2:
            raise DataError(f"{path}:1: cross-entropy needs probability columns p_0..p_(k-1)")
    elif "y_pred" not in header:
        raise DataError(f"{path}:1: header lacks a 'y_pred' column")
    else:
        i_pred = header.index("y_pred")
    rows = []
    for lineno, rec in enumerate(reader, start=2):
        if not rec or all(not c.strip() for c in rec):
            continue
        where = f"{path}:{lineno}"
        if len(rec) != len(header):
            raise DataError(f"{where}: expected {len(header)} fields, got {len(rec)}")
        if loss.payload == "real":
            rows.append((_parse_real(rec[i_true], where), _parse_real(rec[i_pred], where)))
        elif loss.payload == "label":
            rows.append((_parse_label(rec[i_true], where), _parse_label(rec[i_pred], where)))
        else:
            probs = [_parse_real(rec[j], where) for j in prob_cols]
            rows.append((_parse_label(rec[i_true], where), probs))
    return rows


def _read_jsonl_predictions(path: Path, text: str, loss: LossSpec) -> list[tuple]:
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        where = f"{path}:{lineno}"
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataError(f"{where}: invalid JSON ({exc.msg})") from None
        if not isinstance(rec, dict) or "y_true" not in rec or "y_pred" not in rec:
            raise DataError(f"{where}: record needs 'y_true' and 'y_pred'")
        yt, yp = rec["y_true"], rec["y_pred"]
        if loss.payload == "real":
            rows.append((_parse_real(yt, where), _parse_real(yp, where)))
        elif loss.payload == "label":
            rows.append((_parse_label(yt, where), _parse_label(yp, where)))
        else:
            if not isinstance(yp, list):
                raise DataError(f"{where}: cross-entropy 'y_pred' must be a probability list")
            rows.append((_parse_label(yt, where), [_parse_real(p, where) for p in yp]))
    return rows


def read_cost_matrix(path) -> list[list[float]]:
    """JSON list of rows, or a headerless numeric CSV."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".json":
        try:
            matrix = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: invalid JSON ({exc.msg})") from None
        if not isinstance(matrix, list) or not all(isinstance(r, list) for r in matrix):
            raise DataError(f"{path}: cost matrix must be a list of rows")
        return [[_parse_real(v, str(path)) for v in row] for row in matrix]
    return [
        [_parse_real(v, f"{path}:{lineno}") for v in rec]
        for lineno, rec in enumerate(csv.reader(text.splitlines()), start=1)
        if rec
    ]


def read_marginal(path, loss: LossSpec) -> LabelDistribution | RegressionMoments:
    """JSON ``{"probs": [...], "class_ids": [...]}`` or regression moments
    ``{"mean", "variance"}`` / ``{"median", "mad"}``."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON ({exc.msg})") from None
    if not isinstance(data, dict):
        raise DataError(f"{path}: marginal file must hold a JSON object")
    if loss.is_classification:
        if "probs" not in data:
            raise DataError(f"{path}: classification marginal needs 'probs'")
        return LabelDistribution(tuple(data["probs"]), tuple(data.get("class_ids", ())))
    keys = ("mean", "variance", "median", "mad")
    return RegressionMoments(**{k: data.get(k) for k in keys})


def read_labeled_sample(path, label_column: str | int = "label") -> LabeledSample:
    """Binary labels from a headed CSV; rows are identified by their 0-based index."""
    path = Path(path)
    reader = csv.reader(path.read_text(encoding="utf-8").splitlines())
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise DataError(f"{path}: empty file, header row required") from None
    if isinstance(label_column, int) or str(label_column).isdigit():
        col = int(label_column)
        if col >= len(header):
            raise DataError(f"{path}:1: label column index {col} out of range")
    elif label_column in header:
        col = header.index(label_column)
    else:
        raise DataError(f"{path}:1: no label column {label_column!r}")
    labels = []
    for lineno, rec in enumerate(reader, start=2):
        if not rec:
            continue
        if col >= len(rec):
            raise DataError(f"{path}:{lineno}: missing label field")
        value = _parse_label(rec[col], f"{path}:{lineno}")
        if value > 1:
            raise DataError(f"{path}:{lineno}: label {value} is not binary")
        labels.append(value)
    if len(labels) < 2:
        raise DataError(f"{path}: need at least 2 labeled rows")
    return LabeledSample(np.asarray(labels))


def read_lookup_predictions(path, column: str = "y_pred") -> np.ndarray:
    path = Path(path)
    reader = csv.reader(path.read_text(encoding="utf-8").splitlines())
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise DataError(f"{path}: empty file, header row required") from None
    if column not in header:
        raise DataError(f"{path}:1: header lacks a {column!r} column")
    col = header.index(column)
    out = []
    for lineno, rec in enumerate(reader, start=2):
        if rec:
            out.append(_parse_label(rec[col], f"{path}:{lineno}"))
    return np.asarray(out)


@dataclass(frozen=True)
class ReportDocument:
    """An evaluation report or sweep grid plus run metadata, serialised as JSON."""

    kind: str
    report: EvaluationReport | SweepGrid
    config: dict = field(default_factory=dict)
    tool_version: str = __version__
    created: str = field(
        default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds")
    )

    def to_json(self) -> str:
        return json.dumps(
            {
                "tool": "pamet",
                "tool_version": self.tool_version,
                "created": self.created,
                "kind": self.kind,
                "config": self.config,
                "report": self.report.to_dict(),
            },
            indent=2,
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "ReportDocument":
        data = json.loads(text)
        kinds = {"evaluation": EvaluationReport, "sweep": SweepGrid}
        if data.get("kind") not in kinds:
            raise DataError(f"unknown report kind {data.get('kind')!r}")
        return cls(
            kind=data["kind"],
            report=kinds[data["kind"]].from_dict(data["report"]),
            config=data["config"],
            tool_version=data["tool_version"],
            created=data["created"],
        )
