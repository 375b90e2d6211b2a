"""Binary 0/1 metric algebra on the Venn cells (a, b, c, d).

    a = Pr{f=1, Y=0}   b = Pr{f=1, Y=1}
    c = Pr{f=0, Y=1}   d = Pr{f=0, Y=0}

Label 1 is the minority class (``b + c <= a + d``); :func:`cells_from_counts`
enforces this by swapping class roles when needed.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

from .core import MetricError

CELL_TOL = 1e-9
EQUALITY_TOL = 1e-12

METRIC_NAMES = ("pa", "tp", "tn", "ba", "pre", "rec", "f1", "kappa", "accuracy")
RIVALS = ("tp", "tn", "ba", "pre", "rec", "f1", "kappa")
CHAIN = ("kappa", "f1", "ba", "accuracy")


@dataclass(frozen=True)
class ConfusionCells:
    a: float
    b: float
    c: float
    d: float
    swapped: bool = False

    def __post_init__(self) -> None:
        vals = (self.a, self.b, self.c, self.d)
        if any(not math.isfinite(v) or v < 0 for v in vals):
            raise MetricError(f"cells must be finite and nonnegative: {vals}")
        if abs(math.fsum(vals) - 1.0) > CELL_TOL:
            raise MetricError(f"cells sum to {math.fsum(vals)!r}, not 1")

    @property
    def minority_mass(self) -> float:
        return self.b + self.c

    @property
    def error(self) -> float:
        return self.a + self.c

    @property
    def is_canonical(self) -> bool:
        return self.b + self.c <= self.a + self.d

    def swap(self) -> "ConfusionCells":
        """Exchange the roles of the two classes."""
        return ConfusionCells(self.c, self.d, self.a, self.b, not self.swapped)


def canonicalize(cells: ConfusionCells) -> ConfusionCells:
    # exact balance is left as is
    return cells if cells.is_canonical else cells.swap()


def cells_from_counts(tp_count, fp_count, fn_count, tn_count) -> ConfusionCells:
    counts = (tp_count, fp_count, fn_count, tn_count)
    if any(c < 0 for c in counts):
        raise MetricError(f"counts must be nonnegative: {counts}")
    total = sum(counts)
    if total <= 0:
        raise MetricError("confusion counts have zero total")
    return canonicalize(
        ConfusionCells(
            a=fp_count / total, b=tp_count / total, c=fn_count / total, d=tn_count / total
        )
    )


@dataclass(frozen=True)
class MetricPanel:
    """All binary measures for one set of cells; ``None`` marks an undefined metric."""

    pa: float | None
    tp: float | None
    tn: float | None
    ba: float | None
    pre: float | None
    rec: float | None
    f1: float | None
    kappa: float | None
    accuracy: float

    @property
    def defined(self) -> dict[str, bool]:
        return {name: getattr(self, name) is not None for name in METRIC_NAMES}

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "MetricPanel":
        return cls(**{name: data[name] for name in METRIC_NAMES})


def _ratio(num: float, den: float) -> float | None:
    return num / den if den > 0 else None


def panel(cells: ConfusionCells) -> MetricPanel:
    a, b, c, d = cells.a, cells.b, cells.c, cells.d
    tp = _ratio(b, b + c)
    tn = _ratio(d, a + d)
    ba = (tp + tn) / 2 if tp is not None and tn is not None else None
    # 2b / (2b + a + c) is the harmonic mean of PRE and REC, and stays 0 for a
    # classifier that never predicts the minority
    f1 = _ratio(2 * b, 2 * b + a + c)
    p_e = (a + b) * (b + c) + (a + d) * (c + d)
    kappa = 1 - (a + c) / (1 - p_e) if 1 - p_e > 0 else None
    return MetricPanel(
        pa=_ratio(b - a, b + c),
        tp=tp,
        tn=tn,
        ba=ba,
        pre=_ratio(b, a + b),
        rec=_ratio(b, b + c),
        f1=f1,
        kappa=kappa,
        accuracy=b + d,
    )


@dataclass(frozen=True)
class DominationReport:
    """Outcome of checking ``PA <= m`` for every rival metric ``m``.

    ``holds[m]`` is ``None`` when ``m`` is undefined. ``strict_required[m]``
    says whether the side condition for a strict inequality is met, and
    ``strict[m]`` whether a strict gap (larger than ``EQUALITY_TOL``) was
    observed. ``chain`` records the empirically observed ordering
    kappa <= F <= BA <= accuracy, which is reported but not guaranteed.
    """

    pa: float
    holds: dict[str, bool | None]
    strict: dict[str, bool | None]
    strict_required: dict[str, bool]
    chain: dict[str, bool | None] = field(default_factory=dict)

    @property
    def all_hold(self) -> bool:
        return all(v is not False for v in self.holds.values())

    @property
    def violations(self) -> list[str]:
        """Metrics where the bound or a required strict gap fails."""
        bad = [m for m, ok in self.holds.items() if ok is False]
        bad += [
            f"{m} (strict)"
            for m, req in self.strict_required.items()
            if req and self.strict[m] is False
        ]
        return bad

    @property
    def consistent(self) -> bool:
        return not self.violations


def check_domination(cells: ConfusionCells, tol: float = EQUALITY_TOL) -> DominationReport:
    if not cells.is_canonical:
        raise MetricError("cells must be canonical (label 1 the minority)")
    if cells.minority_mass <= 0:
        raise MetricError("no minority mass: PA is undefined")
    a, b, c, d = cells.a, cells.b, cells.c, cells.d
    p = panel(cells)
    values = p.to_dict()
    holds: dict[str, bool | None] = {}
    strict: dict[str, bool | None] = {}
    for m in RIVALS:
        v = values[m]
        holds[m] = None if v is None else p.pa <= v + tol
        strict[m] = None if v is None else v - p.pa > tol
    pre_below_one = p.pre is not None and p.pre < 1
    strict_required = {
        "tp": a > 0,
        "tn": c > 0,
        "ba": a > 0 or c > 0,
        "pre": a > 0,
        "rec": a > 0,
        "f1": pre_below_one,
        # imbalance alone is not enough for a strict gap: a classifier that
        # never predicts the minority has kappa = PA = 0, a perfect one kappa = PA = 1
        "kappa": b + c < a + d and a + b > 0 and a + c > 0,
    }
    chain: dict[str, bool | None] = {}
    for lo, hi in zip(CHAIN, CHAIN[1:]):
        vlo, vhi = values[lo], values[hi]
        chain[f"{lo}<={hi}"] = None if vlo is None or vhi is None else vlo <= vhi + tol
    return DominationReport(p.pa, holds, strict, strict_required, chain)
