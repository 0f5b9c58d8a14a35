"""Evaluation metrics: error measures, success curves, normalized AUC,
and Welch two-sample tests for distribution-shift reports."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from scipy.special import stdtr

from .attack import AttackResult, classify_adversarial
from .counting import count_induced
from .graph import Graph
from .patterns import Pattern

MIN_SHIFT_SAMPLES = 25


def mae(preds: Sequence[float], labels: Sequence[float]) -> float:
    """Mean absolute error."""
    if len(preds) != len(labels):
        raise ValueError(f"length mismatch: {len(preds)} vs {len(labels)}")
    if not preds:
        raise ValueError("empty input")
    return sum(abs(p - t) for p, t in zip(preds, labels)) / len(preds)


def mae_count_norm(preds: Sequence[float], labels: Sequence[float]) -> float:
    """MAE normalized per item by the ground-truth count (floored at 1)."""
    if len(preds) != len(labels):
        raise ValueError(f"length mismatch: {len(preds)} vs {len(labels)}")
    if not preds:
        raise ValueError("empty input")
    return sum(abs(p - t) / max(t, 1) for p, t in zip(preds, labels)) / len(preds)


@dataclass(frozen=True)
class SuccessCurve:
    """Success rate per budget percent, budgets strictly increasing."""

    points: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        budgets = [b for b, _ in self.points]
        if any(b2 <= b1 for b1, b2 in zip(budgets, budgets[1:])):
            raise ValueError(f"budgets must be strictly increasing: {budgets}")
        if any(not 0.0 <= r <= 1.0 for _, r in self.points):
            raise ValueError("success rates must lie in [0, 1]")


def success_curve(campaigns: Mapping[float, Sequence[AttackResult]],
                  margin: float) -> SuccessCurve:
    """Fraction of adversarial results per budget, re-classified at ``margin``."""
    points = []
    for budget in sorted(campaigns):
        results = campaigns[budget]
        if not results:
            raise ValueError(f"empty campaign at budget {budget}")
        hits = sum(
            classify_adversarial((r.clean_pred, r.clean_count),
                                 (r.best.pred, r.best.count), margin).adversarial
            for r in results)
        points.append((float(budget), hits / len(results)))
    return SuccessCurve(tuple(points))


def auc_normalized(curve: SuccessCurve) -> float:
    """Trapezoidal area of the curve over its budget span, normalized by the
    area of the constant-1 function on the same interval."""
    pts = curve.points
    if len(pts) < 2:
        raise ValueError("need at least 2 curve points for an AUC")
    area = 0.0
    for (b1, r1), (b2, r2) in zip(pts, pts[1:]):
        area += (r1 + r2) / 2.0 * (b2 - b1)
    return area / (pts[-1][0] - pts[0][0])


def welch_ttest(a: Sequence[float], b: Sequence[float]) -> tuple[float, float]:
    """Welch statistic and two-sided p-value (no equal-variance assumption).

    Degrees of freedom follow Welch-Satterthwaite; the p-value comes from the
    Student-t distribution function. Two constant samples with equal means
    give (0, 1); constant samples with different means are rejected.
    """
    na, nb = len(a), len(b)
    if na < 2 or nb < 2:
        raise ValueError("both samples need at least 2 observations")
    mean_a = sum(a) / na
    mean_b = sum(b) / nb
    var_a = sum((x - mean_a) ** 2 for x in a) / (na - 1)
    var_b = sum((x - mean_b) ** 2 for x in b) / (nb - 1)
    if var_a == 0.0 and var_b == 0.0:
        if mean_a == mean_b:
            return 0.0, 1.0
        raise ValueError("both samples are constant with different means")
    se2 = var_a / na + var_b / nb
    statistic = (mean_a - mean_b) / math.sqrt(se2)
    df = se2 ** 2 / ((var_a / na) ** 2 / (na - 1) + (var_b / nb) ** 2 / (nb - 1))
    p_value = 2.0 * float(stdtr(df, -abs(statistic)))
    return statistic, p_value


@dataclass(frozen=True)
class ShiftReport:
    """Welch comparison of one statistic between clean and adversarial samples."""

    metric: str
    clean_values: tuple[float, ...]
    adversarial_values: tuple[float, ...]
    statistic: float | None
    p_value: float | None
    insufficient: bool


def shift_report(clean: Sequence[Graph], adversarial: Sequence[Graph],
                 pattern: Pattern) -> tuple[ShiftReport, ShiftReport]:
    """Distribution-shift tests on pattern counts and on edge numbers.

    With fewer than ``MIN_SHIFT_SAMPLES`` adversarial graphs the reports are
    flagged insufficient and carry no p-value.
    """
    if not clean:
        raise ValueError("clean sample is empty")
    reports = []
    for metric, fn in (("count", lambda g: float(count_induced(g, pattern))),
                       ("edges", lambda g: float(g.num_edges))):
        clean_values = tuple(fn(g) for g in clean)
        adv_values = tuple(fn(g) for g in adversarial)
        if len(adv_values) < MIN_SHIFT_SAMPLES:
            reports.append(ShiftReport(metric, clean_values, adv_values,
                                       None, None, True))
            continue
        statistic, p_value = welch_ttest(clean_values, adv_values)
        reports.append(ShiftReport(metric, clean_values, adv_values,
                                   statistic, p_value, False))
    return reports[0], reports[1]
