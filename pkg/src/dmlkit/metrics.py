"""Binary classification metrics, PR curves and MAE."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np


@dataclass
class MetricsReport:
    precision: float = 0.0
    recall: float = 0.0
    f1: float = 0.0
    accuracy: float = 0.0
    pr_curve: list[tuple[float, float, float]] = field(default_factory=list)
    pr_auc: float | None = None
    mae: float | None = None
    extras: dict = field(default_factory=dict)

    def to_dict(self, include_curve: bool = False) -> dict:
        d = asdict(self)
        if not include_curve:
            d.pop("pr_curve")
        return d


def _pair(scores, labels) -> tuple[np.ndarray, np.ndarray]:
    s = np.asarray(scores, dtype=np.float64).reshape(-1)
    y = np.asarray(labels).reshape(-1)
    if s.shape != y.shape:
        raise ValueError(f"scores and labels differ in length: {s.size} vs {y.size}")
    if not np.isin(y, (0, 1)).all():
        raise ValueError("labels must be binary (0/1 or bool)")
    return s, y.astype(bool)


def f1_score(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


def binary_metrics(scores, labels, threshold: float) -> tuple[float, float, float, float]:
    """(precision, recall, f1, accuracy) when flagging ``score >= threshold``."""
    s, y = _pair(scores, labels)
    pred = s >= threshold
    return confusion_metrics(pred, y)


def confusion_metrics(pred, labels) -> tuple[float, float, float, float]:
    pred = np.asarray(pred, dtype=bool)
    y = np.asarray(labels, dtype=bool)
    if pred.shape != y.shape:
        raise ValueError("prediction and label arrays differ in length")
    tp = int(np.sum(pred & y))
    fp = int(np.sum(pred & ~y))
    fn = int(np.sum(~pred & y))
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    accuracy = float(np.mean(pred == y)) if y.size else 0.0
    return precision, recall, f1_score(precision, recall), accuracy


def pr_curve_auc(scores, labels):
    """PR curve over every distinct score threshold.

    Returns ``(curve, auc, best_threshold)``. ``curve`` holds
    ``(threshold, precision, recall)`` rows in ascending threshold order. The
    area integrates precision over recall with the trapezoid rule, starting
    from recall 0 at the precision of the top-scored point. The best threshold
    maximizes F1, preferring the lower threshold on ties.
    """
    s, y = _pair(scores, labels)
    n_pos = int(y.sum())
    if n_pos == 0:
        raise ValueError("PR curve needs at least one positive label")
    order = np.argsort(-s, kind="stable")
    s_sorted, y_sorted = s[order], y[order]
    tp_cum = np.cumsum(y_sorted)
    fp_cum = np.cumsum(~y_sorted)
    # last index of each distinct score in descending order
    last = np.r_[np.nonzero(np.diff(s_sorted))[0], s.size - 1]
    thr = s_sorted[last]
    tp, fp = tp_cum[last], fp_cum[last]
    precision = tp / (tp + fp)
    recall = tp / n_pos

    r_path = np.r_[0.0, recall]
    p_path = np.r_[precision[0], precision]
    auc = float(np.sum(np.diff(r_path) * (p_path[1:] + p_path[:-1]) / 2.0))

    f1 = np.where(precision + recall > 0, 2 * precision * recall / np.maximum(precision + recall, 1e-300), 0.0)
    best = np.flatnonzero(f1 == f1.max())
    best_thr = float(thr[best].min())

    curve = [(float(t), float(p), float(r)) for t, p, r in zip(thr[::-1], precision[::-1], recall[::-1])]
    return curve, auc, best_thr


def mae(predictions, truths) -> float:
    p = np.asarray(predictions, dtype=np.float64).reshape(-1)
    t = np.asarray(truths, dtype=np.float64).reshape(-1)
    if p.shape != t.shape:
        raise ValueError(f"length mismatch: {p.size} vs {t.size}")
    return float(np.mean(np.abs(p - t)))


def threshold_report(scores, labels) -> MetricsReport:
    """Full report at the F1-optimal threshold."""
    curve, auc, thr = pr_curve_auc(scores, labels)
    p, r, f1, acc = binary_metrics(scores, labels, thr)
    return MetricsReport(p, r, f1, acc, curve, auc, extras={"threshold": thr})
