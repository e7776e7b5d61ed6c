"""Binary-classification metrics: ACC, AUC, F1, SE, SP, MCC, BA, PRAUC, PPV, NPV."""

from __future__ import annotations

import json
import math
import statistics
from dataclasses import dataclass, field

import numpy as np

METRIC_NAMES = ("ACC", "AUC", "F1", "SE", "SP", "MCC", "BA", "PRAUC", "PPV", "NPV")


class MetricError(ValueError):
    pass


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise MetricError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @classmethod
    def from_predictions(cls, scores, labels, threshold: float = 0.5) -> "ConfusionCounts":
        tp = fp = tn = fn = 0
        for s, y in zip(scores, labels):
            pred = s >= threshold
            if y:
                tp += pred
                fn += not pred
            else:
                fp += pred
                tn += not pred
        return cls(int(tp), int(fp), int(tn), int(fn))


def _ratio(num, den, name, flags):
    if den == 0:
        flags.append(f"{name}:zero_denominator")
        return 0.0
    return num / den


def threshold_metrics(c: ConfusionCounts) -> tuple[dict[str, float], list[str]]:
    """Count-based metrics. Zero denominators give 0.0 and a ``<metric>:zero_denominator`` flag."""
    flags: list[str] = []
    tp, fp, tn, fn = c.tp, c.fp, c.tn, c.fn
    m = {}
    m["ACC"] = _ratio(tp + tn, tp + tn + fp + fn, "ACC", flags)
    m["F1"] = _ratio(2 * tp, 2 * tp + fn + fp, "F1", flags)
    m["SE"] = _ratio(tp, tp + fn, "SE", flags)
    # specificity is TN / (TN + FP)
    m["SP"] = _ratio(tn, tn + fp, "SP", flags)
    den = (tp + fn) * (tp + fp) * (tn + fn) * (tn + fp)
    m["MCC"] = _ratio(tp * tn - fn * fp, math.sqrt(den), "MCC", flags)
    m["BA"] = (m["SE"] + m["SP"]) / 2
    m["PPV"] = _ratio(tp, tp + fp, "PPV", flags)
    m["NPV"] = _ratio(tn, tn + fn, "NPV", flags)
    return m, flags


def _check_binary(scores, labels):
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise MetricError(f"scores and labels must be equal-length vectors ({scores.shape} vs {labels.shape})")
    if not np.isin(labels, (0, 1)).all():
        raise MetricError("labels must be 0 or 1")
    labels = labels.astype(int)
    npos = int(labels.sum())
    if npos == 0 or npos == len(labels):
        raise MetricError("AUC/PRAUC need both classes in the labels")
    return scores, labels


def roc_auc(scores, labels) -> float:
    """Rank-sum (Mann-Whitney) AUC with average ranks for tied scores."""
    scores, labels = _check_binary(scores, labels)
    order = np.argsort(scores, kind="mergesort")
    s = scores[order]
    ranks = np.empty(len(s))
    i = 0
    while i < len(s):
        j = i
        while j + 1 < len(s) and s[j + 1] == s[i]:
            j += 1
        ranks[i : j + 1] = (i + j) / 2.0 + 1.0
        i = j + 1
    rank_of = np.empty(len(s))
    rank_of[order] = ranks
    npos = int(labels.sum())
    nneg = len(labels) - npos
    return (rank_of[labels == 1].sum() - npos * (npos + 1) / 2.0) / (npos * nneg)


def pr_auc(scores, labels) -> float:
    """Step-wise area under the precision-recall curve: sum over thresholds of dRecall * precision."""
    scores, labels = _check_binary(scores, labels)
    order = np.argsort(-scores, kind="mergesort")
    s, y = scores[order], labels[order]
    npos = int(y.sum())
    tp = fp = 0
    prev_recall = 0.0
    area = 0.0
    i = 0
    while i < len(s):
        j = i
        while j < len(s) and s[j] == s[i]:
            tp += y[j]
            fp += 1 - y[j]
            j += 1
        recall = tp / npos
        area += (recall - prev_recall) * (tp / (tp + fp))
        prev_recall = recall
        i = j
    return float(area)


@dataclass
class MetricsReport:
    metrics: dict[str, float]
    counts: ConfusionCounts
    threshold: float = 0.5
    flags: list[str] = field(default_factory=list)

    def __getitem__(self, name):
        return self.metrics[name]

    def to_dict(self) -> dict:
        return {
            "metrics": {k: self.metrics[k] for k in METRIC_NAMES if k in self.metrics},
            "counts": {"TP": self.counts.tp, "FP": self.counts.fp, "TN": self.counts.tn, "FN": self.counts.fn},
            "threshold": self.threshold,
            "flags": list(self.flags),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def format_row(self) -> str:
        return "  ".join(f"{k}={self.metrics[k]:.4f}" for k in METRIC_NAMES if k in self.metrics)


def evaluate_counts(counts: ConfusionCounts, threshold: float = 0.5) -> MetricsReport:
    """Report with the eight count-based metrics only (no AUC / PRAUC)."""
    m, flags = threshold_metrics(counts)
    return MetricsReport(m, counts, threshold, flags)


def evaluate(scores, labels, threshold: float = 0.5) -> MetricsReport:
    """All ten metrics; a score >= threshold is a positive prediction."""
    scores, labels = _check_binary(scores, labels)
    counts = ConfusionCounts.from_predictions(scores, labels, threshold)
    m, flags = threshold_metrics(counts)
    m["AUC"] = roc_auc(scores, labels)
    m["PRAUC"] = pr_auc(scores, labels)
    return MetricsReport(m, counts, threshold, flags)


def summarize(reports: list[MetricsReport]) -> dict[str, dict[str, float]]:
    """Per-metric mean and sample standard deviation across reports."""
    out = {}
    for name in METRIC_NAMES:
        vals = [r.metrics[name] for r in reports if name in r.metrics]
        if not vals:
            continue
        sd = statistics.stdev(vals) if len(vals) > 1 else 0.0
        out[name] = {"mean": statistics.fmean(vals), "std": sd, "formatted": f"{statistics.fmean(vals):.4f} ± {sd:.4f}"}
    return out
