"""Metrics, training loop, cross-validation, hyperparameter search and ablations."""

from .metrics import (
    METRIC_NAMES,
    ConfusionCounts,
    MetricError,
    MetricsReport,
    evaluate,
    evaluate_counts,
    pr_auc,
    roc_auc,
    summarize,
    threshold_metrics,
)
from .training import (
    CrossValResult,
    EpochRecord,
    HpoResult,
    HpoSpace,
    TrainConfig,
    TrainResult,
    TrialResult,
    crossval,
    early_stopping,
    evaluate_model,
    hpo_search,
    predict_scores,
    run_ablation,
    train,
    write_history_csv,
)

__all__ = [
    "METRIC_NAMES",
    "ConfusionCounts",
    "CrossValResult",
    "EpochRecord",
    "HpoResult",
    "HpoSpace",
    "MetricError",
    "MetricsReport",
    "TrainConfig",
    "TrainResult",
    "TrialResult",
    "crossval",
    "early_stopping",
    "evaluate",
    "evaluate_counts",
    "evaluate_model",
    "hpo_search",
    "pr_auc",
    "predict_scores",
    "roc_auc",
    "run_ablation",
    "summarize",
    "threshold_metrics",
    "train",
    "write_history_csv",
]
