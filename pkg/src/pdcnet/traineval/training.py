"""Training with validation-AUC early stopping, cross-validation, random search and ablations."""

from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from ..dataset import DataError, DataSplit, kfold
from ..model import ABLATIONS, EmbeddingTables, ModelConfig, PdcNet, RecordInputs, prepare_inputs
from ..ndmath import tensor as nd
from ..ndmath.optim import Adam
from ..ndmath.tensor import Tape
from ..rng import Rng
from .metrics import MetricsReport, evaluate, roc_auc, summarize

log = logging.getLogger(__name__)


@dataclass
class TrainConfig:
    max_epochs: int = 50
    patience: int = 10
    lr: float = 1e-3
    batch_size: int = 32
    seed: int = 1
    pos_weight: float = 1.0
    track_train_auc: bool = False

    def __post_init__(self):
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be at least 1")
        if self.patience < 1:
            raise ValueError("patience must be at least 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be at least 1")


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    val_auc: float
    is_best: bool = False
    train_auc: float | None = None


@dataclass
class TrainResult:
    model: PdcNet
    history: list[EpochRecord]
    best_epoch: int
    stopped_early: bool

    @property
    def best_val_auc(self) -> float:
        return self.history[self.best_epoch - 1].val_auc

    def history_dicts(self) -> list[dict]:
        return [asdict(h) for h in self.history]


def early_stopping(
    run_epoch: Callable[[int], tuple],
    max_epochs: int = 50,
    patience: int = 10,
    on_improve: Callable[[int], None] | None = None,
) -> tuple[list[EpochRecord], int, bool]:
    """Drive ``run_epoch(epoch) -> (train_loss, val_auc[, train_auc])`` for epochs 1..max_epochs.

    A strictly higher validation AUC resets the counter and calls ``on_improve``;
    training stops once ``patience`` consecutive epochs fail to improve.
    Returns (history, best epoch, stopped early).
    """
    history: list[EpochRecord] = []
    best = -math.inf
    best_epoch = 0
    waited = 0
    for epoch in range(1, max_epochs + 1):
        loss, auc, *extra = run_epoch(epoch)
        rec = EpochRecord(epoch, float(loss), float(auc), train_auc=extra[0] if extra else None)
        if auc > best:
            best, best_epoch, waited = auc, epoch, 0
            rec.is_best = True
            if on_improve:
                on_improve(epoch)
        else:
            waited += 1
        history.append(rec)
        if waited >= patience:
            return history, best_epoch, True
    return history, best_epoch, False


def predict_scores(model: PdcNet, inputs: Sequence[RecordInputs], mask=frozenset()) -> np.ndarray:
    return np.array([model.predict_proba(x, mask) for x in inputs])


def _labels(records, idx) -> np.ndarray:
    labels = [records[i].label for i in idx]
    if any(y is None for y in labels):
        raise DataError("records used for training/evaluation must be labeled")
    return np.array(labels, dtype=int)


def train(
    model: PdcNet,
    records: Sequence,
    split: DataSplit,
    config: TrainConfig | None = None,
    tables: EmbeddingTables | None = None,
    inputs: Sequence[RecordInputs] | None = None,
    mask=frozenset(),
) -> TrainResult:
    """Adam on mean (optionally class-weighted) BCE with validation-AUC early stopping.

    The returned model holds the parameters of the best validation epoch.
    """
    config = config or TrainConfig()
    if not split.train or not split.val:
        raise DataError("training needs non-empty train and validation sets")
    y_train = _labels(records, split.train)
    y_val = _labels(records, split.val)
    if len(set(y_val.tolist())) < 2:
        raise DataError("validation set has a single class; AUC is undefined")
    if inputs is None:
        inputs = [prepare_inputs(r, model.config, tables) for r in records]
    train_inputs = [inputs[i] for i in split.train]
    val_inputs = [inputs[i] for i in split.val]

    mask = frozenset(mask)
    params = model.parameters()
    opt = Adam(params, lr=config.lr)
    stream = Rng(config.seed)
    best_state = {"state": model.state_dict()}

    def run_epoch(epoch: int) -> tuple:
        rng = stream.spawn(epoch)
        order = rng.permutation(len(train_inputs))
        total = 0.0
        for start in range(0, len(order), config.batch_size):
            batch = order[start : start + config.batch_size]
            opt.zero_grad()
            with Tape() as tape:
                losses = []
                for k in batch:
                    p = nd.sigmoid(model.logit(train_inputs[k], mask, dropout_rng=rng))
                    losses.append(nd.bce(p, float(y_train[k]), config.pos_weight))
                loss = nd.mean(nd.stack(losses))
            tape.backward(loss)
            opt.step()
            total += float(loss.data) * len(batch)
        auc = roc_auc(predict_scores(model, val_inputs, mask), y_val)
        log.debug("epoch %d loss %.5f val_auc %.4f", epoch, total / len(order), auc)
        if config.track_train_auc and len(set(y_train.tolist())) == 2:
            return total / len(order), auc, roc_auc(predict_scores(model, train_inputs, mask), y_train)
        return total / len(order), auc

    def snapshot(epoch: int):
        best_state["state"] = model.state_dict()

    history, best_epoch, stopped = early_stopping(run_epoch, config.max_epochs, config.patience, snapshot)
    model.load_state(best_state["state"])
    return TrainResult(model, history, best_epoch, stopped)


def write_history_csv(path, history: Sequence[EpochRecord]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["epoch", "train_loss", "val_auc", "is_best"])
        for h in history:
            w.writerow([h.epoch, repr(h.train_loss), repr(h.val_auc), int(h.is_best)])


def evaluate_model(model: PdcNet, records, idx, inputs=None, tables=None, mask=frozenset(), threshold=0.5) -> MetricsReport:
    if inputs is None:
        sub_inputs = [prepare_inputs(records[i], model.config, tables) for i in idx]
    else:
        sub_inputs = [inputs[i] for i in idx]
    return evaluate(predict_scores(model, sub_inputs, mask), _labels(records, idx), threshold)


# ---------------------------------------------------------------- cross-validation


@dataclass
class CrossValResult:
    folds: list[tuple[tuple[int, ...], tuple[int, ...]]]
    reports: list[MetricsReport]
    best_epochs: list[int]

    @property
    def summary(self) -> dict:
        return summarize(self.reports)

    def to_dict(self) -> dict:
        return {
            "k": len(self.reports),
            "folds": [
                {"fold": i, "val_indices": list(val), "best_epoch": be, "report": rep.to_dict()}
                for i, ((_, val), rep, be) in enumerate(zip(self.folds, self.reports, self.best_epochs))
            ],
            "summary": self.summary,
        }


def _fold_seed(seed: int, fold: int) -> int:
    return Rng(seed).spawn(fold).seed


def _train_job(job):
    records, inputs, split, train_config, model_config, init_seed, mask = job
    model = PdcNet(model_config, init_seed)
    result = train(model, records, split, train_config, inputs=inputs, mask=mask)
    return result


def _map(fn, jobs, n_jobs: int):
    if n_jobs <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(fn, jobs))


def crossval(
    records: Sequence,
    k: int = 5,
    seed: int = 1,
    config: TrainConfig | None = None,
    model_config: ModelConfig | None = None,
    tables: EmbeddingTables | None = None,
    jobs: int = 1,
) -> CrossValResult:
    """Train k independent models; fold i validates (and early-stops) on its held-out indices."""
    config = config or TrainConfig(seed=seed)
    model_config = model_config or ModelConfig()
    folds = kfold(len(records), k, seed)
    for i, (_, val) in enumerate(folds):
        if len({records[j].label for j in val}) < 2:
            raise DataError(f"fold {i} has a single-class validation set")
    inputs = [prepare_inputs(r, model_config, tables) for r in records]
    jobs_list = []
    for i, (tr, val) in enumerate(folds):
        split = DataSplit(seed, tr, val, ())
        jobs_list.append((records, inputs, split, config, model_config, _fold_seed(seed, i), frozenset()))
    results = _map(_train_job, jobs_list, jobs)
    reports = [evaluate_model(res.model, records, val, inputs) for res, (_, val) in zip(results, folds)]
    return CrossValResult(folds, reports, [r.best_epoch for r in results])


# ---------------------------------------------------------------- hyperparameter search


@dataclass
class HpoSpace:
    lr: tuple[float, float] = (1e-4, 1e-2)
    d_h: tuple[int, ...] = (128, 256)
    dropout: tuple[float, ...] = (0.0, 0.1, 0.3)
    batch_size: tuple[int, ...] = (16, 32, 64)
    trials: int = 10

    def sample(self, seed: int) -> list[dict]:
        """Trial configurations, each drawn as lr, d_h, dropout, batch_size from one stream."""
        rng = Rng(seed)
        out = []
        for _ in range(self.trials):
            out.append(
                {
                    "lr": rng.log_uniform(*self.lr),
                    "d_h": rng.choice(self.d_h),
                    "dropout": rng.choice(self.dropout),
                    "batch_size": rng.choice(self.batch_size),
                }
            )
        return out


@dataclass
class TrialResult:
    index: int
    params: dict
    best_val_auc: float | None
    best_epoch: int | None = None
    error: str | None = None


@dataclass
class HpoResult:
    best_index: int
    best_params: dict
    trials: list[TrialResult] = field(default_factory=list)
    best_model: PdcNet | None = None

    def to_dict(self) -> dict:
        return {"best_index": self.best_index, "best_params": self.best_params, "trials": [asdict(t) for t in self.trials]}


def _trial_job(job):
    idx, params, records, split, base_config, model_config, tables = job
    mc = replace(model_config, d_h=params["d_h"], dropout=params["dropout"])
    tc = replace(base_config, lr=params["lr"], batch_size=params["batch_size"])
    try:
        res = train(PdcNet(mc, tc.seed), records, split, tc, tables=tables)
    except Exception as exc:  # a failed trial is logged, not fatal
        log.warning("trial %d failed: %s", idx, exc)
        return TrialResult(idx, params, None, error=f"{type(exc).__name__}: {exc}"), None
    return TrialResult(idx, params, res.best_val_auc, res.best_epoch), res.model


def hpo_search(
    space: HpoSpace,
    records: Sequence,
    split: DataSplit,
    base_config: TrainConfig | None = None,
    model_config: ModelConfig | None = None,
    seed: int = 1,
    tables: EmbeddingTables | None = None,
    jobs: int = 1,
    configs: list[dict] | None = None,
) -> HpoResult:
    """Random search; best = highest best-epoch validation AUC, ties to the earlier trial."""
    base_config = base_config or TrainConfig(seed=seed)
    model_config = model_config or ModelConfig()
    configs = configs if configs is not None else space.sample(seed)
    jobs_list = [(i, c, records, split, base_config, model_config, tables) for i, c in enumerate(configs)]
    outcomes = _map(_trial_job, jobs_list, jobs)
    trials = [t for t, _ in outcomes]
    ok = [t for t in trials if t.best_val_auc is not None]
    if not ok:
        raise RuntimeError("all hyperparameter trials failed: " + "; ".join(t.error or "" for t in trials))
    best = max(ok, key=lambda t: (t.best_val_auc, -t.index))
    return HpoResult(best.index, best.params, trials, outcomes[best.index][1])


# ---------------------------------------------------------------- ablation


def run_ablation(
    records: Sequence,
    split: DataSplit,
    config: TrainConfig | None = None,
    model_config: ModelConfig | None = None,
    tables: EmbeddingTables | None = None,
    subset: str = "test",
    jobs: int = 1,
) -> dict:
    """Train the full model and the five channel-masked variants under identical settings.

    Returns a comparison report keyed by variant name with metrics on ``subset``.
    """
    config = config or TrainConfig()
    model_config = model_config or ModelConfig()
    inputs = [prepare_inputs(r, model_config, tables) for r in records]
    variants = {"full": frozenset(), **ABLATIONS}
    jobs_list = [(records, inputs, split, config, model_config, config.seed, m) for m in variants.values()]
    results = _map(_train_job, jobs_list, jobs)
    idx = getattr(split, subset)
    report = {}
    for (name, m), res in zip(variants.items(), results):
        rep = evaluate_model(res.model, records, idx, inputs, mask=m)
        report[name] = {"masked": sorted(m), "best_epoch": res.best_epoch, **rep.to_dict()}
    full_auc = report["full"]["metrics"]["AUC"]
    for name in report:
        report[name]["delta_auc_vs_full"] = report[name]["metrics"]["AUC"] - full_auc
    return report
