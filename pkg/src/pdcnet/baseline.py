"""Logistic-regression baseline on linker/payload Morgan fingerprints and peptide composition."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import checkpoint
from .chem import smiles_fingerprint
from .peptide import PeptideSequence, aac_features

FEATURE_DIM = 2 * 1024 + 20 + 1
KIND = "logreg"


def featurize_baseline(record) -> np.ndarray:
    """morgan(linker, 1024) | morgan(payload, 1024) | amino-acid composition (20) | min(T, 64) / 64."""
    seq = PeptideSequence(record.peptide)
    return np.concatenate(
        [
            smiles_fingerprint(record.linker_smiles).bits.astype(np.float64),
            smiles_fingerprint(record.payload_smiles).bits.astype(np.float64),
            aac_features(seq),
            [min(len(seq), 64) / 64.0],
        ]
    )


def _sigmoid(z):
    return np.where(z >= 0, 1.0 / (1.0 + np.exp(-np.abs(z))), np.exp(-np.abs(z)) / (1.0 + np.exp(-np.abs(z))))


@dataclass
class LrModel:
    weights: np.ndarray
    bias: float
    l2: float = 0.0

    def to_params(self) -> dict:
        return {"weights": self.weights, "bias": np.array([self.bias])}


def lr_loss(w: np.ndarray, b: float, X: np.ndarray, y: np.ndarray, l2: float, eps: float = 1e-12) -> float:
    """Mean BCE + (l2 / 2) * ||w||^2."""
    p = np.clip(_sigmoid(X @ w + b), eps, 1 - eps)
    return float(-np.mean(y * np.log(p) + (1 - y) * np.log(1 - p)) + 0.5 * l2 * (w @ w))


def lr_gradient(w: np.ndarray, b: float, X: np.ndarray, y: np.ndarray, l2: float) -> tuple[np.ndarray, float]:
    r = _sigmoid(X @ w + b) - y
    return X.T @ r / len(y) + l2 * w, float(r.mean())


def train_lr(features, labels, l2: float = 0.0, lr: float = 0.1, epochs: int = 500, seed: int = 0,
             history: list | None = None) -> LrModel:
    """Full-batch gradient descent from zero weights on L2-regularized mean BCE.

    The L2 term is applied as an implicit (proximal) step, so the update stays
    stable for any regularization strength. ``seed`` is recorded only; the fit
    itself is deterministic.
    """
    X = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if X.ndim != 2 or len(X) != len(y):
        raise ValueError("features must be an (N, D) matrix matching the labels")
    if len(y) < 2 or len(set(y.tolist())) < 2:
        raise ValueError("logistic regression needs at least two examples of both classes")
    w = np.zeros(X.shape[1])
    b = 0.0
    for _ in range(epochs):
        gw, gb = lr_gradient(w, b, X, y, 0.0)
        w = (w - lr * gw) / (1.0 + lr * l2)
        b -= lr * gb
        if history is not None:
            history.append(lr_loss(w, b, X, y, l2))
    return LrModel(w, b, l2)


def predict_lr(model: LrModel, features) -> np.ndarray | float:
    X = np.asarray(features, dtype=np.float64)
    if X.shape[-1] != len(model.weights):
        raise ValueError(f"feature width {X.shape[-1]} != model width {len(model.weights)}")
    p = _sigmoid(X @ model.weights + model.bias)
    return float(p) if X.ndim == 1 else p


def save_lr(model: LrModel, path, seed: int | None = None, extra: dict | None = None) -> None:
    checkpoint.save(path, KIND, {"l2": model.l2, "feature_dim": len(model.weights)}, model.to_params(), seed=seed, extra=extra)


def load_lr(path) -> LrModel:
    body = checkpoint.load(path, KIND)
    return LrModel(body["params"]["weights"], float(body["params"]["bias"][0]), float(body["config"]["l2"]))
