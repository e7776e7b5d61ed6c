"""Channel-level Shapley attribution, residue attention traces and fused-feature export."""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass
from itertools import combinations
from math import factorial

import numpy as np

from .model import CHANNELS, EmbeddingTables, PdcNet, RecordInputs, prepare_inputs
from .ndmath import layers
from .ndmath import tensor as nd
from .ndmath.tensor import Tensor


@dataclass
class ShapleyReport:
    attributions: dict[str, float]
    baseline: float  # f(empty coalition): every channel zeroed
    full: float  # f(all channels)
    output: str = "probability"

    def efficiency_gap(self) -> float:
        return abs(sum(self.attributions.values()) - (self.full - self.baseline))

    def to_dict(self) -> dict:
        return asdict(self)


def shapley_from_values(values: dict[frozenset, float], players=CHANNELS) -> dict[str, float]:
    """Exact Shapley values from a complete table of coalition values."""
    n = len(players)
    phi = {}
    for p in players:
        others = [q for q in players if q != p]
        total = 0.0
        for size in range(n):
            w = factorial(size) * factorial(n - size - 1) / factorial(n)
            for s in combinations(others, size):
                s = frozenset(s)
                total += w * (values[s | {p}] - values[s])
        phi[p] = total
    return phi


def coalition_values(model: PdcNet, inputs: RecordInputs, output: str = "probability") -> dict[frozenset, float]:
    """Model output for each of the 16 channel coalitions; absent channels are zeroed."""
    if output not in ("probability", "logit"):
        raise ValueError("output must be 'probability' or 'logit'")
    full = model.channel_tensors(inputs)
    zeros = {ch: Tensor(np.zeros_like(t.data)) for ch, t in full.items()}
    values = {}
    for size in range(len(CHANNELS) + 1):
        for s in combinations(CHANNELS, size):
            s = frozenset(s)
            chans = {ch: full[ch] if ch in s else zeros[ch] for ch in CHANNELS}
            z = model.head_logit(model.fuse(chans))
            values[s] = float(z.data) if output == "logit" else float(nd.sigmoid(z).data)
    return values


def channel_shapley(model: PdcNet, record, tables: EmbeddingTables | None = None, output: str = "probability",
                    inputs: RecordInputs | None = None) -> ShapleyReport:
    inputs = inputs or prepare_inputs(record, model.config, tables)
    values = coalition_values(model, inputs, output)
    phi = shapley_from_values(values)
    return ShapleyReport(phi, values[frozenset()], values[frozenset(CHANNELS)], output)


@dataclass
class AttentionTrace:
    residues: list[str]
    weights: list[float]

    def to_dict(self) -> dict:
        return asdict(self)


def attention_from_states(H: np.ndarray) -> np.ndarray:
    """Mean attention each position receives (column mean of the attention matrix), normalized."""
    A = layers.attention_weights(Tensor(H)).data
    w = A.mean(axis=0)
    return w / w.sum()


def attention_trace(model: PdcNet, record, tables: EmbeddingTables | None = None,
                    inputs: RecordInputs | None = None) -> AttentionTrace:
    inputs = inputs or prepare_inputs(record, model.config, tables)
    H = model.peptide_states(inputs).data
    return AttentionTrace(list(inputs.sequence), attention_from_states(H).tolist())


def explain_records(model: PdcNet, records, tables: EmbeddingTables | None = None, output: str = "probability") -> list[dict]:
    out = []
    for r in records:
        inputs = prepare_inputs(r, model.config, tables)
        out.append(
            {
                "id": r.id,
                "shapley": channel_shapley(model, r, output=output, inputs=inputs).to_dict(),
                "attention": attention_trace(model, r, inputs=inputs).to_dict(),
            }
        )
    return out


def write_explanations(path, explanations: list[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(explanations, fh, indent=2, sort_keys=True)


def export_fused(model: PdcNet, records, path, mode: str = "post_training", tables: EmbeddingTables | None = None) -> int:
    """Write one CSV row per record: id, mode, fused features x0000.., label. Returns the row count."""
    if mode not in ("pre_training", "post_training"):
        raise ValueError("mode must be 'pre_training' or 'post_training'")
    width = model.config.fused_dim
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "mode", *(f"x{k:04d}" for k in range(width)), "label"])
        for r in records:
            fused = model.encode(prepare_inputs(r, model.config, tables)).fused
            w.writerow([r.id, mode, *(repr(float(v)) for v in fused), "" if r.label is None else r.label])
    return len(records)
