"""Layers built from tape primitives: dense, LSTM, BiLSTM, attention pooling, BCE."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..rng import Rng
from . import tensor as nd
from .tensor import Tensor, as_tensor


def glorot_uniform(rng: Rng, fan_in: int, fan_out: int, shape) -> np.ndarray:
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    n = int(np.prod(shape))
    return ((rng.uniform_array(n) * 2.0 - 1.0) * limit).reshape(shape)


def dense(x, W, b) -> Tensor:
    """W x + b with W of shape (out, in); x may be a vector or a batch of row vectors."""
    x, W, b = as_tensor(x), as_tensor(W), as_tensor(b)
    if x.shape[-1] != W.shape[1]:
        raise ValueError(f"dense: input width {x.shape[-1]} does not match weight {W.shape}")
    if b.shape != (W.shape[0],):
        raise ValueError(f"dense: bias shape {b.shape} does not match weight {W.shape}")
    return nd.add(nd.matmul(x, nd.transpose(W)), b)


@dataclass
class LstmParams:
    """Input-to-gate ``wx`` (d_in, 4 d_h), hidden-to-gate ``wh`` (d_h, 4 d_h), bias ``b`` (4 d_h).

    Gate blocks are ordered input, forget, cell, output.
    """

    wx: Tensor
    wh: Tensor
    b: Tensor

    @property
    def hidden(self) -> int:
        return self.wh.shape[0]

    @property
    def input_dim(self) -> int:
        return self.wx.shape[0]

    @classmethod
    def init(cls, rng: Rng, d_in: int, d_h: int, prefix: str = "lstm") -> "LstmParams":
        wx = glorot_uniform(rng, d_in, 4 * d_h, (d_in, 4 * d_h))
        wh = glorot_uniform(rng, d_h, 4 * d_h, (d_h, 4 * d_h))
        b = np.zeros(4 * d_h)
        b[d_h : 2 * d_h] = 1.0
        return cls(
            Tensor(wx, True, f"{prefix}.wx"),
            Tensor(wh, True, f"{prefix}.wh"),
            Tensor(b, True, f"{prefix}.b"),
        )

    def tensors(self) -> list[Tensor]:
        return [self.wx, self.wh, self.b]


def lstm_cell(x, h, c, p: LstmParams):
    """Single LSTM step; returns (h_new, c_new)."""
    gx = nd.add(nd.matmul(as_tensor(x), p.wx), p.b)
    return nd.lstm_step(gx, h, c, p.wh)


def lstm(X, p: LstmParams, reverse: bool = False) -> list[Tensor]:
    """Hidden states of a unidirectional LSTM over the rows of X, zero initial state.

    The returned list is indexed by time step even when ``reverse`` is set.
    """
    X = as_tensor(X)
    if X.data.ndim != 2 or X.shape[1] != p.input_dim:
        raise ValueError(f"lstm: expected (T, {p.input_dim}) input, got {X.shape}")
    T = X.shape[0]
    if T < 1:
        raise ValueError("lstm: empty sequence")
    gx_all = nd.add(nd.matmul(X, p.wx), p.b)
    h = Tensor(np.zeros(p.hidden))
    c = Tensor(np.zeros(p.hidden))
    out: list[Tensor] = [None] * T
    steps = range(T - 1, -1, -1) if reverse else range(T)
    for t in steps:
        h, c = nd.lstm_step(nd.getitem(gx_all, t), h, c, p.wh)
        out[t] = h
    return out


def bilstm(X, fwd: LstmParams, bwd: LstmParams) -> Tensor:
    """T x (2 d_h): row t is [forward h_t, backward h_t]."""
    hf = lstm(X, fwd)
    hb = lstm(X, bwd, reverse=True)
    return nd.concat([nd.stack(hf), nd.stack(hb)], axis=1)


def attention_weights(H) -> Tensor:
    """softmax(H H^T / sqrt(d)) with d the row width of H."""
    H = as_tensor(H)
    d = H.shape[1]
    scores = nd.scale(nd.matmul(H, nd.transpose(H)), 1.0 / math.sqrt(d))
    return nd.softmax_rows(scores)


def attention_pool(H, return_weights: bool = False):
    """Self-attention with Q = K = V = H, then mean over the T context rows."""
    H = as_tensor(H)
    if H.data.ndim != 2 or H.shape[0] < 1:
        raise ValueError(f"attention_pool: expected a non-empty (T, d) matrix, got {H.shape}")
    A = attention_weights(H)
    t1 = nd.mean(nd.matmul(A, H), axis=0)
    return (t1, A) if return_weights else t1


def bce_loss(p, y: float, pos_weight: float = 1.0, eps: float = 1e-7) -> Tensor:
    return nd.bce(p, y, pos_weight, eps)
