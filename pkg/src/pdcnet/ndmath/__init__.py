"""Minimal reverse-mode autodiff and the layer set used by the PDC model."""

from .gradcheck import grad_check
from .layers import LstmParams, attention_pool, attention_weights, bce_loss, bilstm, dense, glorot_uniform, lstm, lstm_cell
from .optim import Adam, AdamState, adam_step
from .tensor import Tape, Tensor, as_tensor, current_tape

__all__ = [
    "Adam",
    "AdamState",
    "LstmParams",
    "Tape",
    "Tensor",
    "adam_step",
    "as_tensor",
    "attention_pool",
    "attention_weights",
    "bce_loss",
    "bilstm",
    "current_tape",
    "dense",
    "glorot_uniform",
    "grad_check",
    "lstm",
    "lstm_cell",
]
