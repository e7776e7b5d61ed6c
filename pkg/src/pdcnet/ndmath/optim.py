"""Adaptive-moment (Adam) optimizer."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .tensor import Tensor


@dataclass
class AdamState:
    step: int = 0
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)


def adam_step(params, grads, state: AdamState, lr: float, beta1=0.9, beta2=0.999, eps=1e-8):
    """Bias-corrected Adam update; returns (new param arrays, state). ``state`` is updated in place."""
    if not state.m:
        state.m = [np.zeros_like(p) for p in params]
        state.v = [np.zeros_like(p) for p in params]
    state.step += 1
    t = state.step
    c1 = 1.0 - beta1**t
    c2 = 1.0 - beta2**t
    out = []
    for k, (p, g) in enumerate(zip(params, grads)):
        state.m[k] = beta1 * state.m[k] + (1.0 - beta1) * g
        state.v[k] = beta2 * state.v[k] + (1.0 - beta2) * g * g
        mhat = state.m[k] / c1
        vhat = state.v[k] / c2
        out.append(p - lr * mhat / (np.sqrt(vhat) + eps))
    return out, state


class Adam:
    def __init__(self, params: list[Tensor], lr: float = 1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = list(params)
        self.lr = lr
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.state = AdamState()

    def zero_grad(self):
        for p in self.params:
            p.grad = None

    def step(self):
        grads = [np.zeros_like(p.data) if p.grad is None else p.grad for p in self.params]
        new, _ = adam_step([p.data for p in self.params], grads, self.state, self.lr, self.beta1, self.beta2, self.eps)
        for p, d in zip(self.params, new):
            p.data = d
