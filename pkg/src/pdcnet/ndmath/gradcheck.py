"""Central finite-difference check of tape gradients."""

from __future__ import annotations

import numpy as np

from ..rng import Rng
from .tensor import Tape, Tensor


def grad_check(f, inputs: list[Tensor], step: float = 1e-5, sample: int | None = None, seed: int = 0) -> float:
    """Max coordinate-wise relative error between reverse-mode and central-difference gradients.

    ``f(*inputs)`` must return a scalar Tensor and be pure. The relative error of a
    coordinate is ``|a - n| / max(1, |a|, |n|)``. With ``sample`` set, at most that
    many coordinates per input are checked, chosen by a seeded stream.
    """
    for t in inputs:
        t.data = np.array(t.data, dtype=np.float64, order="C")
        t.requires_grad = True
        t.grad = None
    with Tape() as tape:
        out = f(*inputs)
    if out.data.size != 1:
        raise ValueError("grad_check needs a scalar function")
    tape.backward(out)
    analytic = [np.zeros_like(t.data) if t.grad is None else t.grad.copy() for t in inputs]

    rng = Rng(seed)
    worst = 0.0
    for t, a in zip(inputs, analytic):
        flat = t.data.reshape(-1)
        coords = range(flat.size)
        if sample is not None and flat.size > sample:
            coords = rng.permutation(flat.size)[:sample]
        for k in coords:
            orig = flat[k]
            flat[k] = orig + step
            fp = f(*inputs).data.item()
            flat[k] = orig - step
            fm = f(*inputs).data.item()
            flat[k] = orig
            num = (fp - fm) / (2.0 * step)
            ana = a.reshape(-1)[k]
            worst = max(worst, abs(ana - num) / max(1.0, abs(ana), abs(num)))
    return worst
