"""Tape-based reverse-mode autodiff over float64 numpy arrays."""

from __future__ import annotations

import threading

import numpy as np

_local = threading.local()


def _tape_stack() -> list:
    if not hasattr(_local, "stack"):
        _local.stack = []
    return _local.stack


def current_tape() -> "Tape | None":
    stack = _tape_stack()
    return stack[-1] if stack else None


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "name")

    def __init__(self, data, requires_grad: bool = False, name: str | None = None):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self.requires_grad = requires_grad
        self.name = name

    @property
    def shape(self):
        return self.data.shape

    def __len__(self):
        return len(self.data)

    def __repr__(self):
        label = f" {self.name}" if self.name else ""
        return f"Tensor{label}(shape={self.data.shape})"

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data)

    def zero_grad(self):
        self.grad = None

    # operator sugar
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __matmul__(self, other):
        return matmul(self, other)

    def __neg__(self):
        return scale(self, -1.0)

    def __getitem__(self, idx):
        return getitem(self, idx)

    @property
    def T(self):
        return transpose(self)


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _acc(t: Tensor, g: np.ndarray):
    if not t.requires_grad:
        return
    if t.grad is None:
        t.grad = np.array(g, dtype=np.float64, copy=True)
    else:
        t.grad = t.grad + g


class Tape:
    """Records primitive ops in execution order; ``backward`` replays them in reverse.

    Use as a context manager. Ops run outside any tape are not recorded.
    """

    def __init__(self):
        self.records: list[tuple[tuple[Tensor, ...], object]] = []

    def __enter__(self):
        _tape_stack().append(self)
        return self

    def __exit__(self, *exc):
        _tape_stack().pop()
        return False

    def __len__(self):
        return len(self.records)

    def record(self, outputs, backward):
        self.records.append((outputs, backward))

    def backward(self, loss: Tensor, grad=None):
        loss.grad = np.ones_like(loss.data) if grad is None else np.asarray(grad, dtype=np.float64)
        for outputs, fn in reversed(self.records):
            grads = [o.grad for o in outputs]
            if all(g is None for g in grads):
                continue
            fn(*[np.zeros_like(o.data) if g is None else g for o, g in zip(outputs, grads)])


def _op(inputs, data, backward, n_out: int = 1):
    """Wrap op result(s); record on the active tape if any input needs a gradient."""
    tape = current_tape()
    needs = tape is not None and any(isinstance(t, Tensor) and t.requires_grad for t in inputs)
    if n_out == 1:
        outs = (Tensor(data, requires_grad=needs),)
    else:
        outs = tuple(Tensor(d, requires_grad=needs) for d in data)
    if needs:
        tape.record(outs, backward)
    return outs[0] if n_out == 1 else outs


def _unbroadcast(g: np.ndarray, shape) -> np.ndarray:
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for ax, n in enumerate(shape):
        if n == 1 and g.shape[ax] != 1:
            g = g.sum(axis=ax, keepdims=True)
    return g


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)

    def backward(g):
        _acc(a, _unbroadcast(g, a.shape))
        _acc(b, _unbroadcast(g, b.shape))

    return _op((a, b), a.data + b.data, backward)


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)

    def backward(g):
        _acc(a, _unbroadcast(g, a.shape))
        _acc(b, _unbroadcast(-g, b.shape))

    return _op((a, b), a.data - b.data, backward)


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)

    def backward(g):
        _acc(a, _unbroadcast(g * b.data, a.shape))
        _acc(b, _unbroadcast(g * a.data, b.shape))

    return _op((a, b), a.data * b.data, backward)


def scale(a, c: float) -> Tensor:
    a = as_tensor(a)
    return _op((a,), a.data * c, lambda g: _acc(a, g * c))


def matmul(a, b) -> Tensor:
    """Matrix product for 1-D / 2-D operands (numpy semantics)."""
    a, b = as_tensor(a), as_tensor(b)
    out = a.data @ b.data

    def backward(g):
        ad, bd = a.data, b.data
        if ad.ndim == 1 and bd.ndim == 1:
            _acc(a, g * bd)
            _acc(b, g * ad)
        elif ad.ndim == 1:
            _acc(a, bd @ g)
            _acc(b, np.outer(ad, g))
        elif bd.ndim == 1:
            _acc(a, np.outer(g, bd))
            _acc(b, ad.T @ g)
        else:
            _acc(a, g @ bd.T)
            _acc(b, ad.T @ g)

    return _op((a, b), out, backward)


def transpose(a) -> Tensor:
    a = as_tensor(a)
    return _op((a,), a.data.T, lambda g: _acc(a, g.T))


def getitem(a, idx) -> Tensor:
    a = as_tensor(a)

    def backward(g):
        full = np.zeros_like(a.data)
        np.add.at(full, idx, g)
        _acc(a, full)

    return _op((a,), a.data[idx], backward)


def tanh(a) -> Tensor:
    a = as_tensor(a)
    y = np.tanh(a.data)
    return _op((a,), y, lambda g: _acc(a, g * (1.0 - y * y)))


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def sigmoid(a) -> Tensor:
    a = as_tensor(a)
    y = _sigmoid(np.atleast_1d(a.data)).reshape(a.data.shape)
    return _op((a,), y, lambda g: _acc(a, g * y * (1.0 - y)))


def softmax_rows(a) -> Tensor:
    """Softmax over the last axis, max-shifted for stability."""
    a = as_tensor(a)
    z = a.data - a.data.max(axis=-1, keepdims=True)
    e = np.exp(z)
    y = e / e.sum(axis=-1, keepdims=True)

    def backward(g):
        _acc(a, y * (g - (g * y).sum(axis=-1, keepdims=True)))

    return _op((a,), y, backward)


def mean(a, axis=None) -> Tensor:
    a = as_tensor(a)
    n = a.data.size if axis is None else a.data.shape[axis]

    def backward(g):
        g = np.asarray(g)
        if axis is not None:
            g = np.expand_dims(g, axis)
        _acc(a, np.broadcast_to(g, a.shape) / n)

    return _op((a,), a.data.mean(axis=axis), backward)


def sum(a, axis=None) -> Tensor:  # noqa: A001
    a = as_tensor(a)

    def backward(g):
        g = np.asarray(g)
        if axis is not None:
            g = np.expand_dims(g, axis)
        _acc(a, np.broadcast_to(g, a.shape))

    return _op((a,), a.data.sum(axis=axis), backward)


def concat(parts, axis: int = 0) -> Tensor:
    parts = [as_tensor(p) for p in parts]
    sizes = [p.shape[axis] for p in parts]
    bounds = np.cumsum([0] + sizes)

    def backward(g):
        for p, lo, hi in zip(parts, bounds[:-1], bounds[1:]):
            sl = [slice(None)] * g.ndim
            sl[axis] = slice(lo, hi)
            _acc(p, g[tuple(sl)])

    return _op(tuple(parts), np.concatenate([p.data for p in parts], axis=axis), backward)


def stack(parts, axis: int = 0) -> Tensor:
    parts = [as_tensor(p) for p in parts]

    def backward(g):
        for k, p in enumerate(parts):
            _acc(p, np.take(g, k, axis=axis))

    return _op(tuple(parts), np.stack([p.data for p in parts], axis=axis), backward)


def lstm_step(gx, h, c, wh):
    """One LSTM cell step given the precomputed input projection ``gx`` (4*d_h,).

    Gate layout along the last axis: input, forget, cell candidate, output.
    Returns (h_new, c_new).
    """
    gx, h, c, wh = (as_tensor(t) for t in (gx, h, c, wh))
    d = h.shape[-1]
    z = gx.data + h.data @ wh.data
    zi, zf, zg, zo = z[:d], z[d : 2 * d], z[2 * d : 3 * d], z[3 * d :]
    i, f, o = _sigmoid(zi), _sigmoid(zf), _sigmoid(zo)
    gg = np.tanh(zg)
    c_new = f * c.data + i * gg
    tc = np.tanh(c_new)
    h_new = o * tc

    def backward(dh, dc):
        dc_total = dc + dh * o * (1.0 - tc * tc)
        dz = np.concatenate(
            [
                dc_total * gg * i * (1.0 - i),
                dc_total * c.data * f * (1.0 - f),
                dc_total * i * (1.0 - gg * gg),
                dh * tc * o * (1.0 - o),
            ]
        )
        _acc(gx, dz)
        _acc(h, wh.data @ dz)
        _acc(c, dc_total * f)
        _acc(wh, np.outer(h.data, dz))

    return _op((gx, h, c, wh), (h_new, c_new), backward, n_out=2)


def bce(p, y: float, pos_weight: float = 1.0, eps: float = 1e-7) -> Tensor:
    """-(w*y*ln p + (1-y)*ln(1-p)) with p clamped to [eps, 1-eps]; zero gradient when clamped."""
    p = as_tensor(p)
    raw = p.data
    pc = np.clip(raw, eps, 1.0 - eps)
    loss = -(pos_weight * y * np.log(pc) + (1.0 - y) * np.log(1.0 - pc))
    inside = (raw > eps) & (raw < 1.0 - eps)

    def backward(g):
        d = -pos_weight * y / pc + (1.0 - y) / (1.0 - pc)
        _acc(p, g * d * inside)

    return _op((p,), loss, backward)
