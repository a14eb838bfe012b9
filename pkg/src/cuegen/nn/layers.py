"""Layer primitives built on the tensor engine.

Every layer registers its parameters into a ParamStore under a dotted name
prefix at construction time, so checkpoints and freeze masks address them
by name. Weight init is uniform(-a, a) with a = 1/sqrt(fan_in); biases are
zero except the LSTM forget gate (1.0).
"""

from __future__ import annotations

import numpy as np

from . import tensor as T
from .optim import ParamStore
from .tensor import Tensor


def _uniform_init(rng: np.random.Generator, shape: tuple, fan_in: int) -> np.ndarray:
    a = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-a, a, size=shape).astype(T.default_dtype())


class Linear:
    def __init__(self, store: ParamStore, name: str, d_in: int, d_out: int,
                 rng: np.random.Generator, bias: bool = True):
        self.w = store.add(f"{name}.w", _uniform_init(rng, (d_in, d_out), d_in))
        self.b = store.add(f"{name}.b", np.zeros(d_out, dtype=T.default_dtype())) if bias else None

    def __call__(self, x: Tensor) -> Tensor:
        return T.linear(x, self.w, self.b)


class Conv1d:
    """Same-padded 1-D convolution over (T, C) sequences; odd kernel only."""

    def __init__(self, store: ParamStore, name: str, c_in: int, c_out: int,
                 kernel: int, rng: np.random.Generator, bias: bool = True):
        self.kernels = store.add(
            f"{name}.k", _uniform_init(rng, (c_out, c_in, kernel), c_in * kernel))
        self.b = store.add(f"{name}.b", np.zeros(c_out, dtype=T.default_dtype())) if bias else None

    def __call__(self, x: Tensor) -> Tensor:
        return T.conv1d(x, self.kernels, self.b)


class Embedding:
    def __init__(self, store: ParamStore, name: str, n_symbols: int, dim: int,
                 rng: np.random.Generator):
        self.table = store.add(f"{name}.table", _uniform_init(rng, (n_symbols, dim), dim))

    def __call__(self, ids: np.ndarray) -> Tensor:
        return T.embedding(ids, self.table)


class LSTMCell:
    def __init__(self, store: ParamStore, name: str, d_in: int, d_hidden: int,
                 rng: np.random.Generator):
        self.hidden = d_hidden
        self.wx = store.add(f"{name}.wx", _uniform_init(rng, (d_in, 4 * d_hidden), d_in))
        self.wh = store.add(f"{name}.wh", _uniform_init(rng, (d_hidden, 4 * d_hidden), d_hidden))
        b = np.zeros(4 * d_hidden, dtype=T.default_dtype())
        b[d_hidden:2 * d_hidden] = 1.0  # forget-gate bias
        self.b = store.add(f"{name}.b", b)

    def __call__(self, x: Tensor, h: Tensor, c: Tensor) -> tuple[Tensor, Tensor]:
        return T.lstm_step(x, h, c, self.wx, self.wh, self.b)

    def zero_state(self) -> tuple[Tensor, Tensor]:
        z = np.zeros(self.hidden, dtype=T.default_dtype())
        return Tensor(z.copy()), Tensor(z.copy())


class GRUCell:
    def __init__(self, store: ParamStore, name: str, d_in: int, d_hidden: int,
                 rng: np.random.Generator):
        self.hidden = d_hidden
        self.wx = store.add(f"{name}.wx", _uniform_init(rng, (d_in, 3 * d_hidden), d_in))
        self.bx = store.add(f"{name}.bx", np.zeros(3 * d_hidden, dtype=T.default_dtype()))
        self.wh = store.add(f"{name}.wh", _uniform_init(rng, (d_hidden, 3 * d_hidden), d_hidden))
        self.bh = store.add(f"{name}.bh", np.zeros(3 * d_hidden, dtype=T.default_dtype()))

    def __call__(self, x: Tensor, h: Tensor) -> Tensor:
        return T.gru_step(x, h, self.wx, self.bx, self.wh, self.bh)

    def zero_state(self) -> Tensor:
        return Tensor(np.zeros(self.hidden, dtype=T.default_dtype()))


def _row(xs: Tensor, i: int) -> Tensor:
    out = T._node(xs.data[i], (xs,))
    if out.requires_grad:
        def bw():
            g = np.zeros_like(xs.data)
            g[i] = out.grad
            T._accum(xs, g)
        out._backward = bw
    return out


def split_rows(xs: Tensor) -> list[Tensor]:
    """Split (L, d) into L vector tensors with a single scatter backward each."""
    return [_row(xs, i) for i in range(xs.data.shape[0])]


class BiLSTM:
    """Independent forward/backward LSTM cells; outputs concatenated per row."""

    def __init__(self, store: ParamStore, name: str, d_in: int, d_hidden_each: int,
                 rng: np.random.Generator):
        self.fwd = LSTMCell(store, f"{name}.fwd", d_in, d_hidden_each, rng)
        self.bwd = LSTMCell(store, f"{name}.bwd", d_in, d_hidden_each, rng)

    def __call__(self, xs: Tensor) -> Tensor:
        rows = split_rows(xs)
        h, c = self.fwd.zero_state()
        f_out = []
        for r in rows:
            h, c = self.fwd(r, h, c)
            f_out.append(h)
        h, c = self.bwd.zero_state()
        b_out: list[Tensor] = []
        for r in reversed(rows):
            h, c = self.bwd(r, h, c)
            b_out.append(h)
        b_out.reverse()
        return T.stack_rows([T.concat([f, b]) for f, b in zip(f_out, b_out)])


class BiGRU:
    def __init__(self, store: ParamStore, name: str, d_in: int, d_hidden_each: int,
                 rng: np.random.Generator):
        self.fwd = GRUCell(store, f"{name}.fwd", d_in, d_hidden_each, rng)
        self.bwd = GRUCell(store, f"{name}.bwd", d_in, d_hidden_each, rng)

    def __call__(self, xs: Tensor) -> Tensor:
        rows = split_rows(xs)
        h = self.fwd.zero_state()
        f_out = []
        for r in rows:
            h = self.fwd(r, h)
            f_out.append(h)
        h = self.bwd.zero_state()
        b_out: list[Tensor] = []
        for r in reversed(rows):
            h = self.bwd(r, h)
            b_out.append(h)
        b_out.reverse()
        return T.stack_rows([T.concat([f, b]) for f, b in zip(f_out, b_out)])
