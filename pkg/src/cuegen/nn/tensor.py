"""Dense tensor with reverse-mode automatic differentiation.

Design notes:
- Data lives in a contiguous numpy array; every differentiable op records a
  closure that maps the output gradient back onto its parents. backward()
  walks the graph iteratively (no recursion limit) in reverse topological
  order.
- Recurrent cells, convolutions, and losses are fused single nodes with
  hand-derived backward passes; this keeps graphs for long decoder rollouts
  in the low thousands of nodes.
- Precision is a process-global switch: float32 for production, float64 for
  finite-difference gradient tests (see using_dtype).
"""

from __future__ import annotations

from contextlib import contextmanager
from typing import Iterable, Sequence

import numpy as np

from ..errors import DimensionMismatch, EvenKernel, NonScalarLoss

_DEFAULT_DTYPE = np.float32
_GRAD_ENABLED = True


def default_dtype():
    return _DEFAULT_DTYPE


def set_default_dtype(dtype) -> None:
    global _DEFAULT_DTYPE
    if dtype not in (np.float32, np.float64):
        raise ValueError("supported dtypes: float32, float64")
    _DEFAULT_DTYPE = dtype


@contextmanager
def using_dtype(dtype):
    """Temporarily switch the default precision (64-bit test mode)."""
    global _DEFAULT_DTYPE
    prev = _DEFAULT_DTYPE
    set_default_dtype(dtype)
    try:
        yield
    finally:
        _DEFAULT_DTYPE = prev


@contextmanager
def no_grad():
    """Disable graph construction (inference mode)."""
    global _GRAD_ENABLED
    prev = _GRAD_ENABLED
    _GRAD_ENABLED = False
    try:
        yield
    finally:
        _GRAD_ENABLED = prev


def grad_enabled() -> bool:
    return _GRAD_ENABLED


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False):
        if isinstance(data, np.ndarray):
            self.data = data if data.dtype == _DEFAULT_DTYPE else data.astype(_DEFAULT_DTYPE)
        else:
            self.data = np.asarray(data, dtype=_DEFAULT_DTYPE)
        self.grad = None
        self.requires_grad = requires_grad
        self._parents: tuple = ()
        self._backward = None

    @property
    def shape(self):
        return self.data.shape

    def item(self) -> float:
        return float(self.data)

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self) -> str:
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"


def _node(data: np.ndarray, parents: Sequence[Tensor]) -> Tensor:
    """Create a graph node if gradients are on and any parent needs them."""
    track = _GRAD_ENABLED and any(p.requires_grad for p in parents)
    out = Tensor(data, requires_grad=track)
    if track:
        out._parents = tuple(parents)
    return out


def _accum(t: Tensor, g: np.ndarray) -> None:
    if not t.requires_grad:
        return
    if t.grad is None:
        # copy: g may alias another node's grad buffer (pass-through backward)
        t.grad = np.array(g, copy=True)
    else:
        t.grad += g


def backward(loss: Tensor, params: Iterable[Tensor] | None = None) -> None:
    """Populate grads for every reachable tensor; zero-fill unreachable params.

    Raises NonScalarLoss unless loss holds exactly one element.
    """
    if loss.data.size != 1:
        raise NonScalarLoss(f"loss must be scalar, got shape {loss.data.shape}")
    topo: list[Tensor] = []
    visited: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(loss, False)]
    while stack:
        node, processed = stack.pop()
        if processed:
            topo.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if id(p) not in visited:
                stack.append((p, False))
    loss.grad = np.ones_like(loss.data)
    for node in reversed(topo):
        if node._backward is not None and node.grad is not None:
            node._backward()
    if params is not None:
        for p in params:
            if p.grad is None:
                p.grad = np.zeros_like(p.data)


# ---------------------------------------------------------------------------
# elementwise / shape ops
# ---------------------------------------------------------------------------

def add(a: Tensor, b: Tensor) -> Tensor:
    out = _node(a.data + b.data, (a, b))
    if out.requires_grad:
        def bw():
            g = out.grad
            _accum(a, _unbroadcast(g, a.data.shape))
            _accum(b, _unbroadcast(g, b.data.shape))
        out._backward = bw
    return out


def _unbroadcast(g: np.ndarray, shape: tuple) -> np.ndarray:
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g


def mul(a: Tensor, b: Tensor) -> Tensor:
    out = _node(a.data * b.data, (a, b))
    if out.requires_grad:
        def bw():
            _accum(a, _unbroadcast(out.grad * b.data, a.data.shape))
            _accum(b, _unbroadcast(out.grad * a.data, b.data.shape))
        out._backward = bw
    return out


def scale(a: Tensor, s: float) -> Tensor:
    out = _node(a.data * s, (a,))
    if out.requires_grad:
        def bw():
            _accum(a, out.grad * s)
        out._backward = bw
    return out


def tanh(a: Tensor) -> Tensor:
    y = np.tanh(a.data)
    out = _node(y, (a,))
    if out.requires_grad:
        def bw():
            _accum(a, (1.0 - y * y) * out.grad)
        out._backward = bw
    return out


def sigmoid(a: Tensor) -> Tensor:
    y = _sigmoid_np(a.data)
    out = _node(y, (a,))
    if out.requires_grad:
        def bw():
            _accum(a, y * (1.0 - y) * out.grad)
        out._backward = bw
    return out


def _sigmoid_np(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def relu(a: Tensor) -> Tensor:
    y = np.maximum(a.data, 0.0)
    out = _node(y, (a,))
    if out.requires_grad:
        def bw():
            _accum(a, (a.data > 0.0) * out.grad)
        out._backward = bw
    return out


def exp(a: Tensor) -> Tensor:
    y = np.exp(a.data)
    out = _node(y, (a,))
    if out.requires_grad:
        def bw():
            _accum(a, y * out.grad)
        out._backward = bw
    return out


def log(a: Tensor) -> Tensor:
    out = _node(np.log(a.data), (a,))
    if out.requires_grad:
        def bw():
            _accum(a, out.grad / a.data)
        out._backward = bw
    return out


def tsum(a: Tensor) -> Tensor:
    out = _node(np.asarray(a.data.sum()), (a,))
    if out.requires_grad:
        def bw():
            _accum(a, np.broadcast_to(out.grad, a.data.shape))
        out._backward = bw
    return out


def tmean(a: Tensor) -> Tensor:
    n = a.data.size
    out = _node(np.asarray(a.data.mean()), (a,))
    if out.requires_grad:
        def bw():
            _accum(a, np.broadcast_to(out.grad / n, a.data.shape))
        out._backward = bw
    return out


def matmul(a: Tensor, b: Tensor) -> Tensor:
    out = _node(a.data @ b.data, (a, b))
    if out.requires_grad:
        def bw():
            g = out.grad
            ad, bd = a.data, b.data
            if ad.ndim == 1 and bd.ndim == 2:      # (I,) @ (I,O) -> (O,)
                _accum(a, g @ bd.T)
                _accum(b, np.outer(ad, g))
            elif ad.ndim == 2 and bd.ndim == 2:    # (T,I) @ (I,O) -> (T,O)
                _accum(a, g @ bd.T)
                _accum(b, ad.T @ g)
            elif ad.ndim == 1 and bd.ndim == 1:    # dot -> scalar
                _accum(a, g * bd)
                _accum(b, g * ad)
            elif ad.ndim == 2 and bd.ndim == 1:    # (T,I) @ (I,) -> (T,)
                _accum(a, np.outer(g, bd))
                _accum(b, ad.T @ g)
            else:
                raise DimensionMismatch("matmul backward: unsupported ranks")
        out._backward = bw
    return out


def concat(parts: Sequence[Tensor], axis: int = 0) -> Tensor:
    out = _node(np.concatenate([p.data for p in parts], axis=axis), tuple(parts))
    if out.requires_grad:
        sizes = [p.data.shape[axis] for p in parts]
        offsets = np.cumsum([0] + sizes)
        def bw():
            g = out.grad
            for p, lo, hi in zip(parts, offsets[:-1], offsets[1:]):
                _accum(p, np.take(g, range(lo, hi), axis=axis))
        out._backward = bw
    return out


def stack_rows(rows: Sequence[Tensor]) -> Tensor:
    """Stack T same-shape vectors into a (T, d) matrix."""
    out = _node(np.stack([r.data for r in rows], axis=0), tuple(rows))
    if out.requires_grad:
        def bw():
            g = out.grad
            for i, r in enumerate(rows):
                _accum(r, g[i])
        out._backward = bw
    return out


def col_slice(a: Tensor, lo: int, hi: int) -> Tensor:
    out = _node(np.ascontiguousarray(a.data[..., lo:hi]), (a,))
    if out.requires_grad:
        def bw():
            g = np.zeros_like(a.data)
            g[..., lo:hi] = out.grad
            _accum(a, g)
        out._backward = bw
    return out


def reverse_rows(a: Tensor) -> Tensor:
    out = _node(np.ascontiguousarray(a.data[::-1]), (a,))
    if out.requires_grad:
        def bw():
            _accum(a, out.grad[::-1])
        out._backward = bw
    return out


def dropout(a: Tensor, p: float, rng: np.random.Generator, train: bool) -> Tensor:
    """Inverted dropout; identity when train is False or p == 0."""
    if not train or p <= 0.0:
        return a
    mask = (rng.random(a.data.shape) >= p).astype(a.data.dtype) / (1.0 - p)
    out = _node(a.data * mask, (a,))
    if out.requires_grad:
        def bw():
            _accum(a, out.grad * mask)
        out._backward = bw
    return out


# ---------------------------------------------------------------------------
# softmax family
# ---------------------------------------------------------------------------

def softmax_vec(a: Tensor) -> Tensor:
    x = a.data
    e = np.exp(x - x.max())
    s = e / e.sum()
    out = _node(s, (a,))
    if out.requires_grad:
        def bw():
            g = out.grad
            _accum(a, s * (g - float(np.dot(g, s))))
        out._backward = bw
    return out


def log_softmax_rows(a: Tensor) -> Tensor:
    x = a.data
    m = x.max(axis=-1, keepdims=True)
    z = x - m
    lse = np.log(np.exp(z).sum(axis=-1, keepdims=True))
    y = z - lse
    out = _node(y, (a,))
    if out.requires_grad:
        def bw():
            g = out.grad
            _accum(a, g - np.exp(y) * g.sum(axis=-1, keepdims=True))
        out._backward = bw
    return out


# ---------------------------------------------------------------------------
# fused layers
# ---------------------------------------------------------------------------

def linear(x: Tensor, w: Tensor, b: Tensor | None = None) -> Tensor:
    """x @ w (+ b); x is (I,) or (T, I), w is (I, O)."""
    y = x.data @ w.data
    if b is not None:
        y = y + b.data
    parents = (x, w) if b is None else (x, w, b)
    out = _node(y, parents)
    if out.requires_grad:
        def bw():
            g = out.grad
            xd = x.data
            _accum(x, g @ w.data.T)
            if xd.ndim == 1:
                _accum(w, np.outer(xd, g))
                if b is not None:
                    _accum(b, g)
            else:
                _accum(w, xd.T @ g)
                if b is not None:
                    _accum(b, g.sum(axis=0))
        out._backward = bw
    return out


def embedding(ids: np.ndarray, table: Tensor) -> Tensor:
    idx = np.asarray(ids, dtype=np.int64)
    out = _node(table.data[idx], (table,))
    if out.requires_grad:
        def bw():
            g = np.zeros_like(table.data)
            np.add.at(g, idx, out.grad)
            _accum(table, g)
        out._backward = bw
    return out


def _im2col(x: np.ndarray, k: int) -> np.ndarray:
    t, c = x.shape
    pad = k // 2
    xp = np.zeros((t + 2 * pad, c), dtype=x.dtype)
    xp[pad:pad + t] = x
    win = np.lib.stride_tricks.sliding_window_view(xp, (k, c))[:, 0]  # (t, k, c)
    return win.reshape(t, k * c)


def conv1d(x: Tensor, kernels: Tensor, bias: Tensor | None = None) -> Tensor:
    """Zero-padded same-length 1-D convolution.

    x: (T, C_in); kernels: (C_out, C_in, K) with K odd; output (T, C_out).
    """
    c_out, c_in, k = kernels.data.shape
    if k % 2 == 0:
        raise EvenKernel(f"kernel size must be odd, got {k}")
    if x.data.ndim != 2 or x.data.shape[1] != c_in:
        raise DimensionMismatch(
            f"conv1d input {x.data.shape} incompatible with kernels {kernels.data.shape}")
    col = _im2col(x.data, k)                                # (T, K*C_in)
    wmat = kernels.data.transpose(2, 1, 0).reshape(k * c_in, c_out)
    y = col @ wmat
    if bias is not None:
        y = y + bias.data
    parents = (x, kernels) if bias is None else (x, kernels, bias)
    out = _node(y, parents)
    if out.requires_grad:
        def bw():
            g = out.grad                                     # (T, C_out)
            t = x.data.shape[0]
            pad = k // 2
            dcol = g @ wmat.T                               # (T, K*C_in)
            dcol = dcol.reshape(t, k, c_in)
            dxp = np.zeros((t + 2 * pad, c_in), dtype=x.data.dtype)
            for j in range(k):
                dxp[j:j + t] += dcol[:, j, :]
            _accum(x, dxp[pad:pad + t])
            dw = (col.T @ g).reshape(k, c_in, c_out).transpose(2, 1, 0)
            _accum(kernels, dw)
            if bias is not None:
                _accum(bias, g.sum(axis=0))
        out._backward = bw
    return out


def lstm_step(x: Tensor, h: Tensor, c: Tensor,
              wx: Tensor, wh: Tensor, b: Tensor) -> tuple[Tensor, Tensor]:
    """One LSTM cell step; gate order (input, forget, cell, output).

    x: (I,), h/c: (H,), wx: (I,4H), wh: (H,4H), b: (4H,).
    Returns (h', c'); the fused backward lives on h'.
    """
    hdim = h.data.shape[0]
    if wx.data.shape != (x.data.shape[0], 4 * hdim) or wh.data.shape != (hdim, 4 * hdim):
        raise DimensionMismatch("lstm_step: weight shapes inconsistent with state dims")
    z = x.data @ wx.data + h.data @ wh.data + b.data
    zi, zf, zg, zo = z[:hdim], z[hdim:2 * hdim], z[2 * hdim:3 * hdim], z[3 * hdim:]
    gi = _sigmoid_np(zi)
    gf = _sigmoid_np(zf)
    gg = np.tanh(zg)
    go = _sigmoid_np(zo)
    c_new = gf * c.data + gi * gg
    tc = np.tanh(c_new)
    h_new = go * tc

    parents = (x, h, c, wx, wh, b)
    h_out = _node(h_new, parents)
    c_out = _node(c_new, parents)
    c_out._backward = None  # all work happens in h_out's closure
    if h_out.requires_grad:
        def bw():
            gh = h_out.grad if h_out.grad is not None else 0.0
            gc_in = c_out.grad if c_out.grad is not None else 0.0
            dc = gh * go * (1.0 - tc * tc) + gc_in
            dz = np.concatenate([
                dc * gg * gi * (1.0 - gi),
                dc * c.data * gf * (1.0 - gf),
                dc * gi * (1.0 - gg * gg),
                gh * tc * go * (1.0 - go),
            ])
            _accum(x, dz @ wx.data.T)
            _accum(h, dz @ wh.data.T)
            _accum(c, dc * gf)
            _accum(wx, np.outer(x.data, dz))
            _accum(wh, np.outer(h.data, dz))
            _accum(b, dz)
        h_out._backward = bw
    return h_out, c_out


def gru_step(x: Tensor, h: Tensor,
             wx: Tensor, bx: Tensor, wh: Tensor, bh: Tensor) -> Tensor:
    """One GRU cell step; gate order (reset, update, candidate).

    x: (I,), h: (H,), wx: (I,3H), wh: (H,3H), separate input/hidden biases so
    the reset gate multiplies the hidden candidate path (torch convention).
    """
    hdim = h.data.shape[0]
    if wx.data.shape != (x.data.shape[0], 3 * hdim) or wh.data.shape != (hdim, 3 * hdim):
        raise DimensionMismatch("gru_step: weight shapes inconsistent with state dims")
    zx = x.data @ wx.data + bx.data
    zh = h.data @ wh.data + bh.data
    r = _sigmoid_np(zx[:hdim] + zh[:hdim])
    u = _sigmoid_np(zx[hdim:2 * hdim] + zh[hdim:2 * hdim])
    hn_h = zh[2 * hdim:]
    n = np.tanh(zx[2 * hdim:] + r * hn_h)
    h_new = (1.0 - u) * n + u * h.data

    out = _node(h_new, (x, h, wx, bx, wh, bh))
    if out.requires_grad:
        def bw():
            g = out.grad
            dn = g * (1.0 - u)
            du = g * (h.data - n) * u * (1.0 - u)
            dpre_n = dn * (1.0 - n * n)
            dr = dpre_n * hn_h * r * (1.0 - r)
            dzx = np.concatenate([dr, du, dpre_n])
            dzh = np.concatenate([dr, du, dpre_n * r])
            _accum(x, dzx @ wx.data.T)
            _accum(h, dzh @ wh.data.T + g * u)
            _accum(wx, np.outer(x.data, dzx))
            _accum(bx, dzx)
            _accum(wh, np.outer(h.data, dzh))
            _accum(bh, dzh)
        out._backward = bw
    return out


# ---------------------------------------------------------------------------
# losses
# ---------------------------------------------------------------------------

def mse(pred: Tensor, target: np.ndarray) -> Tensor:
    if pred.data.shape != target.shape:
        raise DimensionMismatch(f"mse: {pred.data.shape} vs {target.shape}")
    diff = pred.data - target
    out = _node(np.asarray(np.mean(diff * diff)), (pred,))
    if out.requires_grad:
        def bw():
            _accum(pred, (2.0 / diff.size) * diff * out.grad)
        out._backward = bw
    return out


def bce_with_logits(logits: Tensor, targets: np.ndarray) -> Tensor:
    """Mean binary cross-entropy on raw logits (numerically stable)."""
    z = logits.data
    if z.shape != targets.shape:
        raise DimensionMismatch(f"bce: {z.shape} vs {targets.shape}")
    per = np.maximum(z, 0.0) - z * targets + np.log1p(np.exp(-np.abs(z)))
    out = _node(np.asarray(per.mean()), (logits,))
    if out.requires_grad:
        def bw():
            _accum(logits, (_sigmoid_np(z) - targets) / z.size * out.grad)
        out._backward = bw
    return out


def weighted_sum(terms: Sequence[Tensor], weights: Sequence[float]) -> Tensor:
    total = np.asarray(sum(float(w) * t.data for t, w in zip(terms, weights)))
    out = _node(total, tuple(terms))
    if out.requires_grad:
        def bw():
            for t, w in zip(terms, weights):
                if w != 0.0:
                    _accum(t, out.grad * w)
        out._backward = bw
    return out
