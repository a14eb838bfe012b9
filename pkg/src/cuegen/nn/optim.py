"""Named parameter store with freeze masks, plus the Adam optimizer."""

from __future__ import annotations

import numpy as np

from ..errors import MissingGrad
from .tensor import Tensor


class ParamStore:
    """Ordered name -> Tensor map; frozen names are skipped by the optimizer."""

    def __init__(self):
        self._params: dict[str, Tensor] = {}
        self.freeze_mask: set[str] = set()

    def add(self, name: str, data: np.ndarray) -> Tensor:
        if name in self._params:
            raise ValueError(f"duplicate parameter name: {name}")
        t = Tensor(data, requires_grad=True)
        self._params[name] = t
        return t

    def __getitem__(self, name: str) -> Tensor:
        return self._params[name]

    def __contains__(self, name: str) -> bool:
        return name in self._params

    def names(self) -> list[str]:
        return list(self._params.keys())

    def items(self) -> list[tuple[str, Tensor]]:
        return list(self._params.items())

    def tensors(self) -> list[Tensor]:
        return list(self._params.values())

    def freeze(self, names) -> None:
        unknown = set(names) - set(self._params)
        if unknown:
            raise KeyError(f"cannot freeze unknown parameters: {sorted(unknown)}")
        self.freeze_mask.update(names)

    def trainable(self) -> list[tuple[str, Tensor]]:
        return [(n, t) for n, t in self._params.items() if n not in self.freeze_mask]

    def zero_grads(self) -> None:
        for t in self._params.values():
            t.grad = None

    def grad_norm(self) -> float:
        total = 0.0
        for n, t in self.trainable():
            if t.grad is not None:
                total += float(np.sum(t.grad.astype(np.float64) ** 2))
        return float(np.sqrt(total))

    def clip_grad_norm(self, max_norm: float) -> float:
        norm = self.grad_norm()
        if max_norm > 0 and norm > max_norm:
            scale = max_norm / norm
            for _, t in self.trainable():
                if t.grad is not None:
                    t.grad *= scale
        return norm

    def state_dict(self) -> dict[str, np.ndarray]:
        return {n: t.data.copy() for n, t in self._params.items()}

    def load_state(self, state: dict[str, np.ndarray], names=None) -> None:
        for n in (names if names is not None else state.keys()):
            t = self._params[n]
            arr = np.asarray(state[n], dtype=t.data.dtype)
            if arr.shape != t.data.shape:
                raise ValueError(f"shape mismatch for {n}: {arr.shape} vs {t.data.shape}")
            t.data = arr.copy()


class Adam:
    """Bias-corrected Adam over a ParamStore; frozen parameters are untouched.

    Gradients must be populated on every trainable parameter before step();
    step() clears all gradients afterwards.
    """

    def __init__(self, store: ParamStore, lr: float = 0.001,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.store = store
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step_count = 0
        self._m: dict[str, np.ndarray] = {}
        self._v: dict[str, np.ndarray] = {}

    def step(self) -> None:
        self.step_count += 1
        t = self.step_count
        bc1 = 1.0 - self.beta1 ** t
        bc2 = 1.0 - self.beta2 ** t
        for name, p in self.store.trainable():
            if p.grad is None:
                raise MissingGrad(f"no gradient for trainable parameter {name!r}")
            g = p.grad
            m = self._m.get(name)
            if m is None:
                m = self._m[name] = np.zeros_like(p.data)
                self._v[name] = np.zeros_like(p.data)
            v = self._v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            p.data -= self.lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)
        self.store.zero_grads()
