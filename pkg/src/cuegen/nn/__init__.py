"""Minimal numpy-backed neural network core: autodiff tensor, layers, Adam."""

from . import tensor
from .checkpoint import load_checkpoint, save_checkpoint
from .layers import BiGRU, BiLSTM, Conv1d, Embedding, GRUCell, Linear, LSTMCell
from .optim import Adam, ParamStore
from .tensor import Tensor, backward, no_grad, using_dtype

__all__ = [
    "tensor", "Tensor", "backward", "no_grad", "using_dtype",
    "Linear", "Conv1d", "Embedding", "LSTMCell", "GRUCell", "BiLSTM", "BiGRU",
    "Adam", "ParamStore", "save_checkpoint", "load_checkpoint",
]
