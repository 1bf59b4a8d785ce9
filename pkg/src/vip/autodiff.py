"""Minimal reverse-mode autodiff over float64 numpy buffers.

Define-by-run: every op builds the graph as it executes, so the tape is
rebuilt on each forward pass. Only the handful of ops the MLPs and the
selection loss need are provided; no broadcasting beyond bias-add.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (LabelOutOfRange, NonPositiveTemperature, NonScalarLoss,
                     ShapeMismatch)


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_backward", "_parents")

    def __init__(self, data, requires_grad=False):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self.requires_grad = requires_grad
        self._backward = None
        self._parents = ()

    @property
    def shape(self):
        return self.data.shape

    def zero_grad(self):
        self.grad = None

    def backward(self):
        """Populate grads of every reachable requires_grad tensor.

        Repeated calls without zeroing accumulate, matching the usual
        convention for gradient accumulation across sub-batches.
        """
        if self.data.shape != ():
            raise NonScalarLoss("backward requires a scalar loss")
        topo = _toposort(self)
        _accum(self, np.ones(()))
        for node in reversed(topo):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"


def _toposort(root: Tensor) -> list[Tensor]:
    order, seen = [], set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if id(p) not in seen:
                stack.append((p, False))
    return order


def _accum(t: Tensor, g: np.ndarray):
    if t.grad is None:
        t.grad = np.array(g, dtype=np.float64, copy=True)
    else:
        t.grad = t.grad + g


def _node(data, parents, backward) -> Tensor:
    out = Tensor(data)
    if any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._backward = backward
    return out


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.data.ndim != 2 or b.data.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeMismatch(f"cannot matmul {a.shape} by {b.shape}")

    def backward(g):
        _accum(a, g @ b.data.T)
        _accum(b, a.data.T @ g)

    return _node(a.data @ b.data, (a, b), backward)


def add(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise add; also accepts a (n,) bias against an (m, n) matrix."""
    a, b = as_tensor(a), as_tensor(b)
    bias_add = a.data.ndim == 2 and b.data.ndim == 1
    if not bias_add and a.shape != b.shape:
        raise ShapeMismatch(f"cannot add {a.shape} and {b.shape}")
    if bias_add and a.shape[1] != b.shape[0]:
        raise ShapeMismatch(f"cannot bias-add {b.shape} onto {a.shape}")

    def backward(g):
        _accum(a, g)
        _accum(b, g.sum(axis=0) if bias_add else g)

    return _node(a.data + b.data, (a, b), backward)


def mul(a: Tensor, b: Tensor) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.shape != b.shape:
        raise ShapeMismatch(f"cannot multiply {a.shape} and {b.shape}")

    def backward(g):
        _accum(a, g * b.data)
        _accum(b, g * a.data)

    return _node(a.data * b.data, (a, b), backward)


def scale(a: Tensor, c: float) -> Tensor:
    a = as_tensor(a)

    def backward(g):
        _accum(a, g * c)

    return _node(a.data * c, (a,), backward)


def relu(a: Tensor) -> Tensor:
    a = as_tensor(a)
    # subgradient at exactly 0 is 0
    gate = a.data > 0

    def backward(g):
        _accum(a, g * gate)

    return _node(np.maximum(a.data, 0.0), (a,), backward)


def concat(tensors, axis=1) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    sizes = [t.shape[axis] for t in tensors]
    splits = np.cumsum(sizes)[:-1]

    def backward(g):
        for t, piece in zip(tensors, np.split(g, splits, axis=axis)):
            _accum(t, piece)

    return _node(np.concatenate([t.data for t in tensors], axis=axis),
                 tuple(tensors), backward)


def tsum(a: Tensor) -> Tensor:
    a = as_tensor(a)

    def backward(g):
        _accum(a, np.full_like(a.data, float(g)))

    return _node(a.data.sum(), (a,), backward)


def _softmax(x: np.ndarray, tau: float) -> np.ndarray:
    z = (x - x.max(axis=1, keepdims=True)) / tau
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def softmax_row(a: Tensor, temperature: float = 1.0) -> Tensor:
    """Row-wise temperature softmax, stabilized by max subtraction."""
    if temperature <= 0:
        raise NonPositiveTemperature(f"temperature must be > 0, got {temperature}")
    a = as_tensor(a)
    p = _softmax(a.data, temperature)

    def backward(g):
        inner = (g * p).sum(axis=1, keepdims=True)
        _accum(a, p * (g - inner) / temperature)

    return _node(p, (a,), backward)


def cross_entropy(logits: Tensor, labels) -> Tensor:
    """Mean over rows of -log softmax(logits)[label], in nats."""
    logits = as_tensor(logits)
    labels = np.asarray(labels, dtype=np.int64)
    m, c = logits.shape
    if labels.shape != (m,):
        raise ShapeMismatch(f"expected {m} labels, got shape {labels.shape}")
    if labels.min() < 0 or labels.max() >= c:
        raise LabelOutOfRange(f"labels must lie in [0, {c})")
    z = logits.data - logits.data.max(axis=1, keepdims=True)
    logp = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
    rows = np.arange(m)
    loss = -logp[rows, labels].mean()

    def backward(g):
        grad = np.exp(logp)
        grad[rows, labels] -= 1.0
        _accum(logits, float(g) * grad / m)

    return _node(np.asarray(loss), (logits,), backward)


@dataclass
class AdamState:
    """Adam with optional AMSGrad, one state per parameter tensor."""
    lr: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    amsgrad: bool = True
    weight_decay: float = 0.0
    step_count: int = 0
    first_moment: dict = field(default_factory=dict)
    second_moment: dict = field(default_factory=dict)
    second_moment_max: dict = field(default_factory=dict)


def adam_step(params: list[Tensor], state: AdamState, lr: float | None = None):
    """One optimizer step in-place over params whose grads are set."""
    state.step_count += 1
    t = state.step_count
    lr = state.lr if lr is None else lr
    bc1 = 1.0 - state.beta1 ** t
    bc2 = 1.0 - state.beta2 ** t
    for i, p in enumerate(params):
        if p.grad is None:
            continue
        g = p.grad
        if g.shape != p.data.shape:
            raise ShapeMismatch("gradient shape differs from parameter shape")
        if state.weight_decay:
            g = g + state.weight_decay * p.data
        m = state.first_moment.setdefault(i, np.zeros_like(p.data))
        v = state.second_moment.setdefault(i, np.zeros_like(p.data))
        m *= state.beta1
        m += (1 - state.beta1) * g
        v *= state.beta2
        v += (1 - state.beta2) * g * g
        if state.amsgrad:
            vmax = state.second_moment_max.setdefault(i, np.zeros_like(p.data))
            np.maximum(vmax, v, out=vmax)
            denom = np.sqrt(vmax / bc2) + state.eps
        else:
            denom = np.sqrt(v / bc2) + state.eps
        p.data -= lr * (m / bc1) / denom


@dataclass
class SgdState:
    """SGD with classical momentum, the paper-profile phase-2 alternative."""
    lr: float = 1e-4
    momentum: float = 0.9
    velocity: dict = field(default_factory=dict)


def sgd_step(params: list[Tensor], state: SgdState, lr: float | None = None):
    lr = state.lr if lr is None else lr
    for i, p in enumerate(params):
        if p.grad is None:
            continue
        vel = state.velocity.setdefault(i, np.zeros_like(p.data))
        vel *= state.momentum
        vel += p.grad
        p.data -= lr * vel


@dataclass
class CosineLrSchedule:
    """Half-cosine decay from base_lr to 0 over t_max epochs, then flat."""
    base_lr: float
    t_max: int

    def lr(self, epoch: int) -> float:
        epoch = min(epoch, self.t_max)
        return self.base_lr * (1.0 + math.cos(math.pi * epoch / self.t_max)) / 2.0
