"""Classifier and querier MLPs plus the straight-through query selection.

Both networks consume the masked answer vector (unobserved entries zeroed)
and share the same fully-connected design without sharing parameters.
"""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .errors import (AllQueriesMasked, CorruptCheckpoint,
                     NonPositiveTemperature, ShapeMismatch, VersionMismatch)

DEFAULT_HIDDEN = (512, 512)

CHECKPOINT_MAGIC = b"VIPC"
CHECKPOINT_VERSION = 1


class Mlp:
    """Plain ReLU MLP: linear layers with bias, ReLU between them."""

    def __init__(self, layer_sizes, rng: np.random.Generator):
        self.layer_sizes = tuple(int(s) for s in layer_sizes)
        self.weights = []
        self.biases = []
        for fan_in, fan_out in zip(self.layer_sizes, self.layer_sizes[1:]):
            w = rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(fan_in, fan_out))
            self.weights.append(Tensor(w, requires_grad=True))
            self.biases.append(Tensor(np.zeros(fan_out), requires_grad=True))

    def parameters(self) -> list[Tensor]:
        params = []
        for w, b in zip(self.weights, self.biases):
            params.append(w)
            params.append(b)
        return params

    def zero_grad(self):
        for p in self.parameters():
            p.zero_grad()

    def forward(self, x) -> Tensor:
        x = ad.as_tensor(x)
        if x.data.ndim != 2 or x.shape[1] != self.layer_sizes[0]:
            raise ShapeMismatch(
                f"expected input width {self.layer_sizes[0]}, got {x.shape}")
        h = x
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = ad.add(ad.matmul(h, w), b)
            if i != last:
                h = ad.relu(h)
        return h


class ClassifierNet(Mlp):
    """Maps a masked history vector to label logits."""

    def __init__(self, num_queries, num_labels, hidden=DEFAULT_HIDDEN,
                 rng=None):
        self.num_queries = num_queries
        self.num_labels = num_labels
        super().__init__((num_queries, *hidden, num_labels),
                         rng or np.random.default_rng(0))


class QuerierNet(Mlp):
    """Maps a masked history vector to one score per query."""

    def __init__(self, num_queries, hidden=DEFAULT_HIDDEN, rng=None):
        self.num_queries = num_queries
        super().__init__((num_queries, *hidden, num_queries),
                         rng or np.random.default_rng(1))


def classifier_forward(net: ClassifierNet, masked) -> Tensor:
    """Logits for a batch of masked history vectors."""
    return net.forward(masked)


def classifier_posterior(net: ClassifierNet, masked) -> np.ndarray:
    """Row-normalized posterior probabilities (softmax at temperature 1)."""
    return ad.softmax_row(classifier_forward(net, masked), 1.0).data


def straight_through_select(scores: Tensor, tau: float,
                            already_asked_mask=None) -> Tensor:
    """Hard one-hot argmax forward, softmax_tau gradient backward.

    Forward picks the row argmax exactly (lowest index wins ties); entries
    under already_asked_mask are excluded. The backward pass pretends the
    output was softmax(scores/tau), the biased surrogate that makes query
    selection trainable.
    """
    if tau <= 0:
        raise NonPositiveTemperature(f"temperature must be > 0, got {tau}")
    scores = ad.as_tensor(scores)
    masked_scores = scores.data
    if already_asked_mask is not None:
        already_asked_mask = np.asarray(already_asked_mask, dtype=bool)
        if already_asked_mask.shape != scores.shape:
            raise ShapeMismatch("mask shape differs from scores shape")
        if np.any(already_asked_mask.all(axis=1)):
            raise AllQueriesMasked("every query is masked in some row")
        masked_scores = np.where(already_asked_mask, -np.inf, masked_scores)
    idx = np.argmax(masked_scores, axis=1)
    onehot = np.zeros_like(scores.data)
    onehot[np.arange(len(idx)), idx] = 1.0
    # surrogate gradient path: u^T J(softmax_tau(scores))
    p = ad._softmax(scores.data, tau)

    def backward(g):
        inner = (g * p).sum(axis=1, keepdims=True)
        ad._accum(scores, p * (g - inner) / tau)

    return ad._node(onehot, (scores,), backward)


def differentiable_history_update(history_vec: Tensor, one_hot: Tensor,
                                  answers) -> Tensor:
    """history + one_hot * answers; gradient flows through one_hot."""
    return ad.add(history_vec, ad.mul(one_hot, ad.as_tensor(answers)))


@dataclass
class TemperatureSchedule:
    """Linear anneal from tau_start to tau_end over anneal_epochs."""
    tau_start: float = 1.0
    tau_end: float = 0.2
    anneal_epochs: int = 500

    def tau(self, epoch: int) -> float:
        if self.anneal_epochs <= 1:
            return self.tau_end
        frac = min(epoch / (self.anneal_epochs - 1), 1.0)
        return self.tau_start + frac * (self.tau_end - self.tau_start)


def serialize_checkpoint(classifier: ClassifierNet, querier: QuerierNet,
                         meta: dict) -> bytes:
    """Pack both nets: magic, version, JSON header, then raw f64 params."""
    header = dict(meta)
    header["classifier_layers"] = list(classifier.layer_sizes)
    header["querier_layers"] = list(querier.layer_sizes)
    header_bytes = json.dumps(header).encode("utf-8")
    blob = b"".join(
        np.ascontiguousarray(p.data, dtype="<f8").tobytes()
        for p in classifier.parameters() + querier.parameters())
    return (CHECKPOINT_MAGIC + struct.pack("<I", CHECKPOINT_VERSION)
            + struct.pack("<I", len(header_bytes)) + header_bytes + blob)


def load_checkpoint(data: bytes):
    """Inverse of serialize_checkpoint; bit-exact parameter round-trip."""
    if len(data) < 12 or data[:4] != CHECKPOINT_MAGIC:
        raise CorruptCheckpoint("bad magic bytes")
    (version,) = struct.unpack("<I", data[4:8])
    if version != CHECKPOINT_VERSION:
        raise VersionMismatch(f"unsupported checkpoint version {version}")
    (hlen,) = struct.unpack("<I", data[8:12])
    if len(data) < 12 + hlen:
        raise CorruptCheckpoint("truncated header")
    try:
        header = json.loads(data[12:12 + hlen].decode("utf-8"))
        c_layers = header["classifier_layers"]
        q_layers = header["querier_layers"]
    except (ValueError, KeyError) as exc:
        raise CorruptCheckpoint(f"bad header: {exc}") from None

    rng = np.random.default_rng(0)
    classifier = ClassifierNet(c_layers[0], c_layers[-1],
                               hidden=c_layers[1:-1], rng=rng)
    querier = QuerierNet(q_layers[0], hidden=q_layers[1:-1], rng=rng)

    offset = 12 + hlen
    for p in classifier.parameters() + querier.parameters():
        n = p.data.size
        end = offset + 8 * n
        if end > len(data):
            raise CorruptCheckpoint("truncated parameter blob")
        p.data = np.frombuffer(data[offset:end], dtype="<f8").reshape(
            p.data.shape).copy()
        offset = end
    if offset != len(data):
        raise CorruptCheckpoint("trailing bytes after parameter blob")
    return classifier, querier, header
