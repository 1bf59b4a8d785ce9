"""Random history generation for training.

Two schemes: the initial one draws k ~ Uniform{0..|Q|} then k distinct
queries uniformly; the biased one rolls out the current querier for k
steps instead, so sampled histories concentrate on what inference will
actually visit.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import MissingQuerier
from .networks import QuerierNet
from .queries import AnswerVector, History


class SamplerMode(Enum):
    INITIAL_RANDOM = "InitialRandom"
    BIASED = "Biased"


@dataclass(frozen=True)
class SamplerConfig:
    mode: SamplerMode
    seed: int
    num_queries: int


def _example_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((seed, index)))


def sample_history_random(x: AnswerVector, rng: np.random.Generator) -> History:
    num_queries = len(x.values)
    k = int(rng.integers(0, num_queries + 1))
    ids = rng.permutation(num_queries)[:k]
    values = np.zeros(num_queries)
    mask = np.zeros(num_queries, dtype=bool)
    values[ids] = x.values[ids]
    mask[ids] = True
    return History(values, mask, tuple(int(i) for i in ids))


def sample_history_biased(x: AnswerVector, querier: QuerierNet,
                          rng: np.random.Generator) -> History:
    """Roll the querier out for k steps on x, never repeating a query."""
    num_queries = len(x.values)
    k = int(rng.integers(0, num_queries + 1))
    values = np.zeros((1, num_queries))
    mask = np.zeros((1, num_queries), dtype=bool)
    order = []
    for _ in range(k):
        scores = querier.forward(values).data
        scores = np.where(mask, -np.inf, scores)
        q = int(np.argmax(scores[0]))
        values[0, q] = x.values[q]
        mask[0, q] = True
        order.append(q)
    return History(values[0], mask[0], tuple(order))


def sample_batch(xs, config: SamplerConfig, querier: QuerierNet | None = None):
    """Batched history sampling, returned as (values, mask) matrices.

    Each example uses its own rng derived from (config.seed, row index),
    so the result is independent of batch partitioning.
    """
    xs = np.asarray(xs, dtype=np.float64)
    m, num_queries = xs.shape
    if config.mode is SamplerMode.BIASED and querier is None:
        raise MissingQuerier("biased sampling requires a querier")

    values = np.zeros_like(xs)
    mask = np.zeros(xs.shape, dtype=bool)

    if config.mode is SamplerMode.INITIAL_RANDOM:
        for i in range(m):
            h = sample_history_random(AnswerVector(xs[i]),
                                      _example_rng(config.seed, i))
            values[i] = h.values
            mask[i] = h.mask
        return values, mask

    # k draw matches sample_history_biased: first draw of the example rng
    ks = np.array([
        int(_example_rng(config.seed, i).integers(0, num_queries + 1))
        for i in range(m)
    ], dtype=np.int64)

    # Biased: vectorized rollout, one querier forward per step over the
    # rows that still need more queries.
    for step in range(int(ks.max()) if m else 0):
        active = ks > step
        if not active.any():
            break
        scores = querier.forward(values[active]).data
        scores = np.where(mask[active], -np.inf, scores)
        chosen = np.argmax(scores, axis=1)
        rows = np.flatnonzero(active)
        values[rows, chosen] = xs[rows, chosen]
        mask[rows, chosen] = True
    return values, mask
