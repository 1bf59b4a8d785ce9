"""Query sets, answer encodings and masked histories.

All types are immutable value objects: operations that "modify" a history
return a new one, so instances can be shared freely across threads.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import DuplicateQuery, IllegalRawValue


class AnswerDomain(Enum):
    BINARY01 = "Binary01"
    BINARY_PM1 = "BinaryPM1"
    TERNARY_PM10 = "TernaryPM10"


# Raw dataset values accepted per domain, mapped to their encoded reals.
# 0 is reserved for "unasked" everywhere, so BinaryPM1 rejects a raw 0 and
# the ternary "can't say" is remapped to 0.5 instead of the usual 0.
_ENCODINGS = {
    AnswerDomain.BINARY01: {
        "yes": 1.0, "no": 0.0, "1": 1.0, "0": 0.0, 1: 1.0, 0: 0.0,
    },
    AnswerDomain.BINARY_PM1: {
        "present": 1.0, "absent": -1.0, "yes": 1.0, "no": -1.0,
        "1": 1.0, "-1": -1.0, 1: 1.0, -1: -1.0,
    },
    AnswerDomain.TERNARY_PM10: {
        "yes": 1.0, "no": -1.0, "cant say": 0.5, "can't say": 0.5,
        "1": 1.0, "-1": -1.0, "0": 0.5, 1: 1.0, -1: -1.0, 0: 0.5,
    },
}

_DOMAIN_VALUES = {
    AnswerDomain.BINARY01: (0.0, 1.0),
    AnswerDomain.BINARY_PM1: (-1.0, 1.0),
    AnswerDomain.TERNARY_PM10: (-1.0, 0.5, 1.0),
}


def domain_values(domain: AnswerDomain) -> tuple[float, ...]:
    """Encoded values an answer in this domain may take."""
    return _DOMAIN_VALUES[domain]


@dataclass(frozen=True)
class QuerySpec:
    id: int
    name: str
    answer_domain: AnswerDomain


@dataclass(frozen=True)
class QuerySet:
    queries: tuple[QuerySpec, ...]

    def __post_init__(self):
        if len(self.queries) < 1:
            raise ValueError("query set must contain at least one query")
        ids = [q.id for q in self.queries]
        if ids != list(range(len(ids))):
            raise ValueError("query ids must be dense 0..|Q|-1 in order")

    @property
    def size(self) -> int:
        return len(self.queries)

    def names(self) -> list[str]:
        return [q.name for q in self.queries]

    def to_json(self) -> str:
        return json.dumps({
            "queries": [
                {"id": q.id, "name": q.name, "domain": q.answer_domain.value}
                for q in self.queries
            ]
        })

    @classmethod
    def from_json(cls, text: str) -> "QuerySet":
        doc = json.loads(text)
        return cls(tuple(
            QuerySpec(q["id"], q["name"], AnswerDomain(q["domain"]))
            for q in doc["queries"]
        ))

    @classmethod
    def binary(cls, names: Sequence[str],
               domain: AnswerDomain = AnswerDomain.BINARY_PM1) -> "QuerySet":
        return cls(tuple(
            QuerySpec(i, n, domain) for i, n in enumerate(names)))


def encode_answer(raw, spec: QuerySpec) -> float:
    """Encode a raw dataset value into the query's answer domain."""
    table = _ENCODINGS[spec.answer_domain]
    key = raw.strip().lower() if isinstance(raw, str) else raw
    if isinstance(key, float) and key.is_integer():
        key = int(key)
    try:
        return table[key]
    except (KeyError, TypeError):
        raise IllegalRawValue(
            f"{raw!r} is not a legal value for domain "
            f"{spec.answer_domain.value}") from None


@dataclass(frozen=True)
class AnswerVector:
    """Full evaluation of every query on one data point, already encoded."""
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values",
                           np.asarray(self.values, dtype=np.float64))


@dataclass(frozen=True)
class History:
    """Masked record of the answers observed so far.

    ``values[i]`` is 0 wherever ``mask[i]`` is false; ``order`` lists the
    asked query ids in ask order.
    """
    values: np.ndarray
    mask: np.ndarray
    order: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "values",
                           np.asarray(self.values, dtype=np.float64))
        object.__setattr__(self, "mask", np.asarray(self.mask, dtype=bool))
        if self.values.shape != self.mask.shape:
            raise ValueError("values and mask must have the same length")
        if np.any(self.values[~self.mask] != 0.0):
            raise ValueError("unobserved answers must be zero")
        if sorted(self.order) != sorted(np.flatnonzero(self.mask)):
            raise ValueError("order must list exactly the masked-true ids")

    @classmethod
    def empty(cls, num_queries: int) -> "History":
        return cls(np.zeros(num_queries), np.zeros(num_queries, dtype=bool))

    def __len__(self) -> int:
        return len(self.order)


def append_answer(h: History, q: int, a: float) -> History:
    """Return ``h`` extended with the answer ``a`` to query ``q``."""
    if h.mask[q]:
        raise DuplicateQuery(f"query {q} was already asked")
    values = h.values.copy()
    mask = h.mask.copy()
    values[q] = a
    mask[q] = True
    return History(values, mask, h.order + (q,))


def to_masked_vector(h: History) -> np.ndarray:
    """The network input: answers with unobserved positions zeroed."""
    return h.values.copy()


@dataclass(frozen=True)
class Posterior:
    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64)
        object.__setattr__(self, "probs", probs)
        if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-9:
            raise ValueError("posterior must be a probability vector")

    @property
    def num_labels(self) -> int:
        return len(self.probs)

    def argmax(self) -> int:
        return int(np.argmax(self.probs))

    def max_prob(self) -> float:
        return float(np.max(self.probs))


def posterior_entropy(p: Posterior) -> float:
    """Shannon entropy in bits, with 0*log(0) := 0."""
    return entropy_bits(p.probs)


def entropy_bits(probs: np.ndarray) -> float:
    probs = np.asarray(probs, dtype=np.float64)
    nz = probs[probs > 0]
    return float(-np.sum(nz * np.log2(nz)))


class StopReason(Enum):
    FIXED_BUDGET = "FixedBudget"
    MAP_THRESHOLD = "MapThreshold"
    STABILITY_THRESHOLD = "StabilityThreshold"
    QUERIES_EXHAUSTED = "QueriesExhausted"


@dataclass(frozen=True)
class TrajectoryStep:
    query_id: int
    answer: float
    posterior: Posterior


@dataclass(frozen=True)
class Trajectory:
    """Ordered record of a pursuit run; the prediction's explanation.

    ``prior`` is the step-0 posterior before any query is asked.
    """
    prior: Posterior
    steps: tuple[TrajectoryStep, ...]
    terminal_prediction: int
    stop_reason: StopReason

    def __post_init__(self):
        ids = [s.query_id for s in self.steps]
        if len(set(ids)) != len(ids):
            raise ValueError("trajectory contains duplicate query ids")

    def __len__(self) -> int:
        return len(self.steps)

    def posteriors(self) -> list[Posterior]:
        return [self.prior] + [s.posterior for s in self.steps]

    def to_json(self, query_names: Sequence[str] | None = None,
                label_names: Sequence[str] | None = None) -> str:
        def qname(i):
            return query_names[i] if query_names else i

        def lname(i):
            return label_names[i] if label_names else i

        return json.dumps({
            "prior": list(self.prior.probs),
            "steps": [
                {"query": qname(s.query_id), "answer": s.answer,
                 "posterior": list(s.posterior.probs)}
                for s in self.steps
            ],
            "prediction": lname(self.terminal_prediction),
            "stop_reason": self.stop_reason.value,
        })
