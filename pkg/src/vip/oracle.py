"""Exact greedy information pursuit on small discrete joint models.

Models assume answers are conditionally independent given the label, which
keeps posteriors and conditional mutual information exact and cheap. This
is the ground truth the learned querier is measured against.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .queries import (AnswerVector, History, Posterior, StopReason,
                      Trajectory, TrajectoryStep, append_answer, entropy_bits)
from .errors import (QueriesExhausted, QueryAlreadyAsked,
                     ZeroProbabilityHistory)

# Mutual-information floor (bits) below which a query counts as
# uninformative; used as the oracle's early-stop tolerance.
DEFAULT_MI_EPS = 1e-6


@dataclass(frozen=True)
class DiscreteJointModel:
    """Label prior plus one conditional answer table per query.

    tables[q] has shape (num_labels, num_answers_q) with rows summing to 1;
    answer_values[q] lists the encoded answer for each column.
    """
    prior: np.ndarray
    tables: tuple[np.ndarray, ...]
    answer_values: tuple[tuple[float, ...], ...]
    query_names: tuple[str, ...] = ()
    label_names: tuple[str, ...] = ()

    def __post_init__(self):
        prior = np.asarray(self.prior, dtype=np.float64)
        object.__setattr__(self, "prior", prior)
        object.__setattr__(self, "tables",
                           tuple(np.asarray(t, dtype=np.float64)
                                 for t in self.tables))
        if abs(prior.sum() - 1.0) > 1e-9 or np.any(prior < 0):
            raise ValueError("prior must be a probability vector")
        for q, table in enumerate(self.tables):
            if table.shape != (len(prior), len(self.answer_values[q])):
                raise ValueError(f"table {q} has wrong shape")
            if np.any(table < 0) or np.any(np.abs(table.sum(axis=1) - 1) > 1e-9):
                raise ValueError(f"table {q} rows must sum to 1")
        if not self.query_names:
            object.__setattr__(
                self, "query_names",
                tuple(f"q{i}" for i in range(len(self.tables))))
        if not self.label_names:
            object.__setattr__(
                self, "label_names",
                tuple(f"y{i}" for i in range(len(prior))))

    @property
    def num_labels(self) -> int:
        return len(self.prior)

    @property
    def num_queries(self) -> int:
        return len(self.tables)

    def answer_column(self, q: int, value: float) -> int:
        for j, v in enumerate(self.answer_values[q]):
            if abs(v - value) < 1e-9:
                return j
        raise ValueError(f"answer {value} not in domain of query {q}")

    def to_json(self) -> str:
        return json.dumps({
            "prior": list(self.prior),
            "labels": list(self.label_names),
            "queries": [
                {"name": self.query_names[q],
                 "values": list(self.answer_values[q]),
                 "cond": [list(row) for row in self.tables[q]]}
                for q in range(self.num_queries)
            ],
        })

    @classmethod
    def from_json(cls, text: str) -> "DiscreteJointModel":
        doc = json.loads(text)
        return cls(
            prior=np.array(doc["prior"]),
            tables=tuple(np.array(q["cond"]) for q in doc["queries"]),
            answer_values=tuple(tuple(q["values"]) for q in doc["queries"]),
            query_names=tuple(q["name"] for q in doc["queries"]),
            label_names=tuple(doc.get("labels", [])),
        )


def _posterior_probs(m: DiscreteJointModel, h: History) -> np.ndarray:
    probs = m.prior.copy()
    for q in h.order:
        col = m.answer_column(q, h.values[q])
        probs = probs * m.tables[q][:, col]
    total = probs.sum()
    if total <= 0:
        raise ZeroProbabilityHistory("history has probability 0 under model")
    return probs / total


def exact_posterior(m: DiscreteJointModel, h: History) -> Posterior:
    """Bayes posterior over labels given the asked answers."""
    return Posterior(_posterior_probs(m, h))


def conditional_mutual_information(m: DiscreteJointModel, q: int,
                                   h: History) -> float:
    """I(q(X); Y | history) in bits, by exact enumeration of answers."""
    if h.mask[q]:
        raise QueryAlreadyAsked(f"query {q} is already in the history")
    post = _posterior_probs(m, h)
    h_y = entropy_bits(post)
    # P(q=a | h) and P(Y | h, q=a) for each answer column
    joint = post[:, None] * m.tables[q]          # (labels, answers)
    p_a = joint.sum(axis=0)
    expected = 0.0
    for j, pa in enumerate(p_a):
        if pa <= 0:
            continue
        expected += pa * entropy_bits(joint[:, j] / pa)
    return max(h_y - expected, 0.0)


def ip_next_query(m: DiscreteJointModel, h: History) -> int:
    """Most informative unasked query; lowest index breaks ties."""
    unasked = np.flatnonzero(~h.mask)
    if len(unasked) == 0:
        raise QueriesExhausted("every query has been asked")
    best_q, best_mi = None, -1.0
    for q in unasked:
        mi = conditional_mutual_information(m, int(q), h)
        if mi > best_mi + 1e-15:
            best_q, best_mi = int(q), mi
    return best_q


def run_exact_ip(m: DiscreteJointModel, x: AnswerVector, stop,
                 mi_eps: float = DEFAULT_MI_EPS) -> Trajectory:
    """Greedy IP loop with exact posteriors; stops per the given rule.

    Also stops (reason QueriesExhausted) once no remaining query carries
    more than mi_eps bits of information.
    """
    from .pursuit import StopTracker  # shared stopping logic

    num_queries = m.num_queries
    h = History.empty(num_queries)
    prior = exact_posterior(m, h)
    tracker = StopTracker(stop, prior)
    steps = []
    posterior = prior
    while True:
        unasked = np.flatnonzero(~h.mask)
        if len(unasked) == 0:
            reason = StopReason.QUERIES_EXHAUSTED
            break
        mis = {int(q): conditional_mutual_information(m, int(q), h)
               for q in unasked}
        best_q = max(mis, key=lambda q: (mis[q], -q))
        if mis[best_q] <= mi_eps:
            reason = StopReason.QUERIES_EXHAUSTED
            break
        h = append_answer(h, best_q, float(x.values[best_q]))
        posterior = exact_posterior(m, h)
        steps.append(TrajectoryStep(best_q, float(x.values[best_q]), posterior))
        reason = tracker.update(posterior)
        if reason is not None:
            break
    return Trajectory(prior, tuple(steps), posterior.argmax(), reason)


def sample_from_model(m: DiscreteJointModel, n: int, seed: int):
    """Draw n labeled rows: y ~ prior, answers from the y-row of each table.

    Returns (answers matrix n x |Q| of encoded values, labels vector n).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    labels = rng.choice(m.num_labels, size=n, p=m.prior)
    answers = np.zeros((n, m.num_queries))
    for q in range(m.num_queries):
        values = np.asarray(m.answer_values[q])
        table = m.tables[q]
        # vectorized per query: inverse-cdf draw per row
        cdf = np.cumsum(table[labels], axis=1)
        u = rng.random(n)[:, None]
        cols = (u > cdf[:, :-1]).sum(axis=1) if cdf.shape[1] > 1 else np.zeros(n, int)
        answers[:, q] = values[cols]
    return answers, labels
