"""Sequential inference with a trained querier/classifier pair.

Also hosts the stopping rules and the random-strategy baseline that picks
successive queries uniformly, independent of the history.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import QueriesExhausted
from .networks import ClassifierNet, QuerierNet, classifier_posterior
from .queries import (AnswerVector, History, Posterior, StopReason,
                      Trajectory, TrajectoryStep, append_answer,
                      posterior_entropy)


class StopVariant(Enum):
    FIXED_BUDGET = "FixedBudget"
    MAP = "Map"
    STABILITY = "Stability"


@dataclass(frozen=True)
class StoppingRule:
    variant: StopVariant
    max_queries: int = 0
    epsilon: float = 0.0
    patience: int = 1

    @classmethod
    def fixed_budget(cls, max_queries: int) -> "StoppingRule":
        if max_queries < 1:
            raise ValueError("max_queries must be >= 1")
        return cls(StopVariant.FIXED_BUDGET, max_queries=max_queries)

    @classmethod
    def map(cls, epsilon: float) -> "StoppingRule":
        if not 0 < epsilon < 1:
            raise ValueError("Map epsilon must lie in (0, 1)")
        return cls(StopVariant.MAP, epsilon=epsilon)

    @classmethod
    def stability(cls, epsilon: float, patience: int = 1) -> "StoppingRule":
        if epsilon < 0 or patience < 1:
            raise ValueError("need epsilon >= 0 and patience >= 1")
        return cls(StopVariant.STABILITY, epsilon=epsilon, patience=patience)

    @classmethod
    def parse(cls, text: str) -> "StoppingRule":
        """Parse "budget:K", "map:EPS" or "stability:EPS[:PATIENCE]"."""
        parts = text.split(":")
        kind = parts[0].lower()
        if kind in ("budget", "fixedbudget") and len(parts) == 2:
            return cls.fixed_budget(int(parts[1]))
        if kind == "map" and len(parts) == 2:
            return cls.map(float(parts[1]))
        if kind == "stability" and len(parts) in (2, 3):
            patience = int(parts[2]) if len(parts) == 3 else 1
            return cls.stability(float(parts[1]), patience)
        raise ValueError(f"cannot parse stopping rule {text!r}")


class StopTracker:
    """Applies a stopping rule step by step during a pursuit run.

    Stability counts consecutive entropy drops of at most epsilon; an
    entropy increase resets the patience counter.
    """

    def __init__(self, rule: StoppingRule, prior: Posterior):
        self.rule = rule
        self.steps = 0
        self.prev_entropy = posterior_entropy(prior)
        self.stable_streak = 0

    def update(self, posterior: Posterior) -> StopReason | None:
        self.steps += 1
        rule = self.rule
        if rule.variant is StopVariant.FIXED_BUDGET:
            if self.steps >= rule.max_queries:
                return StopReason.FIXED_BUDGET
            return None
        if rule.variant is StopVariant.MAP:
            if posterior.max_prob() >= 1.0 - rule.epsilon:
                return StopReason.MAP_THRESHOLD
            return None
        entropy = posterior_entropy(posterior)
        drop = self.prev_entropy - entropy
        self.prev_entropy = entropy
        if 0.0 <= drop <= rule.epsilon:
            self.stable_streak += 1
        else:
            self.stable_streak = 0
        if self.stable_streak >= rule.patience:
            return StopReason.STABILITY_THRESHOLD
        return None


@dataclass(frozen=True)
class Strategy:
    """Learned (querier argmax) or Random (uniform over unasked)."""
    querier: QuerierNet | None = None
    seed: int | None = None

    @classmethod
    def learned(cls, querier: QuerierNet) -> "Strategy":
        return cls(querier=querier)

    @classmethod
    def random(cls, seed: int) -> "Strategy":
        return cls(seed=seed)

    @property
    def is_learned(self) -> bool:
        return self.querier is not None


def next_query(strategy: Strategy, history: History,
               rng: np.random.Generator | None = None) -> int:
    unasked = np.flatnonzero(~history.mask)
    if len(unasked) == 0:
        raise QueriesExhausted("every query has been asked")
    if strategy.is_learned:
        scores = strategy.querier.forward(history.values[None, :]).data[0]
        scores = np.where(history.mask, -np.inf, scores)
        return int(np.argmax(scores))
    rng = rng or np.random.default_rng(strategy.seed)
    return int(rng.choice(unasked))


def run_pursuit(x: AnswerVector, strategy: Strategy,
                classifier: ClassifierNet, stop: StoppingRule) -> Trajectory:
    """Ask, answer, classify until the stopping rule fires.

    The prior posterior (empty history) is recorded as step 0; queries are
    never repeated; if the rule never fires the run ends after all |Q|
    queries with reason QueriesExhausted.
    """
    num_queries = len(x.values)
    h = History.empty(num_queries)
    prior = Posterior(classifier_posterior(classifier, h.values[None, :])[0])
    tracker = StopTracker(stop, prior)
    rng = np.random.default_rng(strategy.seed) if not strategy.is_learned else None
    steps = []
    posterior = prior
    reason = StopReason.QUERIES_EXHAUSTED
    for _ in range(num_queries):
        q = next_query(strategy, h, rng)
        h = append_answer(h, q, float(x.values[q]))
        posterior = Posterior(
            classifier_posterior(classifier, h.values[None, :])[0])
        steps.append(TrajectoryStep(q, float(x.values[q]), posterior))
        stop_reason = tracker.update(posterior)
        if stop_reason is not None:
            reason = stop_reason
            break
    return Trajectory(prior, tuple(steps), posterior.argmax(), reason)


def batch_evaluate(xs, labels, strategy: Strategy, classifier: ClassifierNet,
                   budgets) -> list[float]:
    """Accuracy after exactly b queries for each budget b, in one pass.

    Fixed-budget runs share prefixes, so the rollout is done once up to
    max(budgets) over the whole dataset, vectorized.
    """
    xs = np.asarray(xs, dtype=np.float64)
    labels = np.asarray(labels)
    m, num_queries = xs.shape
    budgets = list(budgets)
    if any(b < 1 or b > num_queries for b in budgets):
        raise ValueError("budgets must lie in [1, |Q|]")
    values = np.zeros_like(xs)
    mask = np.zeros(xs.shape, dtype=bool)
    rng = np.random.default_rng(strategy.seed) if not strategy.is_learned else None
    accs = {}
    for step in range(1, max(budgets) + 1):
        if strategy.is_learned:
            scores = strategy.querier.forward(values).data
            scores = np.where(mask, -np.inf, scores)
            chosen = np.argmax(scores, axis=1)
        else:
            chosen = np.array([
                rng.choice(np.flatnonzero(~mask[i])) for i in range(m)])
        rows = np.arange(m)
        values[rows, chosen] = xs[rows, chosen]
        mask[rows, chosen] = True
        if step in budgets:
            probs = classifier_posterior(classifier, values)
            accs[step] = float(np.mean(np.argmax(probs, axis=1) == labels))
    return [accs[b] for b in budgets]
