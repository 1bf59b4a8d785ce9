"""Accuracy/length trade-off curves, normalized AUC, and oracle agreement."""
from __future__ import annotations

import csv
import json

import numpy as np

from .data import Dataset
from .errors import IncompleteCurve, QuerySetMismatch
from .networks import ClassifierNet, QuerierNet
from .oracle import DiscreteJointModel, conditional_mutual_information
from .pursuit import StoppingRule, Strategy, batch_evaluate, run_pursuit
from .queries import AnswerVector, History, append_answer

DEFAULT_AGREEMENT_EPS_BITS = 0.02


def accuracy_vs_length_curve(dataset: Dataset, strategy: Strategy,
                             classifier: ClassifierNet,
                             epsilons, rule: str = "map",
                             patience: int = 1):
    """One (mean length, accuracy) point per stopping epsilon, sorted."""
    epsilons = list(epsilons)
    if not epsilons:
        raise ValueError("sweep must be nonempty")
    points = []
    for eps in epsilons:
        if rule == "map":
            stop = StoppingRule.map(eps)
        else:
            stop = StoppingRule.stability(eps, patience)
        lengths, correct = [], []
        for x, y in zip(dataset.answers, dataset.labels):
            traj = run_pursuit(AnswerVector(x), strategy, classifier, stop)
            lengths.append(len(traj))
            correct.append(traj.terminal_prediction == y)
        points.append((float(np.mean(lengths)), float(np.mean(correct))))
    return sorted(points)


def normalized_auc(accuracies) -> float:
    """Trapezoidal area of accuracy over budgets 1..|Q|, divided by the span.

    Expects one accuracy per integer budget; a constant curve maps to its
    constant, and a single-budget curve returns that accuracy.
    """
    accuracies = np.asarray(list(accuracies), dtype=np.float64)
    if len(accuracies) == 0:
        raise IncompleteCurve("curve is empty")
    if len(accuracies) == 1:
        return float(accuracies[0])
    return float(np.trapezoid(accuracies) / (len(accuracies) - 1))


def full_budget_curve(dataset: Dataset, strategy: Strategy,
                      classifier: ClassifierNet) -> list[float]:
    """Accuracy at every integer budget 1..|Q|, as normalized_auc expects."""
    budgets = list(range(1, dataset.query_set.size + 1))
    return batch_evaluate(dataset.answers, dataset.labels, strategy,
                          classifier, budgets)


def oracle_agreement(querier: QuerierNet, classifier: ClassifierNet,
                     model: DiscreteJointModel, dataset: Dataset,
                     stop: StoppingRule,
                     eps_bits: float = DEFAULT_AGREEMENT_EPS_BITS,
                     max_trajectories: int | None = None) -> float:
    """Fraction of visited histories where the querier is MI-optimal.

    A pick counts as optimal when its exact conditional mutual information
    is within eps_bits of the best unasked query's.
    """
    if model.num_queries != dataset.query_set.size:
        raise QuerySetMismatch("model and dataset disagree on |Q|")
    if querier.num_queries != model.num_queries:
        raise QuerySetMismatch("querier width differs from model")
    rows = dataset.answers
    if max_trajectories is not None:
        rows = rows[:max_trajectories]
    hits, total = 0, 0
    strategy = Strategy.learned(querier)
    for x in rows:
        traj = run_pursuit(AnswerVector(x), strategy, classifier, stop)
        h = History.empty(model.num_queries)
        for step in traj.steps:
            mis = np.full(model.num_queries, -np.inf)
            for q in np.flatnonzero(~h.mask):
                mis[q] = conditional_mutual_information(model, int(q), h)
            total += 1
            if mis[step.query_id] >= mis.max() - eps_bits:
                hits += 1
            h = append_answer(h, step.query_id, step.answer)
    return hits / total if total else 1.0


def curve_to_csv(points, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["mean_length", "accuracy"])
        writer.writerows(points)


def curve_to_json(points) -> str:
    return json.dumps([{"mean_length": l, "accuracy": a} for l, a in points])
