"""Shared test helpers: random discrete models and brute-force oracles.

The brute-force paths enumerate the full joint over all answer
configurations and labels, never assuming conditional independence, so
they stay independent of the closed-form code they check.
"""
import itertools

import numpy as np
import pytest

from vip.oracle import DiscreteJointModel
from vip.queries import History


def random_model(rng, num_labels=None, num_queries=None,
                 answer_arities=None) -> DiscreteJointModel:
    num_labels = num_labels or int(rng.integers(2, 5))
    num_queries = num_queries or int(rng.integers(1, 5))
    if answer_arities is None:
        answer_arities = [int(rng.integers(2, 4)) for _ in range(num_queries)]
    prior = rng.dirichlet(np.ones(num_labels))
    tables, values = [], []
    for arity in answer_arities:
        tables.append(rng.dirichlet(np.ones(arity), size=num_labels))
        values.append(tuple(float(v) for v in range(1, arity + 1)))
    return DiscreteJointModel(prior, tuple(tables), tuple(values))


def full_joint(model: DiscreteJointModel):
    """P(answers..., y) as a dict {(answer tuple, y): prob} by enumeration."""
    domains = [model.answer_values[q] for q in range(model.num_queries)]
    joint = {}
    for config in itertools.product(*domains):
        for y in range(model.num_labels):
            p = model.prior[y]
            for q, a in enumerate(config):
                p *= model.tables[q][y, model.answer_column(q, a)]
            joint[(config, y)] = p
    return joint


def _consistent(config, h: History) -> bool:
    return all(abs(config[q] - h.values[q]) < 1e-9
               for q in np.flatnonzero(h.mask))


def brute_posterior(model, h: History) -> np.ndarray:
    joint = full_joint(model)
    probs = np.zeros(model.num_labels)
    for (config, y), p in joint.items():
        if _consistent(config, h):
            probs[y] += p
    return probs / probs.sum()


def _entropy(p):
    p = np.asarray(p, dtype=float)
    nz = p[p > 0]
    return float(-(nz * np.log2(nz)).sum())


def brute_conditional_mi(model, q: int, h: History) -> float:
    """I(q(X); Y | h) from the full joint, no independence assumption."""
    joint = full_joint(model)
    # restrict to configs consistent with h, renormalize
    items = [(config, y, p) for (config, y), p in joint.items()
             if _consistent(config, h) and p > 0]
    total = sum(p for _, _, p in items)
    py = np.zeros(model.num_labels)
    pa = {}
    pay = {}
    for config, y, p in items:
        w = p / total
        py[y] += w
        pa[config[q]] = pa.get(config[q], 0.0) + w
        key = (config[q], y)
        pay[key] = pay.get(key, 0.0) + w
    h_y = _entropy(py)
    h_y_given_a = 0.0
    for a, w_a in pa.items():
        cond = np.array([pay.get((a, y), 0.0) for y in range(model.num_labels)])
        h_y_given_a += w_a * _entropy(cond / w_a)
    return h_y - h_y_given_a


def brute_kl_objective(model, q: int, h: History) -> float:
    """E_{X|h}[ KL(P(Y|X) || P(Y | q(X), h)) ] from the full joint."""
    joint = full_joint(model)
    items = [(config, y, p) for (config, y), p in joint.items()
             if _consistent(config, h)]
    total = sum(p for _, _, p in items)
    # P(x | h) over configs, P(y | x), and P(y | q(x)=a, h)
    px = {}
    pxy = {}
    for config, y, p in items:
        px[config] = px.get(config, 0.0) + p / total
        pxy[(config, y)] = pxy.get((config, y), 0.0) + p / total
    pa = {}
    pay = {}
    for (config, y), w in pxy.items():
        pa[config[q]] = pa.get(config[q], 0.0) + w
        key = (config[q], y)
        pay[key] = pay.get(key, 0.0) + w
    kl = 0.0
    for config, w_x in px.items():
        if w_x <= 0:
            continue
        for y in range(model.num_labels):
            p_y_x = pxy.get((config, y), 0.0) / w_x
            if p_y_x <= 0:
                continue
            p_y_qa = pay[(config[q], y)] / pa[config[q]]
            kl += w_x * p_y_x * np.log2(p_y_x / p_y_qa)
    return kl


def random_history(rng, model: DiscreteJointModel,
                   from_data: bool = True) -> History:
    """A positive-probability history: sample x from the model, keep a subset."""
    from vip.oracle import sample_from_model

    xs, _ = sample_from_model(model, 1, seed=int(rng.integers(2**31)))
    k = int(rng.integers(0, model.num_queries))
    ids = rng.permutation(model.num_queries)[:k]
    values = np.zeros(model.num_queries)
    mask = np.zeros(model.num_queries, dtype=bool)
    values[ids] = xs[0, ids]
    mask[ids] = True
    return History(values, mask, tuple(int(i) for i in ids))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
