"""Synthetic symptom-checking data and CSV ingestion.

The generator builds a conditional-independence model (each label has a
handful of high-probability "symptom" queries against a low background
rate) and samples labeled answer vectors from it, returning the model so
tests can compare learned behavior against the exact oracle.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import (DomainViolation, EmptyDataset, IllegalRawValue,
                     InvalidFraction, InvalidSpec, ParseError)
from .oracle import DiscreteJointModel, sample_from_model
from .queries import (AnswerDomain, QuerySet, QuerySpec, domain_values,
                      encode_answer)


@dataclass(frozen=True)
class Dataset:
    answers: np.ndarray        # (rows, |Q|) encoded values
    labels: np.ndarray         # (rows,) int label ids
    query_set: QuerySet
    label_names: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "answers",
                           np.asarray(self.answers, dtype=np.float64))
        object.__setattr__(self, "labels",
                           np.asarray(self.labels, dtype=np.int64))
        if self.answers.shape != (len(self.labels), self.query_set.size):
            raise ValueError("answers shape must be (rows, |Q|)")
        if len(self.labels) and self.labels.max() >= len(self.label_names):
            raise ValueError("label id out of range")

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def num_labels(self) -> int:
        return len(self.label_names)


@dataclass(frozen=True)
class SyntheticSpec:
    """Knobs for the symptom-style generator."""
    num_labels: int = 10
    num_queries: int = 30
    symptoms_per_label: tuple[int, int] = (4, 8)
    symptom_prob: tuple[float, float] = (0.6, 0.9)
    background_prob: tuple[float, float] = (0.02, 0.1)
    train_rows: int = 8000
    test_rows: int = 2000
    seed: int = 0
    domain: AnswerDomain = AnswerDomain.BINARY_PM1

    def validate(self):
        if self.num_labels < 2 or self.num_queries < 1:
            raise InvalidSpec("need >= 2 labels and >= 1 query")
        for lo, hi in (self.symptom_prob, self.background_prob):
            if not (0 <= lo <= hi <= 1):
                raise InvalidSpec("probability ranges must be within [0, 1]")
        lo, hi = self.symptoms_per_label
        if not (0 <= lo <= hi <= self.num_queries):
            raise InvalidSpec("symptoms_per_label out of range")
        if self.train_rows < 1 or self.test_rows < 1:
            raise InvalidSpec("row counts must be positive")


SYMCAT_MINI = SyntheticSpec()


def _build_model(spec: SyntheticSpec, rng: np.random.Generator) -> DiscreteJointModel:
    yes, no = domain_values(spec.domain)[-1], domain_values(spec.domain)[0]
    prior = np.full(spec.num_labels, 1.0 / spec.num_labels)
    p_yes = rng.uniform(*spec.background_prob,
                        size=(spec.num_labels, spec.num_queries))
    for y in range(spec.num_labels):
        k = rng.integers(spec.symptoms_per_label[0],
                         spec.symptoms_per_label[1] + 1)
        symptoms = rng.permutation(spec.num_queries)[:k]
        p_yes[y, symptoms] = rng.uniform(*spec.symptom_prob, size=k)
    tables = tuple(
        np.stack([1.0 - p_yes[:, q], p_yes[:, q]], axis=1)
        for q in range(spec.num_queries))
    return DiscreteJointModel(
        prior=prior,
        tables=tables,
        answer_values=tuple((no, yes) for _ in range(spec.num_queries)),
        query_names=tuple(f"symptom_{q}" for q in range(spec.num_queries)),
        label_names=tuple(f"disease_{y}" for y in range(spec.num_labels)),
    )


def generate_synthetic(spec: SyntheticSpec):
    """Build a random model, sample disjoint train/test sets from it."""
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    model = _build_model(spec, rng)
    query_set = QuerySet(tuple(
        QuerySpec(q, model.query_names[q], spec.domain)
        for q in range(spec.num_queries)))
    train_answers, train_labels = sample_from_model(
        model, spec.train_rows, seed=spec.seed * 2 + 1)
    test_answers, test_labels = sample_from_model(
        model, spec.test_rows, seed=spec.seed * 2 + 2)
    train = Dataset(train_answers, train_labels, query_set, model.label_names)
    test = Dataset(test_answers, test_labels, query_set, model.label_names)
    return train, test, model


def planted_task(num_queries: int = 4, rows: int = 2000, seed: int = 0,
                 test_rows: int = 1000):
    """Binary task where query 0 determines the label and the rest is noise."""
    p_yes = np.full((2, num_queries), 0.5)
    p_yes[0, 0] = 0.0
    p_yes[1, 0] = 1.0
    tables = tuple(np.stack([1 - p_yes[:, q], p_yes[:, q]], axis=1)
                   for q in range(num_queries))
    model = DiscreteJointModel(
        prior=np.array([0.5, 0.5]),
        tables=tables,
        answer_values=tuple((-1.0, 1.0) for _ in range(num_queries)),
    )
    query_set = QuerySet.binary([f"q{i}" for i in range(num_queries)])
    xs, ys = sample_from_model(model, rows, seed=seed * 2 + 1)
    xs_t, ys_t = sample_from_model(model, test_rows, seed=seed * 2 + 2)
    train = Dataset(xs, ys, query_set, model.label_names)
    test = Dataset(xs_t, ys_t, query_set, model.label_names)
    return train, test, model


def split(dataset: Dataset, fraction: float, seed: int):
    """Seeded shuffle then split into (first-fraction, remainder)."""
    if not 0 < fraction < 1:
        raise InvalidFraction(f"fraction must be in (0, 1), got {fraction}")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(len(dataset))
    cut = int(round(len(dataset) * fraction))
    first, second = perm[:cut], perm[cut:]
    return (
        Dataset(dataset.answers[first], dataset.labels[first],
                dataset.query_set, dataset.label_names),
        Dataset(dataset.answers[second], dataset.labels[second],
                dataset.query_set, dataset.label_names),
    )


_RAW_BY_VALUE = {
    AnswerDomain.BINARY01: {0.0: "0", 1.0: "1"},
    AnswerDomain.BINARY_PM1: {-1.0: "-1", 1.0: "1"},
    AnswerDomain.TERNARY_PM10: {-1.0: "-1", 0.5: "0", 1.0: "1"},
}


def save_csv(dataset: Dataset, path):
    """Header "label,q_<name>,..."; encoded values written as raw tokens."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label"] + [f"q_{n}" for n in dataset.query_set.names()])
        for row, label in zip(dataset.answers, dataset.labels):
            cells = [dataset.label_names[label]]
            for spec, v in zip(dataset.query_set.queries, row):
                cells.append(_RAW_BY_VALUE[spec.answer_domain][float(v)])
            writer.writerow(cells)


def load_csv(path, domain: AnswerDomain = AnswerDomain.BINARY_PM1,
             label_names=None) -> Dataset:
    """Parse a CSV exported by save_csv (or hand-written in that layout)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(1, 1, "empty file") from None
        if not header or header[0] != "label" or len(header) < 2:
            raise ParseError(1, 1, 'header must be "label,q_<name>,..."')
        names = []
        for col, cell in enumerate(header[1:], start=2):
            if not cell.startswith("q_"):
                raise ParseError(1, col, f"query column {cell!r} must start with q_")
            names.append(cell[2:])
        query_set = QuerySet.binary(names, domain)

        raw_labels, rows = [], []
        for lineno, cells in enumerate(reader, start=2):
            if len(cells) != len(header):
                raise ParseError(lineno, 1,
                                 f"expected {len(header)} cells, got {len(cells)}")
            raw_labels.append(cells[0])
            row = np.zeros(len(names))
            for col, (spec, cell) in enumerate(
                    zip(query_set.queries, cells[1:]), start=2):
                try:
                    row[spec.id] = encode_answer(cell, spec)
                except IllegalRawValue as exc:
                    raise DomainViolation(lineno, col, str(exc)) from None
            rows.append(row)

    if label_names is None:
        label_names = tuple(sorted(set(raw_labels)))
    index = {name: i for i, name in enumerate(label_names)}
    try:
        labels = np.array([index[name] for name in raw_labels], dtype=np.int64)
    except KeyError as exc:
        raise ParseError(0, 1, f"unknown label {exc}") from None
    answers = np.array(rows) if rows else np.zeros((0, len(names)))
    return Dataset(answers, labels, query_set, tuple(label_names))
