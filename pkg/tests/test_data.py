import itertools

import numpy as np
import pytest

from conftest import full_joint
from vip.data import (Dataset, SyntheticSpec, generate_synthetic, load_csv,
                      planted_task, save_csv, split)
from vip.errors import DomainViolation, InvalidFraction, InvalidSpec, ParseError
from vip.queries import AnswerDomain


class TestGenerateSynthetic:
    def test_invalid_spec(self):
        with pytest.raises(InvalidSpec):
            generate_synthetic(SyntheticSpec(num_labels=1))
        with pytest.raises(InvalidSpec):
            generate_synthetic(SyntheticSpec(symptom_prob=(0.5, 1.5)))

    def test_shapes_and_ground_truth_model(self):
        spec = SyntheticSpec(num_labels=4, num_queries=8, train_rows=200,
                             test_rows=100, symptoms_per_label=(2, 3), seed=1)
        train, test, model = generate_synthetic(spec)
        assert train.answers.shape == (200, 8)
        assert test.answers.shape == (100, 8)
        assert model.num_labels == 4 and model.num_queries == 8
        assert set(np.unique(train.answers)) <= {-1.0, 1.0}

    def test_deterministic(self):
        spec = SyntheticSpec(num_labels=3, num_queries=5, train_rows=100,
                             test_rows=50, symptoms_per_label=(1, 2), seed=7)
        a_train, a_test, _ = generate_synthetic(spec)
        b_train, b_test, _ = generate_synthetic(spec)
        assert np.array_equal(a_train.answers, b_train.answers)
        assert np.array_equal(a_test.labels, b_test.labels)

    def test_train_test_disjoint_streams(self):
        spec = SyntheticSpec(num_labels=3, num_queries=5, train_rows=100,
                             test_rows=100, symptoms_per_label=(1, 2), seed=2)
        train, test, _ = generate_synthetic(spec)
        assert not np.array_equal(train.answers, test.answers)

    def test_empirical_conditionals_match_tables(self):
        spec = SyntheticSpec(num_labels=2, num_queries=3, train_rows=10_000,
                             test_rows=100, symptoms_per_label=(1, 2), seed=3)
        train, _, model = generate_synthetic(spec)
        for q in range(3):
            for y in range(2):
                rows = train.answers[train.labels == y, q]
                if len(rows) < 100:
                    continue
                p_hat = np.mean(rows == 1.0)
                p = model.tables[q][y, 1]
                sigma = np.sqrt(max(p * (1 - p), 1e-6) / len(rows))
                assert abs(p_hat - p) <= max(3 * sigma, 0.01)

    def test_full_answers_achieve_bayes_accuracy(self):
        # sufficiency: posterior from all answers equals posterior from X
        spec = SyntheticSpec(num_labels=3, num_queries=4, train_rows=10,
                             test_rows=10, symptoms_per_label=(1, 2), seed=5)
        _, _, model = generate_synthetic(spec)
        joint = full_joint(model)
        bayes_acc = 0.0
        domains = [model.answer_values[q] for q in range(model.num_queries)]
        for config in itertools.product(*domains):
            probs = np.array([joint[(config, y)]
                              for y in range(model.num_labels)])
            bayes_acc += probs.max()
        # the full answer vector IS x here, so the two coincide exactly
        assert 1.0 / model.num_labels <= bayes_acc <= 1.0


class TestPlantedTask:
    def test_query_zero_determines_label(self):
        train, test, model = planted_task(num_queries=4, rows=500, seed=0)
        assert np.array_equal(train.labels,
                              (train.answers[:, 0] > 0).astype(int))
        assert np.array_equal(test.labels,
                              (test.answers[:, 0] > 0).astype(int))


class TestSplit:
    def make(self, rows=100):
        rng = np.random.default_rng(0)
        from vip.queries import QuerySet
        return Dataset(rng.choice([-1.0, 1.0], size=(rows, 3)),
                       rng.integers(0, 2, size=rows),
                       QuerySet.binary(["a", "b", "c"]), ("n", "y"))

    def test_fraction_arithmetic(self):
        train, val = split(self.make(), 0.9, seed=0)
        assert len(train) == 90 and len(val) == 10

    def test_partition(self):
        ds = self.make()
        train, val = split(ds, 0.7, seed=1)
        combined = np.concatenate([train.answers, val.answers])
        assert np.array_equal(np.sort(combined, axis=0),
                              np.sort(ds.answers, axis=0))

    def test_deterministic(self):
        ds = self.make()
        a = split(ds, 0.5, seed=2)
        b = split(ds, 0.5, seed=2)
        assert np.array_equal(a[0].answers, b[0].answers)

    def test_invalid_fraction(self):
        with pytest.raises(InvalidFraction):
            split(self.make(), 1.0, seed=0)


class TestCsv:
    def test_round_trip(self, tmp_path):
        spec = SyntheticSpec(num_labels=3, num_queries=4, train_rows=50,
                             test_rows=10, symptoms_per_label=(1, 2), seed=4)
        train, _, _ = generate_synthetic(spec)
        path = tmp_path / "train.csv"
        save_csv(train, path)
        loaded = load_csv(path, label_names=train.label_names)
        assert np.array_equal(loaded.answers, train.answers)
        assert np.array_equal(loaded.labels, train.labels)
        assert loaded.query_set.names() == train.query_set.names()

    def test_two_row_file(self, tmp_path):
        path = tmp_path / "tiny.csv"
        path.write_text("label,q_fever,q_cough\nflu,1,-1\ncold,-1,1\n")
        ds = load_csv(path)
        assert len(ds) == 2
        assert ds.answers.tolist() == [[1.0, -1.0], [-1.0, 1.0]]

    def test_domain_violation_coordinates(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("label,q_a\nx,1\ny,2\n")
        with pytest.raises(DomainViolation) as err:
            load_csv(path, domain=AnswerDomain.BINARY01)
        assert err.value.line == 3 and err.value.column == 2

    def test_bad_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("notlabel,q_a\nx,1\n")
        with pytest.raises(ParseError):
            load_csv(path)

    def test_ragged_row(self, tmp_path):
        path = tmp_path / "ragged.csv"
        path.write_text("label,q_a,q_b\nx,1\n")
        with pytest.raises(ParseError):
            load_csv(path)
