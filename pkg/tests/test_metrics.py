import numpy as np
import pytest

from vip.data import planted_task
from vip.errors import IncompleteCurve, QuerySetMismatch
from vip.metrics import (accuracy_vs_length_curve, full_budget_curve,
                         normalized_auc, oracle_agreement)
from vip.networks import ClassifierNet, QuerierNet
from vip.oracle import DiscreteJointModel
from vip.pursuit import StoppingRule, Strategy


class TestNormalizedAuc:
    def test_constant_curve(self):
        assert normalized_auc([0.7] * 10) == pytest.approx(0.7)

    def test_linear_ramp(self):
        assert normalized_auc(np.linspace(0, 1, 11)) == pytest.approx(0.5)

    def test_single_budget(self):
        assert normalized_auc([0.42]) == 0.42

    def test_empty_rejected(self):
        with pytest.raises(IncompleteCurve):
            normalized_auc([])

    def test_range(self, rng):
        for _ in range(20):
            accs = rng.uniform(0, 1, size=int(rng.integers(2, 12)))
            assert 0.0 <= normalized_auc(accs) <= 1.0

    def test_monotone_in_pointwise_dominance(self, rng):
        for _ in range(20):
            a = rng.uniform(0, 1, size=8)
            b = np.clip(a + rng.uniform(0, 0.3, size=8), 0, 1)
            assert normalized_auc(b) >= normalized_auc(a)


@pytest.fixture(scope="module")
def trained_planted():
    from vip.trainer import TrainConfig, train
    train_set, test_set, model = planted_task(num_queries=4, rows=1000,
                                              seed=0, test_rows=300)
    cfg = TrainConfig.fast(epochs_initial=25, epochs_biased=5,
                           hidden=(32, 32), seed=0)
    classifier, querier, _ = train(train_set, cfg)
    return classifier, querier, test_set, model


class TestAccuracyVsLengthCurve:
    def test_single_point_sweep(self, trained_planted):
        classifier, querier, test_set, _ = trained_planted
        pts = accuracy_vs_length_curve(test_set, Strategy.learned(querier),
                                       classifier, [0.05])
        assert len(pts) == 1

    def test_ranges_and_planted_target(self, trained_planted):
        classifier, querier, test_set, _ = trained_planted
        pts = accuracy_vs_length_curve(test_set, Strategy.learned(querier),
                                       classifier, [0.3, 0.1, 0.01])
        assert all(1 <= l <= 4 and 0 <= a <= 1 for l, a in pts)
        assert pts == sorted(pts)
        hits = [a for l, a in pts if l <= 2]
        assert hits and max(hits) >= 0.99

    def test_empty_sweep_rejected(self, trained_planted):
        classifier, querier, test_set, _ = trained_planted
        with pytest.raises(ValueError):
            accuracy_vs_length_curve(test_set, Strategy.learned(querier),
                                     classifier, [])


class TestOracleAgreement:
    def test_oracle_against_itself(self, rng):
        # a querier that outputs the exact MI ranking agrees with itself
        from conftest import random_model
        from vip.oracle import conditional_mutual_information
        from vip.queries import History

        model = random_model(rng, num_labels=3, num_queries=4,
                             answer_arities=[2, 2, 2, 2])

        class OracleQuerier(QuerierNet):
            def __init__(self):
                super().__init__(4, hidden=(2,),
                                 rng=np.random.default_rng(0))

            def forward(self, x):
                from vip.autodiff import Tensor
                from vip.autodiff import Tensor as T
                data = x.data if isinstance(x, T) else np.asarray(x)
                scores = np.zeros_like(data)
                for r, row in enumerate(data):
                    mask = row != 0
                    h = History(row * mask, mask,
                                tuple(int(i) for i in np.flatnonzero(mask)))
                    for q in np.flatnonzero(~mask):
                        scores[r, q] = conditional_mutual_information(
                            model, int(q), h)
                return Tensor(scores)

        from vip.data import Dataset
        from vip.oracle import sample_from_model
        from vip.queries import QuerySet
        xs, ys = sample_from_model(model, 30, seed=1)
        ds = Dataset(xs, ys, QuerySet.binary(list("abcd")),
                     tuple(f"y{i}" for i in range(3)))
        classifier = ClassifierNet(4, 3, hidden=(8,),
                                   rng=np.random.default_rng(2))
        agreement = oracle_agreement(OracleQuerier(), classifier, model, ds,
                                     StoppingRule.fixed_budget(4),
                                     eps_bits=1e-9)
        assert agreement == 1.0

    def test_query_set_mismatch(self, trained_planted):
        classifier, querier, test_set, _ = trained_planted
        wrong = DiscreteJointModel(
            prior=np.array([0.5, 0.5]),
            tables=(np.array([[0.5, 0.5], [0.5, 0.5]]),),
            answer_values=((-1.0, 1.0),),
        )
        with pytest.raises(QuerySetMismatch):
            oracle_agreement(querier, classifier, wrong, test_set,
                             StoppingRule.fixed_budget(1))

    def test_trained_planted_agreement_is_high(self, trained_planted):
        classifier, querier, test_set, model = trained_planted
        agreement = oracle_agreement(querier, classifier, model, test_set,
                                     StoppingRule.fixed_budget(1),
                                     max_trajectories=100)
        assert agreement >= 0.99

    def test_score_transform_invariance(self, trained_planted):
        classifier, querier, test_set, model = trained_planted

        class Scaled(QuerierNet):
            def __init__(self, base):
                super().__init__(base.num_queries, hidden=(2,),
                                 rng=np.random.default_rng(0))
                self.base = base

            def forward(self, x):
                from vip.autodiff import Tensor
                return Tensor(self.base.forward(x).data * 3.0 + 1.0)

        stop = StoppingRule.fixed_budget(2)
        a = oracle_agreement(querier, classifier, model, test_set, stop,
                             max_trajectories=50)
        b = oracle_agreement(Scaled(querier), classifier, model, test_set,
                             stop, max_trajectories=50)
        assert a == b


class TestLearnedVsRandom:
    def test_learned_beats_random_at_budget_one(self, trained_planted):
        classifier, querier, test_set, _ = trained_planted
        from vip.pursuit import batch_evaluate
        learned = batch_evaluate(test_set.answers, test_set.labels,
                                 Strategy.learned(querier), classifier, [1])[0]
        rand = batch_evaluate(test_set.answers, test_set.labels,
                              Strategy.random(0), classifier, [1])[0]
        assert learned >= rand

    def test_full_budget_curve_shape(self, trained_planted):
        classifier, querier, test_set, _ = trained_planted
        curve = full_budget_curve(test_set, Strategy.learned(querier),
                                  classifier)
        assert len(curve) == 4
        assert all(0 <= a <= 1 for a in curve)
