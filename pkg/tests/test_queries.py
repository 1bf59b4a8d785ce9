import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from vip.errors import DuplicateQuery, IllegalRawValue
from vip.queries import (AnswerDomain, History, Posterior, QuerySet,
                         QuerySpec, append_answer, encode_answer,
                         posterior_entropy, to_masked_vector)


PM1 = QuerySpec(0, "fever", AnswerDomain.BINARY_PM1)
B01 = QuerySpec(1, "fever", AnswerDomain.BINARY01)
TER = QuerySpec(2, "fever", AnswerDomain.TERNARY_PM10)


class TestEncodeAnswer:
    def test_present_pm1(self):
        assert encode_answer("present", PM1) == 1.0

    def test_yes_binary01(self):
        assert encode_answer("yes", B01) == 1.0

    def test_absent_pm1(self):
        assert encode_answer("absent", PM1) == -1.0

    def test_numeric_raws(self):
        assert encode_answer(1, PM1) == 1.0
        assert encode_answer(0, B01) == 0.0

    def test_ternary_remap_keeps_zero_free(self):
        # "can't say" maps to 0.5 so 0 stays reserved for "unasked"
        assert encode_answer("can't say", TER) == 0.5
        assert encode_answer(0, TER) == 0.5
        assert encode_answer("no", TER) == -1.0

    def test_illegal_raw(self):
        with pytest.raises(IllegalRawValue):
            encode_answer("maybe", PM1)
        with pytest.raises(IllegalRawValue):
            encode_answer(0, PM1)  # 0 is ambiguous under +-1 coding
        with pytest.raises(IllegalRawValue):
            encode_answer(2, B01)


class TestHistory:
    def test_single_append(self):
        h = append_answer(History.empty(5), 3, 1.0)
        assert h.order == (3,)
        assert h.values[3] == 1.0
        assert h.mask[3]
        assert np.count_nonzero(h.mask) == 1

    def test_two_appends_keep_order(self):
        h = append_answer(append_answer(History.empty(4), 2, 1.0), 0, -1.0)
        assert h.order == (2, 0)
        assert np.count_nonzero(h.mask) == 2

    def test_duplicate_append_rejected(self):
        h = append_answer(History.empty(4), 1, 1.0)
        with pytest.raises(DuplicateQuery):
            append_answer(h, 1, -1.0)

    def test_append_is_persistent(self):
        h0 = History.empty(3)
        append_answer(h0, 0, 1.0)
        assert not h0.mask.any()

    def test_masked_vector_empty(self):
        assert to_masked_vector(History.empty(4)).tolist() == [0, 0, 0, 0]

    def test_masked_vector_single(self):
        h = append_answer(History.empty(3), 1, 1.0)
        assert to_masked_vector(h).tolist() == [0, 1, 0]

    def test_masked_vector_full_equals_answers(self):
        values = np.array([1.0, -1.0, 1.0])
        h = History.empty(3)
        for i, v in enumerate(values):
            h = append_answer(h, i, v)
        assert np.array_equal(to_masked_vector(h), values)

    def test_masked_vector_order_insensitive(self):
        a = append_answer(append_answer(History.empty(3), 0, 1.0), 2, -1.0)
        b = append_answer(append_answer(History.empty(3), 2, -1.0), 0, 1.0)
        assert np.array_equal(to_masked_vector(a), to_masked_vector(b))
        assert a.order != b.order

    @given(st.lists(st.sampled_from([(0, 1.0), (1, -1.0), (2, 1.0), (3, -1.0)]),
                    unique_by=lambda p: p[0], max_size=4))
    def test_zeros_exactly_at_unmasked(self, pairs):
        h = History.empty(4)
        for q, a in pairs:
            h = append_answer(h, q, a)
        vec = to_masked_vector(h)
        assert np.all((vec == 0) | h.mask)
        assert np.all(vec[~h.mask] == 0)


class TestPosteriorEntropy:
    def test_deterministic(self):
        assert posterior_entropy(Posterior([1.0, 0.0])) == 0.0

    def test_uniform_binary(self):
        assert posterior_entropy(Posterior([0.5, 0.5])) == pytest.approx(1.0)

    def test_skewed(self):
        # -0.9 log2 0.9 - 0.1 log2 0.1
        assert posterior_entropy(Posterior([0.9, 0.1])) == pytest.approx(
            0.469, abs=1e-3)

    @pytest.mark.parametrize("num_labels", range(2, 9))
    def test_uniform_maximizes(self, num_labels, rng):
        uniform = posterior_entropy(
            Posterior(np.full(num_labels, 1.0 / num_labels)))
        assert uniform == pytest.approx(np.log2(num_labels))
        for _ in range(50):
            p = rng.dirichlet(np.ones(num_labels))
            assert posterior_entropy(Posterior(p)) <= uniform + 1e-12

    def test_invalid_posterior_rejected(self):
        with pytest.raises(ValueError):
            Posterior([0.5, 0.6])


class TestQuerySet:
    def test_json_round_trip(self):
        qs = QuerySet.binary(["fever", "cough"], AnswerDomain.BINARY01)
        doc = json.loads(qs.to_json())
        assert doc["queries"][0] == {"id": 0, "name": "fever",
                                     "domain": "Binary01"}
        assert QuerySet.from_json(qs.to_json()) == qs

    def test_ids_must_be_dense(self):
        with pytest.raises(ValueError):
            QuerySet((QuerySpec(1, "a", AnswerDomain.BINARY01),))

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            QuerySet(())
