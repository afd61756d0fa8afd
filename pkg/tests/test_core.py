import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from entroscope.core import (Alphabet, ConditionalDistribution, SymbolSequence, UniformMeasure, log_sum_exp,
                             sequence_log_prob)
from entroscope.ppm import PPMMeasure


class TestAlphabetAndSequence:
    def test_rejects_bad_size(self):
        for bad in (0, -1, 2.5):
            with pytest.raises(ValueError):
                Alphabet(bad)

    def test_out_of_alphabet_names_position(self):
        with pytest.raises(ValueError, match="position 2"):
            SymbolSequence(2, [0, 1, 2])

    def test_from_string_and_slicing(self):
        s = SymbolSequence.from_string(3, "0 12")
        assert list(s) == [0, 1, 2]
        assert s[1:] == SymbolSequence(3, [1, 2])
        assert s[-1] == 2
        assert len(s.append(0)) == 4

    def test_data_is_read_only(self):
        s = SymbolSequence(2, [0, 1])
        with pytest.raises(ValueError):
            s.data[0] = 1


class TestLogSumExp:
    def test_empty_is_zero_weight(self):
        assert log_sum_exp([]) == -math.inf

    def test_all_zero_weights(self):
        assert log_sum_exp([-math.inf, -math.inf]) == -math.inf

    def test_nan_rejected(self):
        with pytest.raises(ValueError):
            log_sum_exp([0.0, math.nan])

    @given(st.lists(st.floats(-700, 700), min_size=1, max_size=20))
    def test_matches_direct_sum(self, xs):
        top = max(xs)
        direct = top + math.log(sum(math.exp(x - top) for x in xs))
        assert log_sum_exp(xs) == pytest.approx(direct, rel=1e-12, abs=1e-12)


class TestConditionalDistribution:
    def test_argmax_tie_goes_to_smallest(self):
        d = ConditionalDistribution.from_probs(Alphabet(3), [0.25, 0.375, 0.375])
        assert d.argmax() == 1
        assert ConditionalDistribution.uniform(Alphabet(4)).argmax() == 0

    def test_shape_checked(self):
        with pytest.raises(ValueError):
            ConditionalDistribution(Alphabet(2), np.zeros(3))

    def test_total(self):
        d = ConditionalDistribution.from_probs(Alphabet(2), [0.3, 0.7])
        assert d.total() == pytest.approx(1.0, abs=1e-15)
        assert d[1] == pytest.approx(0.7)


class TestSequenceLogProb:
    def test_uniform(self):
        s = SymbolSequence(4, [0, 3, 2])
        assert sequence_log_prob(UniformMeasure(4), s) == pytest.approx(-3 * math.log(4))

    def test_chain_rule_agrees_with_fast_path(self):
        m = PPMMeasure(2)
        s = SymbolSequence.from_string(2, "0110100111")
        np.testing.assert_allclose(sequence_log_prob(m, s, chain_rule=True), sequence_log_prob(m, s), atol=1e-12)

    def test_alphabet_mismatch(self):
        with pytest.raises(ValueError):
            sequence_log_prob(UniformMeasure(3), SymbolSequence(2, [0]))
