import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from entroscope import ppm_reference as ref
from entroscope.core import Alphabet, SymbolSequence
from entroscope.ppm import (KT, LAPLACE, ContextCountTable, PPMMeasure, SmoothingRule, markov_conditional,
                            ppm_conditional, ppm_mixture_log_prob, ppm_order_log_prob)

CONFIGS = list(itertools.product([2, 3], [1.0, 0.5], ["rational", "log"]))


def strings(max_len=10, alphabet=3):
    return st.lists(st.integers(0, alphabet - 1), max_size=max_len)


class TestWorkedExamples:
    def test_order_zero_laplace(self):
        s = SymbolSequence.from_string(2, "0110")
        assert math.exp(ppm_order_log_prob(s, 0)) == pytest.approx(1 / 30)

    def test_order_one_laplace(self):
        s = SymbolSequence.from_string(2, "0101")
        # 1/2 * 1/2 * 1/2 * 2/3 with truncated first context
        assert math.exp(ppm_order_log_prob(s, 1)) == pytest.approx(1 / 12)

    def test_mixture_of_01_is_five_24ths(self):
        assert ref.mixture_prob([0, 1], 2, exact=True) == Fraction(5, 24)
        assert math.exp(ppm_mixture_log_prob(SymbolSequence.from_string(2, "01"))) == pytest.approx(5 / 24, rel=1e-14)

    def test_conditional_after_0(self):
        assert ref.conditional([0], 2, exact=True) == [Fraction(7, 12), Fraction(5, 12)]
        d = ppm_conditional(SymbolSequence.from_string(2, "0"))
        np.testing.assert_allclose(d.probs, [7 / 12, 5 / 12], rtol=1e-14)

    def test_empty_history_is_uniform(self):
        np.testing.assert_allclose(PPMMeasure(3).conditional([]).probs, [1 / 3] * 3, rtol=1e-15)

    def test_markov_conditional(self):
        s = SymbolSequence.from_string(2, "00010")
        table = ContextCountTable.from_sequence(s, 1)
        assert table.counts([0]) == [2, 1]
        np.testing.assert_allclose(markov_conditional(table, [0]).probs, [3 / 5, 2 / 5])
        np.testing.assert_allclose(markov_conditional(table, [0], KT).probs, [2.5 / 4, 1.5 / 4])


class TestSmoothing:
    def test_parse(self):
        assert SmoothingRule.parse("kt") == KT
        assert SmoothingRule.parse("laplace") == LAPLACE
        with pytest.raises(ValueError):
            SmoothingRule.parse("good-turing")

    def test_positive(self):
        with pytest.raises(ValueError):
            SmoothingRule(0.0)


class TestAgainstReference:
    @pytest.mark.parametrize("A,beta,scheme", CONFIGS)
    @pytest.mark.parametrize("max_order", [None, 2])
    def test_all_paths_match(self, A, beta, scheme, max_order):
        rng = np.random.default_rng(A * 100 + int(beta * 10))
        m = PPMMeasure(A, beta, scheme, max_order)
        for trial in range(6):
            n = int(rng.integers(1, 11))
            x = rng.integers(0, A, n) if trial % 2 else np.full(n, trial % A)
            expect = ref.mixture_log_prob(x.tolist(), A, beta, scheme, max_order)
            assert m.log_prob(x) == pytest.approx(expect, abs=1e-12)
            cond, logp = m.stream(x)
            assert logp.sum() == pytest.approx(expect, abs=1e-12)
            rows = m.suffix_conditionals(x)
            for i in range(n + 1):
                want = ref.conditional(x[:i].tolist(), A, beta, scheme, max_order)
                if i < n:
                    np.testing.assert_allclose(cond[i], want, atol=1e-13)
                np.testing.assert_allclose(m.conditional(x[:i]).probs, want, atol=1e-13)
                suffix = ref.conditional(x[n - i:].tolist(), A, beta, scheme, max_order)
                np.testing.assert_allclose(rows[i], suffix, atol=1e-13)


class TestMeasureProperties:
    @settings(max_examples=60, deadline=None)
    @given(strings(9), st.sampled_from(CONFIGS))
    def test_kolmogorov_consistency(self, xs, cfg):
        A, beta, scheme = cfg
        xs = [v % A for v in xs]
        m = PPMMeasure(A, beta, scheme)
        parent = m.log_prob(xs)
        children = [m.log_prob(xs + [a]) for a in range(A)]
        assert math.fsum(math.exp(c - parent) for c in children) == pytest.approx(1.0, abs=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(strings(12, 2))
    def test_prefix_monotone(self, xs):
        m = PPMMeasure(2)
        lp = [m.log_prob(xs[:i]) for i in range(len(xs) + 1)]
        assert all(b <= a + 1e-12 for a, b in zip(lp, lp[1:]))

    @settings(max_examples=40, deadline=None)
    @given(strings(8, 3), st.integers(0, 12))
    def test_order_saturation(self, xs, extra):
        n = len(xs)
        if n == 0:
            return
        m = PPMMeasure(3)
        base = m.order_log_prob(xs, n - 1)
        assert m.order_log_prob(xs, n - 1 + extra) == pytest.approx(base, abs=1e-13)

    def test_order_matches_reference(self):
        rng = np.random.default_rng(3)
        x = rng.integers(0, 3, 9).tolist()
        m = PPMMeasure(3, KT)
        for k in range(10):
            assert m.order_log_prob(x, k) == pytest.approx(math.log(ref.order_prob(x, k, 3, 0.5)), abs=1e-12)

    def test_exact_tail_closure(self):
        # the exact infinite mixture over rationals equals the closed-form sum
        x = [0, 0, 1, 0]
        total = sum(ref.exact_weight(k) * ref.order_prob(x, k, 2, 1, exact=True) for k in range(200))
        closed = ref.mixture_prob(x, 2, exact=True)
        assert abs(float(total - closed)) <= float(ref.exact_weight_tail(200))

    def test_constant_string_probability_closed_form(self):
        # P_k(0^m) = 2^-k / (m-k+1) for k <= m-1 under Laplace smoothing
        m_len = 40
        x = np.zeros(m_len, dtype=np.int64)
        meas = PPMMeasure(2)
        for k in (0, 1, 5, 39):
            assert meas.order_log_prob(x, k) == pytest.approx(-k * math.log(2) - math.log(m_len - k + 1), abs=1e-12)

    def test_max_order_changes_only_long_repeats(self):
        x = np.zeros(30, dtype=np.int64)
        assert PPMMeasure(2, max_order=3).log_prob(x) < PPMMeasure(2, max_order=None).log_prob(x)
        y = np.array([0, 1, 1, 0, 1, 0, 0, 0, 1, 1])
        # no context longer than 4 repeats in y, so the cap at 6 is invisible
        assert PPMMeasure(2, max_order=6).log_prob(y) == pytest.approx(PPMMeasure(2, max_order=None).log_prob(y),
                                                                      abs=1e-13)

    def test_large_alphabet_stream_fallback(self):
        m = PPMMeasure(100)
        x = np.array([5, 7, 5, 7, 5, 99])
        cond, logp = m.stream(x)
        assert logp.sum() == pytest.approx(m.log_prob(x), abs=1e-12)
        np.testing.assert_allclose(cond.sum(axis=1), 1.0, atol=1e-12)

    def test_long_sequence_stream_matches_batch(self):
        rng = np.random.default_rng(11)
        x = np.concatenate([rng.integers(0, 2, 3000), np.zeros(500, dtype=np.int64), rng.integers(0, 2, 1000)])
        m = PPMMeasure(2)
        assert m.stream(x)[1].sum() == pytest.approx(m.log_prob(x), rel=1e-11)

    def test_alphabet_mismatch(self):
        with pytest.raises(ValueError):
            PPMMeasure(2).log_prob(SymbolSequence(3, [2]))

    def test_normalization_by_enumeration_exact(self):
        for n in range(1, 5):
            total = sum(ref.mixture_prob(list(s), 3, Fraction(1, 2), exact=True)
                        for s in itertools.product(range(3), repeat=n))
            assert total == 1
