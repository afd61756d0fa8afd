import numpy as np
import pytest
from hypothesis import given, strategies as st

from entroscope.quantize import (QuantizationLevel, ReferenceMeasure, cell_index, cell_indices, quantize_sequence,
                                 refine_parent)

U = ReferenceMeasure.uniform()
G = ReferenceMeasure.gaussian()


class TestCellIndex:
    def test_examples(self):
        assert cell_index(0.3, 2, U) == 1
        assert cell_index(1.0, 3, U) == 7
        assert cell_index(0.0, 1, G) == 1
        assert cell_index(0.0, 0, U) == 0

    def test_outside_support(self):
        with pytest.raises(ValueError):
            cell_index(1.5, 2, U)
        with pytest.raises(ValueError):
            cell_index(float("nan"), 2, G)
        with pytest.raises(ValueError, match="position 1"):
            quantize_sequence([0.2, -0.1], 3, U)

    def test_bad_level(self):
        with pytest.raises(ValueError):
            cell_index(0.5, -1, U)
        with pytest.raises(ValueError):
            cell_index(0.5, 60, U)

    def test_sequences(self):
        assert list(quantize_sequence([0.1, 0.6], 1, U)) == [0, 1]
        assert list(quantize_sequence([0.3, 0.8], 2, U)) == [1, 3]
        s = quantize_sequence([0.1, 0.9, 0.4], 0, U)
        assert s.alphabet.size == 1 and list(s) == [0, 0, 0]


class TestNesting:
    def test_parent(self):
        assert refine_parent(5) == 2
        assert refine_parent(0) == 0
        with pytest.raises(ValueError):
            refine_parent(8, 2)

    @pytest.mark.parametrize("ref", [U, G], ids=["uniform", "gaussian"])
    def test_level_six_to_five(self, ref):
        xs = ref.quantile(np.random.default_rng(0).random(10_000))
        np.testing.assert_array_equal(refine_parent(cell_indices(xs, 6, ref)), cell_indices(xs, 5, ref))

    @given(st.floats(0, 1), st.integers(0, 20))
    def test_nesting_property(self, x, r):
        assert refine_parent(cell_index(x, r + 1, U)) == cell_index(x, r, U)

    @given(st.floats(-40, 40), st.floats(-40, 40), st.integers(0, 20))
    def test_monotone(self, a, b, r):
        lo, hi = min(a, b), max(a, b)
        assert cell_index(lo, r, G) <= cell_index(hi, r, G)


class TestReference:
    def test_quantile_inverts_cdf(self):
        u = np.linspace(1e-6, 1 - 1e-6, 20_001)
        for ref in (U, G):
            np.testing.assert_allclose(ref.cdf(ref.quantile(u)), u, atol=1e-9)

    def test_cell_mass(self):
        level = QuantizationLevel(4)
        assert level.cells == 16 and level.cell_mass == 1 / 16 and level.alphabet.size == 16
        edges = G.quantile(np.arange(17) / 16)
        np.testing.assert_allclose(np.diff(G.cdf(edges)), 1 / 16, atol=1e-15)

    def test_parse(self):
        assert ReferenceMeasure.parse("normal") == G
        with pytest.raises(ValueError):
            ReferenceMeasure.parse("laplace")

    def test_gaussian_log_density(self):
        assert G.log_density(0.0) == pytest.approx(-0.5 * np.log(2 * np.pi))
