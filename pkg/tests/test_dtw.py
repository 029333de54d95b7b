import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import bumpsense as bs
from bumpsense.dtw import DtwConfig, dtw_cost_matrix, dtw_distance


def brute_force_dtw(a, b):
    """Memo-free recursion over all monotone warping paths (the oracle)."""

    def rec(i, j):
        cost = abs(a[i] - b[j])
        if i == 0 and j == 0:
            return cost
        if i == 0:
            return cost + rec(0, j - 1)
        if j == 0:
            return cost + rec(i - 1, 0)
        return cost + min(rec(i - 1, j), rec(i, j - 1), rec(i - 1, j - 1))

    return rec(len(a) - 1, len(b) - 1)


finite_values = st.floats(min_value=-100, max_value=100, allow_nan=False)
short_seq = st.lists(finite_values, min_size=1, max_size=8)


class TestAgainstOracle:
    def test_simple_case_matches_oracle(self):
        a, b = [1.0, 2.0, 3.0], [2.0, 3.0, 4.0]
        expected = brute_force_dtw(a, b)
        assert expected == 2.0  # frozen from the oracle
        assert dtw_distance(a, b) == expected

    def test_random_corpus_exact(self):
        rng = np.random.default_rng(123)
        for _ in range(300):
            n, m = rng.integers(1, 9), rng.integers(1, 9)
            a = rng.normal(size=n).tolist()
            b = rng.normal(size=m).tolist()
            assert dtw_distance(a, b) == brute_force_dtw(a, b)

    @given(short_seq, short_seq)
    @settings(max_examples=100, deadline=None)
    def test_property_matches_oracle(self, a, b):
        assert dtw_distance(a, b) == pytest.approx(brute_force_dtw(a, b), abs=1e-12)


class TestSpecCases:
    def test_identity_zero(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            s = rng.normal(size=rng.integers(1, 30))
            assert dtw_distance(s, s) == 0.0

    def test_repeated_zeros_vs_single_zero(self):
        assert dtw_distance([0.0, 0.0, 0.0], [0.0]) == 0.0

    def test_non_negative(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            a, b = rng.normal(size=5), rng.normal(size=7)
            assert dtw_distance(a, b) >= 0.0

    def test_symmetry(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            a, b = rng.normal(size=6), rng.normal(size=9)
            assert dtw_distance(a, b) == dtw_distance(b, a)

    @given(st.lists(finite_values, min_size=2, max_size=12), st.floats(0.1, 10))
    @settings(max_examples=50, deadline=None)
    def test_shift_sensitivity(self, a, c):
        a = np.asarray(a)
        assert dtw_distance(a, a + c) > 0.0


class TestBand:
    def test_band_cost_at_least_unconstrained(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            a, b = rng.normal(size=10), rng.normal(size=10)
            free = dtw_distance(a, b)
            for w in (1, 2, 5):
                assert dtw_distance(a, b, DtwConfig(window=w)) >= free - 1e-12

    def test_wide_band_equals_unconstrained(self):
        rng = np.random.default_rng(4)
        a, b = rng.normal(size=8), rng.normal(size=11)
        cfg = DtwConfig(window=max(len(a), len(b)))
        assert dtw_distance(a, b, cfg) == dtw_distance(a, b)

    def test_band_too_narrow_rejected(self):
        with pytest.raises(ValueError, match="connect"):
            dtw_distance([1.0, 2.0, 3.0, 4.0, 5.0], [1.0], DtwConfig(window=2))

    def test_window_below_one_rejected(self):
        with pytest.raises(ValueError):
            DtwConfig(window=0)

    def test_banded_matches_banded_matrix(self):
        rng = np.random.default_rng(5)
        a, b = rng.normal(size=9), rng.normal(size=9)
        cfg = DtwConfig(window=3)
        assert dtw_distance(a, b, cfg) == pytest.approx(
            dtw_cost_matrix(a, b, cfg)[-1, -1]
        )


class TestValidation:
    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            dtw_distance([], [1.0])
        with pytest.raises(ValueError):
            dtw_distance([1.0], [])

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            dtw_distance([1.0, float("nan")], [1.0])
        with pytest.raises(ValueError):
            dtw_distance([1.0], [float("inf")])

    def test_unsupported_cost_rejected(self):
        with pytest.raises(ValueError):
            DtwConfig(local_cost="squared")


class TestCostMatrix:
    def test_terminal_cell_equals_distance(self):
        rng = np.random.default_rng(6)
        for _ in range(10):
            a = rng.normal(size=rng.integers(1, 12))
            b = rng.normal(size=rng.integers(1, 12))
            assert dtw_cost_matrix(a, b)[-1, -1] == pytest.approx(dtw_distance(a, b))
