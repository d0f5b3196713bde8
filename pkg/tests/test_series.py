import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import poisson

from geogate.series import (
    FockWindow,
    autocorrelation,
    band_limit,
    log_poisson,
    poisson_window,
    series_fidelity,
    series_purity,
    series_qfunction,
    toeplitz_form,
    window_weights,
)


def dense_form(u, decay):
    d = np.subtract.outer(np.arange(u.size), np.arange(u.size))
    return u @ np.exp(-decay * d * d) @ u.conj()


class TestWindow:
    def test_vacuum(self):
        w = poisson_window(0.0)
        assert (w.l_min, w.l_max) == (0, 0)

    def test_alpha_one(self):
        w = poisson_window(1.0)
        assert (w.l_min, w.l_max) == (0, 14)
        assert w.l_max <= 25

    def test_alpha_hundred(self):
        # direct tail summation of the log-weights, frozen
        w = poisson_window(100.0)
        assert (w.l_min, w.l_max) == (9305, 10711)
        # roughly seven standard deviations each side at this tail mass
        assert 6.5 < (10000 - w.l_min) / 100 < 7.5 and 6.5 < (w.l_max - 10000) / 100 < 7.5

    @pytest.mark.parametrize("alpha", [0.5, 3.0, 30.0, 100.0])
    def test_tails_below_eps(self, alpha):
        w = poisson_window(alpha, 1e-12)
        mean = alpha * alpha
        assert poisson.cdf(w.l_min - 1, mean) < 1e-12
        assert poisson.sf(w.l_max, mean) < 1e-12
        # and the window is tight: one label less on either side breaks the bound
        if w.l_min > 0:
            assert poisson.cdf(w.l_min, mean) >= 1e-12
        assert poisson.sf(w.l_max - 1, mean) >= 1e-12

    def test_rejects(self):
        with pytest.raises(ValueError):
            poisson_window(-1.0)
        with pytest.raises(ValueError):
            poisson_window(1.0, 0.0)
        with pytest.raises(ValueError):
            FockWindow(3, 2, 1e-12)

    def test_weights_normalised(self):
        w = poisson_window(100.0)
        weights = window_weights(100.0, w)
        assert weights.sum() == pytest.approx(1.0, abs=1e-14)
        ref = poisson.pmf(w.labels, 1e4)
        assert np.allclose(weights, ref / ref.sum(), rtol=1e-10, atol=0)

    def test_log_poisson_large_mean(self):
        assert log_poisson(1e8, np.array([1e8]))[0] == pytest.approx(poisson.logpmf(1e8, 1e8), rel=1e-12)


class TestForms:
    @settings(max_examples=50, deadline=None)
    @given(n=st.integers(1, 60), decay=st.floats(0.0, 5.0), seed=st.integers(0, 2**31))
    def test_toeplitz_matches_dense(self, n, decay, seed):
        rng = np.random.default_rng(seed)
        u = rng.normal(size=n) + 1j * rng.normal(size=n)
        ref = dense_form(u, decay)
        assert abs(toeplitz_form(u, decay) - ref) < 1e-10 * max(1.0, abs(ref))
        assert abs(toeplitz_form(u, decay, banded=False) - ref) < 1e-10 * max(1.0, abs(ref))

    def test_autocorrelation_banded_equals_full(self):
        rng = np.random.default_rng(0)
        u = rng.normal(size=40) + 1j * rng.normal(size=40)
        assert np.allclose(autocorrelation(u, 7), autocorrelation(u)[:8], atol=1e-12)

    def test_band_limit(self):
        assert band_limit(0.0, 100) == 99
        assert band_limit(34.0, 100) == 1

    def test_fidelity_purity_at_zero(self):
        w = poisson_window(3.0)
        weights = window_weights(3.0, w)
        assert series_fidelity(weights, w, 0.0, 0.0) == pytest.approx(1.0, abs=1e-14)
        assert series_purity(weights, 0.0) == pytest.approx(1.0, abs=1e-14)

    @settings(max_examples=50, deadline=None)
    @given(phase=st.floats(-1, 1), decay=st.floats(0, 2))
    def test_bounds(self, phase, decay):
        w = poisson_window(2.0)
        weights = window_weights(2.0, w)
        f = series_fidelity(weights, w, phase, decay)
        p = series_purity(weights, decay)
        assert -1e-12 <= f <= 1 + 1e-12
        assert -1e-12 <= p <= 1 + 1e-12
        # overlap with a pure state is bounded by the purity
        assert f * f <= p + 1e-12

    def test_q_vacuum(self):
        w = poisson_window(0.0)
        q = series_qfunction(0.0, w, 0.0, 0.0, np.array([0.0, 1.0]))
        assert q == pytest.approx([1 / math.pi, math.exp(-1) / math.pi], rel=1e-12)

    def test_q_coherent_peak(self):
        w = poisson_window(100.0)
        q = series_qfunction(100.0, w, 0.0, 0.0, np.array([100.0, 100.5 + 0j]))
        assert q == pytest.approx([1 / math.pi, math.exp(-0.25) / math.pi], rel=1e-9)

    def test_q_tail_converges_with_window(self):
        # far from the peak the window cut shows up at the sqrt(tail) level
        exact = math.exp(-4.0) / math.pi
        loose = series_qfunction(100.0, poisson_window(100.0, 1e-12), 0.0, 0.0, np.array([102.0 + 0j]))[0]
        tight = series_qfunction(100.0, poisson_window(100.0, 1e-20), 0.0, 0.0, np.array([102.0 + 0j]))[0]
        assert abs(loose / exact - 1) < 1e-6
        assert abs(tight / exact - 1) < 1e-10
