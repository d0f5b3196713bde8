import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geogate.gate_error_models import (
    INFINITY,
    MilburnErrorParams,
    SMErrorParams,
    UnsupportedParameterError,
    check_rescale,
    fit_order,
    format_rescale,
    milburn_composition,
    milburn_error_gate,
    milburn_kerr_taylor,
    polygon_target_kerr,
    sm_composition,
    sm_error_gate,
    unification_suite,
    unified_milburn_gate,
    unify_strength,
)

TWO_PI = 2 * math.pi


class TestRescale:
    @pytest.mark.parametrize("raw,expected", [(1, 1), (4.0, 4), ("inf", INFINITY), (math.inf, INFINITY)])
    def test_accepts(self, raw, expected):
        assert check_rescale(raw) == expected

    @pytest.mark.parametrize("raw", [0, -2, 1.5, "two"])
    def test_rejects(self, raw):
        with pytest.raises(ValueError):
            check_rescale(raw)

    def test_format(self):
        assert format_rescale(INFINITY) == "inf" and format_rescale(10) == "10"


class TestSM:
    def test_perfect_gate(self):
        for n in (1, 4, INFINITY):
            d = sm_error_gate(SMErrorParams(0.3, 0.0, n))
            assert d.mech_disp_x == pytest.approx(0, abs=1e-15)
            assert d.mech_disp_p == pytest.approx(0, abs=1e-15)
            assert d.kerr_error == pytest.approx(0, abs=1e-15)
            assert d.kerr_target == pytest.approx(TWO_PI * 0.09)

    def test_infinite_n(self):
        d = sm_error_gate(SMErrorParams(0.2, 0.07, INFINITY))
        assert d.as_tuple() == pytest.approx((0, 0, TWO_PI * 0.04 * 0.07, TWO_PI * 0.04))

    def test_frozen_n1(self):
        d = sm_error_gate(SMErrorParams(0.001, 0.05, 1))
        assert d.mech_disp_x == pytest.approx(math.sqrt(2) * 1e-3 * math.sin(0.1 * math.pi), rel=1e-14)
        assert d.kerr_error == pytest.approx(1e-6 * (0.1 * math.pi - math.sin(0.1 * math.pi)), rel=1e-12)

    @settings(max_examples=200, deadline=None)
    @given(k=st.floats(0, 1), eta=st.floats(-0.2, 0.2), n=st.integers(1, 12))
    def test_matches_composed_loop(self, k, eta, n):
        # the decomposition factors multiply back to the loop of the whole rescaled gate
        d = sm_error_gate(SMErrorParams(k, eta, n))
        c = sm_composition(SMErrorParams(k, eta, n))
        assert d.mech_disp_x == pytest.approx(c.disp_x, abs=1e-12)
        assert d.mech_disp_p == pytest.approx(-c.disp_p, abs=1e-12)
        assert d.kerr_total == pytest.approx(c.kerr, abs=1e-9 * max(1.0, k * k * n * n))

    @settings(max_examples=100, deadline=None)
    @given(k=st.floats(0.01, 1), eta=st.floats(-0.2, 0.2), n=st.integers(1, 30))
    def test_residual_displacement_shrinks(self, k, eta, n):
        assert sm_error_gate(SMErrorParams(k, eta, n)).mech_norm <= 2 * math.sqrt(2) * k / n + 1e-15

    def test_composition_needs_finite_n(self):
        with pytest.raises(UnsupportedParameterError):
            sm_composition(SMErrorParams(0.1, 0.1, INFINITY))


class TestMilburn:
    def test_perfect_gate(self):
        for n in (1, 3, INFINITY):
            d = milburn_error_gate(MilburnErrorParams(0.2, 6, 0.0, n))
            assert d.mech_disp_x == pytest.approx(0, abs=1e-15)
            assert d.mech_disp_p == pytest.approx(0, abs=1e-15)
            assert d.kerr_error == pytest.approx(0, abs=1e-15)
            assert d.kerr_target == pytest.approx(polygon_target_kerr(0.2, 6))

    @settings(max_examples=200, deadline=None)
    @given(
        lam=st.floats(0, 1),
        n_p=st.integers(3, 40),
        xi=st.floats(-0.2, 0.2),
        n=st.integers(1, 8),
    )
    def test_matches_composed_loop(self, lam, n_p, xi, n):
        p = MilburnErrorParams(lam, n_p, xi, n)
        d, c = milburn_error_gate(p), milburn_composition(p)
        scale = max(1.0, lam * lam * n_p * n_p)
        assert d.mech_disp_x == pytest.approx(c.disp_x, abs=1e-10 * max(1.0, lam * n_p))
        assert d.mech_disp_p == pytest.approx(-c.disp_p, abs=1e-10 * max(1.0, lam * n_p))
        assert d.kerr_total == pytest.approx(c.kerr, abs=1e-9 * scale)

    def test_taylor_examples(self):
        assert milburn_kerr_taylor(MilburnErrorParams(0.001, 6, 0.01, 1)) == pytest.approx(-TWO_PI * 1e-8, rel=1e-12)
        assert milburn_kerr_taylor(MilburnErrorParams(0.3, 5, 0.0, 1)) == 0.0

    @pytest.mark.parametrize("xi", [-0.01, -1e-4, 1e-6, 0.003, 0.01])
    def test_taylor_ratio(self, xi):
        one = milburn_kerr_taylor(MilburnErrorParams(0.001, 6, xi, 1))
        inf = milburn_kerr_taylor(MilburnErrorParams(0.001, 6, xi, INFINITY))
        assert one / inf == pytest.approx(2.0, abs=1e-12)

    def test_taylor_unavailable_for_finite_n(self):
        with pytest.raises(UnsupportedParameterError):
            milburn_kerr_taylor(MilburnErrorParams(0.001, 6, 0.01, 3))

    @pytest.mark.parametrize("n", [1, INFINITY])
    def test_taylor_is_first_order(self, n):
        lam, n_p = 0.001, 6
        gaps = []
        for xi in (1e-2, 5e-3):
            exact = milburn_error_gate(MilburnErrorParams(lam, n_p, xi, n)).kerr_error
            gaps.append(abs(exact - milburn_kerr_taylor(MilburnErrorParams(lam, n_p, xi, n))))
        # the remainder is quadratic in xi
        assert gaps[0] / gaps[1] == pytest.approx(4.0, rel=0.05)


class TestUnification:
    def test_strength(self):
        assert unify_strength(0.001, 0.05, 6) == pytest.approx(math.sqrt(2) * 0.001 * 1.05 * math.pi / 3)
        assert unify_strength(0.4, 0.0, 8) == pytest.approx(math.sqrt(2) * 0.4 * TWO_PI / 8)

    def test_eta_zero_is_exact(self):
        r = unification_suite(0.001, 0.0, 1, [10, 100, 1000])
        assert max(r.distances) < 1e-15
        assert r.order is None

    @pytest.mark.parametrize("n", [1, 3])
    def test_first_order(self, n):
        r = unification_suite(0.001, 0.05, n, [10, 100, 1000])
        assert -1.1 <= r.order <= -0.9

    def test_infinite_n_converges(self):
        r = unification_suite(0.001, 0.05, INFINITY, [10, 100, 1000])
        assert r.distances == sorted(r.distances, reverse=True)
        # only the Kerr error survives at N = inf, and it closes at second order
        assert r.order == pytest.approx(-2.0, abs=0.1)

    def test_target_uses_error_free_strength(self):
        d = unified_milburn_gate(0.001, 0.05, 100, 1)
        assert d.kerr_target == pytest.approx(polygon_target_kerr(unify_strength(0.001, 0, 100), 100))

    @pytest.mark.parametrize("n", [1, INFINITY])
    def test_taylor_gap_is_second_order(self, n):
        gaps = [unification_suite(0.1, xi, n, [10**4]).details["taylor_first_order_gap"] for xi in (1e-2, 5e-3)]
        assert gaps[0] / gaps[1] == pytest.approx(4.0, rel=0.05)

    def test_sequence_must_increase(self):
        with pytest.raises(ValueError):
            unification_suite(0.1, 0.05, 1, [100, 10])

    def test_fit_order(self):
        assert fit_order([1, 2, 4, 8], [1, 0.25, 1 / 16, 1 / 64]) == pytest.approx(-2.0)
