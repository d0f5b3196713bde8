import math

import numpy as np
import pytest

from geogate.optomech_analytic import FieldParams, series_continuous, series_pulsed
from geogate.oracle import (
    ConvergenceError,
    TruncationConfig,
    TruncationError,
    annihilation,
    build_operators,
    check_boundary,
    coherent_amplitudes,
    displacement_conjugation_check,
    dump_density_csv,
    exp_unitary,
    from_blocks,
    initial_state,
    is_hermitian,
    kerr_target_state,
    lindblad_evolve,
    load_density_csv,
    optomech_lindblad_blocks,
    partial_trace_field,
    partial_trace_mech,
    purity_of,
    qfunction_of,
    run_continuous,
    run_continuous_lindblad,
    run_pulsed,
    step_halving,
    thermal_populations,
    to_blocks,
)
from geogate.phase_space import PulseParams, pulsed_coefficients

SMALL = TruncationConfig(15, 20)


class TestConfig:
    def test_rejects_tiny_and_huge(self):
        with pytest.raises(ValueError):
            TruncationConfig(1, 5)
        with pytest.raises(ValueError):
            TruncationConfig(100, 100, max_dim=4000)

    def test_for_gate(self):
        cfg = TruncationConfig.for_gate(1.0, 0.1)
        assert cfg.field_dim == 19
        disp = 0.1 * 19
        assert cfg.mech_dim == math.ceil(disp**2 + 8 * disp + 15)


class TestOperators:
    def test_commutator_below_cutoff(self):
        a = annihilation(12)
        comm = a @ a.conj().T - a.conj().T @ a
        assert np.allclose(comm[:-1, :-1], np.eye(11), atol=1e-14)

    def test_creation_matrix_element(self):
        ops = build_operators(TruncationConfig(3, 4))
        assert ops.b1.conj().T[1, 0] == pytest.approx(1.0)

    def test_hamiltonian_hermitian(self):
        h = build_operators(SMALL).hamiltonian(0.3)
        assert np.max(np.abs(h - h.conj().T)) < 1e-14

    def test_quadratures(self):
        ops = build_operators(TruncationConfig(2, 10))
        comm = ops.x1 @ ops.p1 - ops.p1 @ ops.x1
        assert np.allclose(comm[:-1, :-1], 1j * np.eye(9), atol=1e-14)


class TestExpUnitary:
    def test_zero_time(self):
        h = build_operators(TruncationConfig(4, 5)).hamiltonian(0.2)
        assert np.allclose(exp_unitary(h, 0.0), np.eye(20), atol=1e-14)

    def test_number_periodicity(self):
        n = np.diag(np.arange(9.0)).astype(complex)
        assert np.allclose(exp_unitary(n, 2 * math.pi), np.eye(9), atol=1e-12)

    def test_unitary(self):
        h = build_operators(SMALL).hamiltonian(0.4)
        u = exp_unitary(h, 1.7)
        assert np.max(np.abs(u.conj().T @ u - np.eye(SMALL.dim))) < 1e-10

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError):
            exp_unitary(annihilation(4), 1.0)
        assert not is_hermitian(annihilation(4))

    def test_closed_loop_is_kerr_times_vacuum(self):
        # after one period the mechanics returns to vacuum and the field carries exp(i 2 pi k^2 n^2)
        k, cfg = 0.1, TruncationConfig(15, 30)
        rho = run_continuous(initial_state(cfg, 1.0), math.sqrt(2) * k, 1.0, 2 * math.pi, cfg)
        psi_f = kerr_target_state(1.0, 2 * math.pi * k * k, cfg.field_dim)
        vac = np.zeros(cfg.mech_dim)
        vac[0] = 1
        psi = np.kron(psi_f, vac)
        assert np.max(np.abs(rho - np.outer(psi, psi.conj()))) < 1e-10


class TestStates:
    def test_coherent_normalised(self):
        v = coherent_amplitudes(1.0 + 0.5j, 30)
        assert np.vdot(v, v).real == pytest.approx(1.0, abs=1e-12)
        assert np.vdot(v, annihilation(30) @ v) == pytest.approx(1.0 + 0.5j, abs=1e-10)

    def test_thermal(self):
        p = thermal_populations(1.0, 60)
        assert p.sum() == pytest.approx(1.0) and p @ np.arange(60) == pytest.approx(1.0, rel=1e-10)
        with pytest.raises(TruncationError):
            thermal_populations(5.0, 10)

    def test_blocks_round_trip(self):
        rng = np.random.default_rng(1)
        rho = rng.normal(size=(SMALL.dim, SMALL.dim))
        assert np.array_equal(from_blocks(to_blocks(rho, SMALL)), rho)

    def test_boundary_guard(self):
        cfg = TruncationConfig(4, 4)
        with pytest.raises(TruncationError):
            check_boundary(initial_state(cfg, 1.5), cfg)
        with pytest.raises(TruncationError):
            run_pulsed(initial_state(SMALL, 1.0), 2.0, 0.3, 3, SMALL)

    def test_dump_round_trip(self, tmp_path):
        rho = initial_state(TruncationConfig(3, 2), 0.5)
        dump_density_csv(rho, tmp_path / "rho.csv")
        assert np.array_equal(load_density_csv(tmp_path / "rho.csv"), rho)


class TestPulsed:
    def test_zero_strength(self):
        rho = initial_state(SMALL, 1.0)
        assert np.allclose(run_pulsed(rho, 0.0, 1.0, 6, SMALL), rho, atol=1e-14)

    def test_closed_loop_disentangles(self):
        rho = run_pulsed(initial_state(SMALL, 1.0), 0.1, 2 * math.pi / 6, 6, SMALL)
        assert purity_of(partial_trace_mech(rho, SMALL)) == pytest.approx(1.0, abs=1e-8)

    def test_matches_series_elementwise(self):
        # inside the series window (15 labels for alpha = 1) the two agree to rounding
        rho = run_pulsed(initial_state(SMALL, 1.0), 0.1, 1.05 * 2 * math.pi / 6, 6, SMALL)
        s = series_pulsed(FieldParams(1.0), 0.1, 6, 0.05)
        assert np.max(np.abs(partial_trace_mech(rho, SMALL) - s.density_matrix(15))) < 1e-8

    def test_continuous_matches_series_elementwise(self):
        rho = run_continuous(initial_state(SMALL, 1.0), math.sqrt(2) * 0.1, 1.0, 2 * math.pi * 1.05, SMALL)
        s = series_continuous(FieldParams(1.0), 0.1, 0.05)
        assert np.max(np.abs(partial_trace_mech(rho, SMALL) - s.density_matrix(15))) < 1e-8


    @pytest.mark.parametrize("regime", ["continuous", "pulsed"])
    def test_thermal_mechanics_matches_series(self, regime):
        # thermal phonons only enter the magnitude factor; the phase is untouched
        cfg, f = TruncationConfig(15, 60, max_dim=1000), FieldParams(1.0, 1.0)
        rho0 = initial_state(cfg, 1.0, 1.0)
        if regime == "continuous":
            rho = run_continuous(rho0, math.sqrt(2) * 0.1, 1.0, 2 * math.pi * 1.05, cfg)
            s = series_continuous(f, 0.1, 0.05)
        else:
            rho = run_pulsed(rho0, 0.1, 1.05 * 2 * math.pi / 6, 6, cfg)
            s = series_pulsed(f, 0.1, 6, 0.05)
        assert np.max(np.abs(partial_trace_mech(rho, cfg) - s.density_matrix(15))) < 1e-8


class TestLindblad:
    def test_damped_oscillator_mean(self):
        dim, beta0, gamma, t = 25, 1.2 + 0.3j, 0.1, 3.0
        b = annihilation(dim)
        v = coherent_amplitudes(beta0, dim)
        rho = lindblad_evolve(np.outer(v, v.conj()), b.conj().T @ b, gamma, t, 600, b)
        expected = beta0 * np.exp(-1j * t - 0.5 * gamma * t)
        assert np.trace(b @ rho) == pytest.approx(expected, abs=1e-9)
        assert np.trace(rho).real == pytest.approx(1.0, abs=1e-10)

    def test_lossless_matches_unitary(self):
        cfg = TruncationConfig(12, 12)
        rho0 = initial_state(cfg, 0.8)
        exact = run_continuous(rho0, 0.2, 1.0, 2.0, cfg)
        rk4 = run_continuous_lindblad(rho0, 0.2, 0.0, 2.0, cfg, steps=400)
        assert np.max(np.abs(exact - rk4)) < 1e-6

    def test_block_layout_matches_dense(self):
        cfg = TruncationConfig(5, 8)
        ops = build_operators(cfg)
        rho0 = initial_state(cfg, 0.7)
        dense = lindblad_evolve(rho0, ops.hamiltonian(0.3), 0.05, 1.0, 100, ops.b)
        blocks = optomech_lindblad_blocks(to_blocks(rho0, cfg), ops.x1, 0.3, 0.05, 1.0, 100)
        assert np.max(np.abs(from_blocks(blocks) - dense)) < 1e-14

    def test_physical_state(self):
        cfg = TruncationConfig(12, 12)
        rho = run_continuous_lindblad(initial_state(cfg, 0.8), 0.2, 0.05, 2 * math.pi, cfg, steps=1024)
        assert np.trace(rho).real == pytest.approx(1.0, abs=1e-8)
        assert np.allclose(rho, rho.conj().T, atol=1e-15)
        assert np.linalg.eigvalsh(rho).min() > -1e-10

    def test_step_halving(self):
        cfg = TruncationConfig(10, 8)
        rho0 = initial_state(cfg, 0.5)

        def run(steps):
            return run_continuous_lindblad(rho0, 0.2, 0.05, 2.0, cfg, steps=steps, check=False)

        _, gap = step_halving(run, 200, 1e-8)
        assert gap < 1e-8
        with pytest.raises(ConvergenceError) as err:
            step_halving(run, 2, 1e-12)
        assert err.value.suggested_steps == 8


class TestMetrics:
    def test_partial_trace_of_product(self):
        rng = np.random.default_rng(2)
        f = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        m = rng.normal(size=(4, 4))
        m /= np.trace(m)
        cfg = TruncationConfig(3, 4)
        assert np.allclose(partial_trace_mech(np.kron(f, m), cfg), f, atol=1e-14)
        assert np.allclose(partial_trace_field(np.kron(m[:3, :3] / np.trace(m[:3, :3]), m), cfg), m, atol=1e-14)

    def test_pure_state_purity(self):
        v = coherent_amplitudes(1.3, 30)
        assert purity_of(np.outer(v, v.conj())) == pytest.approx(1.0, abs=1e-10)

    def test_q_of_coherent(self):
        v = coherent_amplitudes(1.0, 30)
        assert qfunction_of(np.outer(v, v.conj()), 1.0) == pytest.approx(1 / math.pi, rel=1e-10)


class TestConjugation:
    def test_identity(self):
        r = displacement_conjugation_check(0.0, 0.0, TruncationConfig(2, 30))
        assert r["passed"] and r["x_residual"] < 1e-14

    def test_p_shift(self):
        assert displacement_conjugation_check(0.3, 0.0, TruncationConfig(2, 40))["passed"]

    def test_pulsed_coefficients(self):
        c = pulsed_coefficients(PulseParams(0.2, 2 * math.pi / 5 * 1.05, 5))
        assert displacement_conjugation_check(c.disp_x, c.disp_p, TruncationConfig(2, 40))["passed"]
