"""Brute-force truncated Fock-space simulator.

Ground truth for the closed forms: exact unitaries via Hermitian
eigendecomposition, pulse sequences, and fixed-step RK4 integration of the
damped master equation

    d rho/dt = -i [H, rho] + (gamma/2) (2 b rho b^dag - b^dag b rho - rho b^dag b)

Units are ``hbar = omega_m = 1`` unless a frequency is passed explicitly.
Joint operators act on ``field (x) mech`` with the field index major, i.e.
``kron(field_op, mech_op)``.

Every optomechanical generator commutes with the photon number, so the joint
density matrix splits into ``mech_dim x mech_dim`` blocks labelled by the
field Fock pair ``(l1, l2)``. The ``*_blocks`` helpers integrate in that
layout; they apply exactly the same truncated operators as the dense path.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

DEFAULT_STEPS_PER_PERIOD = 2048
BOUNDARY_TOL = 1e-8


class TruncationError(RuntimeError):
    """Population reached the Fock cutoff; the truncation is too small."""


class ConvergenceError(RuntimeError):
    """Step-halving disagreement above tolerance."""

    def __init__(self, message: str, suggested_steps: int):
        super().__init__(message)
        self.suggested_steps = suggested_steps


@dataclass(frozen=True)
class TruncationConfig:
    field_dim: int
    mech_dim: int
    max_dim: int = 4000

    def __post_init__(self):
        if self.field_dim < 2 or self.mech_dim < 2:
            raise ValueError("field_dim and mech_dim must both be >= 2")
        if self.field_dim * self.mech_dim > self.max_dim:
            raise ValueError(
                f"joint dimension {self.field_dim * self.mech_dim} exceeds ceiling {self.max_dim}"
            )

    @property
    def dim(self) -> int:
        return self.field_dim * self.mech_dim

    @classmethod
    def for_gate(cls, alpha: float, strength: float, extra_mech: int = 0) -> "TruncationConfig":
        """Default cutoffs: ``alpha^2 + 8 alpha + 10`` photons, mechanics sized to the largest kick."""
        field = int(math.ceil(alpha**2 + 8 * alpha + 10))
        disp = strength * field
        mech = int(math.ceil(disp**2 + 8 * disp + 15)) + extra_mech
        return cls(field, mech, max_dim=max(4000, field * mech))


def annihilation(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)


@dataclass(frozen=True)
class OperatorSet:
    """Truncated ladder operators, single-mode and embedded in the joint space."""

    config: TruncationConfig
    a: np.ndarray
    b: np.ndarray
    x_m: np.ndarray
    p_m: np.ndarray
    n_f: np.ndarray
    # single-mode versions
    a1: np.ndarray
    b1: np.ndarray
    x1: np.ndarray
    p1: np.ndarray

    @property
    def ad(self) -> np.ndarray:
        return self.a.conj().T

    @property
    def bd(self) -> np.ndarray:
        return self.b.conj().T

    def hamiltonian(self, g0: float, omega: float = 1.0) -> np.ndarray:
        """``omega b^dag b - g0 a^dag a (b + b^dag)/sqrt(2)``."""
        return omega * (self.bd @ self.b) - g0 * (self.n_f @ self.x_m)


def build_operators(cfg: TruncationConfig) -> OperatorSet:
    a1 = annihilation(cfg.field_dim)
    b1 = annihilation(cfg.mech_dim)
    x1 = (b1 + b1.conj().T) / math.sqrt(2.0)
    p1 = 1j * (b1.conj().T - b1) / math.sqrt(2.0)
    eye_f = np.eye(cfg.field_dim)
    eye_m = np.eye(cfg.mech_dim)
    return OperatorSet(
        config=cfg,
        a=np.kron(a1, eye_m),
        b=np.kron(eye_f, b1),
        x_m=np.kron(eye_f, x1),
        p_m=np.kron(eye_f, p1),
        n_f=np.kron(a1.conj().T @ a1, eye_m),
        a1=a1,
        b1=b1,
        x1=x1,
        p1=p1,
    )


def is_hermitian(h: np.ndarray, tol: float = 1e-12) -> bool:
    return bool(np.max(np.abs(h - h.conj().T), initial=0.0) <= tol * max(1.0, np.max(np.abs(h), initial=0.0)))


def exp_unitary(h: np.ndarray, s: float) -> np.ndarray:
    """``exp(-i h s)`` for Hermitian ``h`` via eigendecomposition."""
    if not is_hermitian(h):
        raise ValueError("exp_unitary needs a Hermitian generator")
    vals, vecs = np.linalg.eigh(h)
    return (vecs * np.exp(-1j * s * vals)) @ vecs.conj().T


# ---------------------------------------------------------------- states


def coherent_amplitudes(alpha: complex, dim: int) -> np.ndarray:
    ls = np.arange(dim, dtype=float)
    if alpha == 0:
        return (ls == 0).astype(complex)
    r, ang = abs(alpha), np.angle(alpha)
    return np.exp(-0.5 * r * r + ls * math.log(r) - 0.5 * gammaln(ls + 1) + 1j * ls * ang)


def thermal_populations(n_th: float, dim: int, tail: float = 1e-12) -> np.ndarray:
    """Boltzmann populations, dropping the tail below ``tail`` and renormalising."""
    if n_th == 0:
        out = np.zeros(dim)
        out[0] = 1.0
        return out
    q = n_th / (n_th + 1.0)
    pops = (1.0 - q) * q ** np.arange(dim)
    if pops[-1] > tail:
        raise TruncationError(f"thermal tail {pops[-1]:.2e} at the mechanical cutoff")
    pops[pops < tail] = 0.0
    return pops / pops.sum()


def initial_state(cfg: TruncationConfig, alpha: float, n_th: float = 0.0) -> np.ndarray:
    """``|alpha><alpha| (x) thermal(n_th)`` as a dense density matrix."""
    psi = coherent_amplitudes(alpha, cfg.field_dim)
    rho_f = np.outer(psi, psi.conj())
    rho_m = np.diag(thermal_populations(n_th, cfg.mech_dim)).astype(complex)
    return np.kron(rho_f, rho_m)


def to_blocks(rho: np.ndarray, cfg: TruncationConfig) -> np.ndarray:
    """Dense joint matrix -> array ``[l1, l2, m1, m2]``."""
    f, m = cfg.field_dim, cfg.mech_dim
    return rho.reshape(f, m, f, m).transpose(0, 2, 1, 3).copy()


def from_blocks(blocks: np.ndarray) -> np.ndarray:
    f, _, m, _ = blocks.shape
    return blocks.transpose(0, 2, 1, 3).reshape(f * m, f * m)


def check_boundary(rho: np.ndarray, cfg: TruncationConfig, tol: float = BOUNDARY_TOL) -> None:
    """Raise :class:`TruncationError` if the top Fock level of either mode is populated."""
    diag = np.real(np.diag(rho)).reshape(cfg.field_dim, cfg.mech_dim)
    top_f = diag[-1].sum()
    top_m = diag[:, -1].sum()
    if top_f > tol or top_m > tol:
        raise TruncationError(
            f"population at cutoff: field {top_f:.2e}, mech {top_m:.2e} (tol {tol:.0e})"
        )


# ---------------------------------------------------------------- unitary runs


def _kick_blocks(blocks: np.ndarray, x1: np.ndarray, lam: float) -> np.ndarray:
    """Apply ``exp(i lam n x_m)`` blockwise."""
    vals, vecs = np.linalg.eigh(x1)
    ls = np.arange(blocks.shape[0], dtype=float)
    kicks = np.einsum("ij,lj,kj->lik", vecs, np.exp(1j * lam * ls[:, None] * vals[None, :]), vecs.conj())
    return kicks[:, None] @ blocks @ kicks[None, :].conj().transpose(0, 1, 3, 2)


def _rotate_blocks(blocks: np.ndarray, angle: float) -> np.ndarray:
    """Lossless free evolution ``exp(-i angle b^dag b)``."""
    m = np.arange(blocks.shape[-1])
    ph = np.exp(-1j * angle * m)
    return blocks * ph[:, None] * ph.conj()[None, :]


def run_pulsed(
    rho: np.ndarray,
    lam: float,
    theta: float,
    n_p: int,
    cfg: TruncationConfig,
    gamma: float = 0.0,
    steps_per_period: int = DEFAULT_STEPS_PER_PERIOD,
    check: bool = True,
) -> np.ndarray:
    """``n_p`` kicks ``exp(i lam n x_m)`` separated by ``n_p - 1`` free evolutions of angle ``theta``.

    With ``gamma > 0`` each free evolution is a damped RK4 integration.
    """
    ops = build_operators(cfg)
    blocks = to_blocks(rho, cfg)
    steps = max(1, int(math.ceil(steps_per_period * theta / (2 * math.pi))))
    for i in range(n_p):
        if i:
            if gamma > 0:
                blocks = optomech_lindblad_blocks(blocks, ops.x1, 0.0, gamma, theta, steps)
            else:
                blocks = _rotate_blocks(blocks, theta)
        blocks = _kick_blocks(blocks, ops.x1, lam)
    out = from_blocks(blocks)
    if check:
        check_boundary(out, cfg)
    return out


def run_continuous(
    rho: np.ndarray, g0: float, omega: float, t: float, cfg: TruncationConfig, check: bool = True
) -> np.ndarray:
    """Exact ``exp(-iHt) rho exp(iHt)`` for the optomechanical Hamiltonian."""
    ops = build_operators(cfg)
    u = exp_unitary(ops.hamiltonian(g0, omega), t)
    out = u @ rho @ u.conj().T
    if check:
        check_boundary(out, cfg)
    return out


# ---------------------------------------------------------------- master equation


def lindblad_rhs(rho: np.ndarray, h: np.ndarray, gamma: float, b: np.ndarray) -> np.ndarray:
    bd = b.conj().T
    k = h - 0.5j * gamma * (bd @ b)
    kr = k @ rho
    # rho is Hermitian, so rho K^dag = (K rho)^dag
    out = -1j * (kr - kr.conj().T)
    if gamma:
        out += gamma * (b @ rho @ bd)
    return out


def lindblad_step(rho: np.ndarray, h: np.ndarray, gamma: float, dt: float, b: np.ndarray) -> np.ndarray:
    """One RK4 step of the damped master equation with collapse operator ``b``."""
    k1 = lindblad_rhs(rho, h, gamma, b)
    k2 = lindblad_rhs(rho + 0.5 * dt * k1, h, gamma, b)
    k3 = lindblad_rhs(rho + 0.5 * dt * k2, h, gamma, b)
    k4 = lindblad_rhs(rho + dt * k3, h, gamma, b)
    out = rho + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    return 0.5 * (out + out.conj().T)


def lindblad_evolve(
    rho: np.ndarray, h: np.ndarray, gamma: float, t: float, steps: int, b: np.ndarray
) -> np.ndarray:
    dt = t / steps
    for _ in range(steps):
        rho = lindblad_step(rho, h, gamma, dt, b)
    return rho


def _mech_apply_x(blocks: np.ndarray, sq: np.ndarray) -> np.ndarray:
    """``x_m`` from the left on the mechanical row index; ``sq[m] = sqrt(m)``."""
    out = np.zeros_like(blocks)
    # (b R)[m] = sqrt(m+1) R[m+1], (b^dag R)[m] = sqrt(m) R[m-1]
    out[..., :-1, :] += sq[1:, None] * blocks[..., 1:, :]
    out[..., 1:, :] += sq[1:, None] * blocks[..., :-1, :]
    return out / math.sqrt(2.0)


def _block_rhs(blocks, ls, sq, ms, g0, gamma, omega):
    kr = (omega - 0.5j * gamma) * ms[:, None] * blocks
    if g0:
        kr -= g0 * ls[:, None, None, None] * _mech_apply_x(blocks, sq)
    # Hermiticity of the full matrix: block (l1,l2) of rho K^dag is (K rho)(l2,l1)^dag
    out = -1j * (kr - kr.transpose(1, 0, 3, 2).conj())
    if gamma:
        jump = np.zeros_like(blocks)
        jump[..., :-1, :-1] = sq[1:, None] * sq[None, 1:] * blocks[..., 1:, 1:]
        out += gamma * jump
    return out


def optomech_lindblad_blocks(
    blocks: np.ndarray,
    x1: np.ndarray,
    g0: float,
    gamma: float,
    t: float,
    steps: int,
    omega: float = 1.0,
) -> np.ndarray:
    """RK4 for ``H = omega b^dag b - g0 n x_m`` with damping, in block layout."""
    f, _, m, _ = blocks.shape
    ls = np.arange(f, dtype=float)
    ms = np.arange(m, dtype=float)
    sq = np.sqrt(ms)
    dt = t / steps
    for _ in range(steps):
        k1 = _block_rhs(blocks, ls, sq, ms, g0, gamma, omega)
        k2 = _block_rhs(blocks + 0.5 * dt * k1, ls, sq, ms, g0, gamma, omega)
        k3 = _block_rhs(blocks + 0.5 * dt * k2, ls, sq, ms, g0, gamma, omega)
        k4 = _block_rhs(blocks + dt * k3, ls, sq, ms, g0, gamma, omega)
        blocks = blocks + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        blocks = 0.5 * (blocks + blocks.transpose(1, 0, 3, 2).conj())
    return blocks


def run_continuous_lindblad(
    rho: np.ndarray,
    g0: float,
    gamma: float,
    t: float,
    cfg: TruncationConfig,
    steps: int | None = None,
    omega: float = 1.0,
    check: bool = True,
) -> np.ndarray:
    """Damped continuous optomechanical evolution; default ``2048`` steps per period."""
    if steps is None:
        steps = max(1, int(math.ceil(DEFAULT_STEPS_PER_PERIOD * omega * t / (2 * math.pi))))
    ops = build_operators(cfg)
    blocks = optomech_lindblad_blocks(to_blocks(rho, cfg), ops.x1, g0, gamma, t, steps, omega)
    out = from_blocks(blocks)
    if check:
        check_boundary(out, cfg)
    return out


def step_halving(run, steps: int, tol: float, metric=None):
    """Run ``run(steps)`` and ``run(2 steps)``; raise if ``metric`` of the two differs by more than ``tol``.

    ``metric`` maps a result to an array of numbers; default is the max-abs
    entrywise difference. Returns the finer result and the measured gap.
    """
    coarse = run(steps)
    fine = run(2 * steps)
    if metric is None:
        gap = float(np.max(np.abs(fine - coarse)))
    else:
        gap = float(np.max(np.abs(np.asarray(metric(fine)) - np.asarray(metric(coarse)))))
    if gap > tol:
        raise ConvergenceError(
            f"step-halving gap {gap:.2e} exceeds {tol:.0e} at {steps} steps", suggested_steps=4 * steps
        )
    return fine, gap


# ---------------------------------------------------------------- metrics


def partial_trace_mech(rho: np.ndarray, cfg: TruncationConfig) -> np.ndarray:
    f, m = cfg.field_dim, cfg.mech_dim
    return np.einsum("iaja->ij", rho.reshape(f, m, f, m))


def partial_trace_field(rho: np.ndarray, cfg: TruncationConfig) -> np.ndarray:
    f, m = cfg.field_dim, cfg.mech_dim
    return np.einsum("iaib->ab", rho.reshape(f, m, f, m))


def kerr_target_state(alpha: float, kerr: float, dim: int) -> np.ndarray:
    """``exp(i kerr n^2) |alpha>`` truncated to ``dim`` levels."""
    ls = np.arange(dim, dtype=float)
    return coherent_amplitudes(alpha, dim) * np.exp(1j * kerr * ls**2)


def fidelity_to(rho_f: np.ndarray, alpha: float, target_kerr: float) -> float:
    psi = kerr_target_state(alpha, target_kerr, rho_f.shape[0])
    return float(np.real(psi.conj() @ rho_f @ psi))


def purity_of(rho: np.ndarray) -> float:
    # Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
    return float(np.sum(np.abs(rho) ** 2))


def qfunction_of(rho_f: np.ndarray, beta) -> np.ndarray:
    betas = np.atleast_1d(np.asarray(beta, dtype=complex))
    out = np.empty(betas.shape)
    for idx, bval in np.ndenumerate(betas):
        v = coherent_amplitudes(bval, rho_f.shape[0])
        out[idx] = np.real(v.conj() @ rho_f @ v) / math.pi
    return out.reshape(np.shape(beta)) if np.ndim(beta) else out[0]


def quadrature_mean(rho_f: np.ndarray, phi_q: float) -> float:
    """``<a e^{-i phi} + a^dag e^{i phi}>``."""
    a1 = annihilation(rho_f.shape[0])
    mean_a = np.trace(a1 @ rho_f)
    return float(2.0 * np.real(mean_a * np.exp(-1j * phi_q)))


def dump_density_csv(rho: np.ndarray, path) -> None:
    """Debug dump: one row per matrix row, ``re,im`` pairs per entry. Not a stable format."""
    pairs = np.stack([rho.real, rho.imag], axis=-1).reshape(rho.shape[0], -1)
    np.savetxt(path, pairs, delimiter=",", fmt="%.17g")


def load_density_csv(path) -> np.ndarray:
    pairs = np.loadtxt(path, delimiter=",", ndmin=2)
    return pairs[:, 0::2] + 1j * pairs[:, 1::2]


# ---------------------------------------------------------------- identities


def displacement_conjugation_check(c1: float, c2: float, cfg: TruncationConfig, tol: float = 1e-8) -> dict:
    """Verify ``U^dag x U = x + c2`` and ``U^dag p U = p + c1`` for ``U = exp[i(c1 x - c2 p)]``.

    Checked on the leading sub-block of the mechanical Fock space, away from
    the cutoff where truncation corrupts the algebra.
    """
    ops = build_operators(cfg)
    x, p = ops.x1, ops.p1
    gen = c2 * p - c1 * x  # U = exp(-i gen)
    u = exp_unitary(gen, 1.0)
    keep = max(2, cfg.mech_dim // 2)
    eye = np.eye(cfg.mech_dim)
    res_x = (u.conj().T @ x @ u - (x + c2 * eye))[:keep, :keep]
    res_p = (u.conj().T @ p @ u - (p + c1 * eye))[:keep, :keep]
    rx = float(np.max(np.abs(res_x)))
    rp = float(np.max(np.abs(res_p)))
    return {"x_residual": rx, "p_residual": rp, "tol": tol, "passed": rx < tol and rp < tol}
