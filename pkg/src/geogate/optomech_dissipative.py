"""Optomechanical gates with mechanical damping into a vacuum bath.

The joint state stays of the form

    sum_{l1,l2} sqrt(w1 w2) A(l1,l2) R(l1,l2) |l1><l2| (x) |i l1 Phi><i l2 Phi|

with ``A = exp[-a (l1-l2)^2]`` and ``R = exp[i r (l1^2 - l2^2)]``; see
:class:`JointStateRep`. Tracing out the mechanics multiplies ``A`` by the
coherent overlap ``exp[-|Phi|^2 (l1-l2)^2 / 2]``.

Units: ``omega_m = 1`` throughout, so times are mechanical phase angles and
``gamma_ratio`` is ``gamma / omega_m``. Exponents are arranged so that the
lossless limit carries no ``0/0``: every ``1 - exp(-x)`` goes through
``expm1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import gammaln

from .gate_error_models import (
    TWO_PI,
    RescaleFactor,
    check_rescale,
    fit_order,
    is_infinite,
    polygon_target_kerr,
    unify_strength,
)
from .optomech_analytic import FieldParams, SingularConfigurationError
from .series import (
    DEFAULT_TAIL_EPS,
    FockWindow,
    poisson_window,
    series_fidelity,
    series_purity,
    window_weights,
)


def _one_minus_exp(x: float) -> float:
    """``1 - exp(-x)`` accurate for small ``x``."""
    return -math.expm1(-x)


@dataclass(frozen=True)
class DissipativePulsedParams:
    """Pulsed gate with damped free evolution between kicks.

    The nominal interval is ``(1 + xi) 2 pi / n_pulses``; rescaling by ``n``
    divides ``lam`` by ``n`` and multiplies the pulse count by ``n**2`` at a
    fixed interval.
    """

    lam: float
    n_pulses: int
    xi: float = 0.0
    gamma_ratio: float = 0.0
    n: RescaleFactor = 1
    alpha: float = 0.0

    def __post_init__(self):
        if self.gamma_ratio < 0:
            raise ValueError(f"gamma_ratio must be non-negative, got {self.gamma_ratio!r}")
        if int(self.n_pulses) != self.n_pulses or self.n_pulses < 2:
            raise ValueError(f"n_pulses must be an integer >= 2, got {self.n_pulses!r}")
        object.__setattr__(self, "n", check_rescale(self.n))

    @property
    def delta_t(self) -> float:
        """Interval between kicks as ``omega_m * dt`` in radians."""
        return (1.0 + self.xi) * TWO_PI / self.n_pulses


@dataclass(frozen=True)
class DissipativeContinuousParams:
    """Continuous gate at ``k/N`` for ``N**2 (1 + eta) t_angle`` with damping."""

    k: float
    eta: float = 0.0
    gamma_ratio: float = 0.0
    n: RescaleFactor = 1
    t_angle: float = TWO_PI
    alpha: float = 0.0

    def __post_init__(self):
        if self.gamma_ratio < 0:
            raise ValueError(f"gamma_ratio must be non-negative, got {self.gamma_ratio!r}")
        if self.t_angle < 0:
            raise ValueError(f"t_angle must be non-negative, got {self.t_angle!r}")
        object.__setattr__(self, "n", check_rescale(self.n))


@dataclass(frozen=True)
class JointStateRep:
    """Field-Fock / mechanical-coherent representation of the joint state.

    ``phi`` is the mechanical coherent scale (label ``i l phi`` for field
    level ``l``), ``decoherence_rate`` the ``a`` of ``A = exp[-a d^2]`` and
    ``phase_rate`` the ``r`` of ``R = exp[i r (l1^2 - l2^2)]``.
    """

    phi: complex
    decoherence_rate: float
    phase_rate: float

    def decoherence(self, l1, l2):
        d = np.asarray(l1, dtype=float) - np.asarray(l2, dtype=float)
        return np.exp(-self.decoherence_rate * d * d)

    def phase(self, l1, l2):
        l1, l2 = np.asarray(l1, dtype=float), np.asarray(l2, dtype=float)
        return np.exp(1j * self.phase_rate * (l1 - l2) * (l1 + l2))

    @property
    def field_decay(self) -> float:
        """Decay rate of the reduced field coherences: ``a + |phi|^2 / 2``."""
        return self.decoherence_rate + 0.5 * abs(self.phi) ** 2

    def field_matrix(self, alpha: float, dim: int) -> np.ndarray:
        ls = np.arange(dim, dtype=float)
        amp = _fock_amplitudes(alpha, ls)
        l1, l2 = np.meshgrid(ls, ls, indexing="ij")
        d = l1 - l2
        return np.outer(amp, amp) * self.phase(l1, l2) * np.exp(-self.field_decay * d * d)

    def joint_matrix(self, alpha: float, field_dim: int, mech_dim: int) -> np.ndarray:
        """Dense joint density matrix, field index major (``kron(field, mech)`` order)."""
        ls = np.arange(field_dim, dtype=float)
        amp = _fock_amplitudes(alpha, ls)
        # mechanical coherent state |i l phi>, one row per field level
        coh = np.stack([_fock_amplitudes(1j * l * self.phi, np.arange(mech_dim, dtype=float)) for l in ls])
        l1, l2 = np.meshgrid(ls, ls, indexing="ij")
        coeff = np.outer(amp, amp) * self.decoherence(l1, l2) * self.phase(l1, l2)
        rho = np.einsum("ij,ia,jb->iajb", coeff, coh, coh.conj())
        return rho.reshape(field_dim * mech_dim, field_dim * mech_dim)


def _fock_amplitudes(beta: complex, labels: np.ndarray) -> np.ndarray:
    """``<l|beta>`` for the given Fock labels."""
    r = abs(beta)
    if r == 0:
        return (labels == 0).astype(complex)
    mag = np.exp(-0.5 * r * r + labels * math.log(r) - 0.5 * gammaln(labels + 1.0))
    return mag * np.exp(1j * labels * np.angle(beta))


def _pulsed_sums(lam: float, m: int, theta: float, g: float) -> tuple[complex, float, float]:
    """``(Phi, a, r)`` after ``m`` kicks of ``lam`` separated by damped rotations of ``theta``."""
    x = g * theta  # gamma * dt in units omega_m = 1
    h = math.exp(-0.5 * x)
    e = h * h
    omx = _one_minus_exp(x)
    dd = 1.0 - 2.0 * h * math.cos(theta) + e
    if dd <= 0.0 or (x == 0.0 and abs(math.sin(0.5 * theta)) < 1e-15):
        raise SingularConfigurationError(
            "D = 0: lossless free evolution by a multiple of 2 pi between kicks"
        )
    z = complex(h * math.cos(theta), -h * math.sin(theta))
    zm = complex(math.exp(-0.5 * m * x) * math.cos(m * theta), -math.exp(-0.5 * m * x) * math.sin(m * theta))
    phi = lam / math.sqrt(2.0) * (1.0 - zm) / (1.0 - z)

    s = (
        h * math.cos(theta)
        - e
        - math.exp(-0.5 * m * x) * math.cos(m * theta)
        + math.exp(-0.5 * (m + 1) * x) * math.cos((m - 1) * theta)
    )
    bracket = omx * (m - 1) + e * _one_minus_exp((m - 1) * x) - 2.0 / dd * omx * s
    a = lam**2 / 4.0 * bracket / dd

    r = 0.5 * lam**2 * (
        (m - 1) * h * math.sin(theta) / dd
        - (
            e * math.sin(2 * theta)
            - math.exp(-0.5 * (m + 1) * x) * math.sin((m + 1) * theta)
            - 2.0 * math.exp(-1.5 * x) * math.sin(theta)
            + 2.0 * math.exp(-0.5 * (m + 2) * x) * math.sin(m * theta)
            - math.exp(-0.5 * (m + 3) * x) * math.sin((m - 1) * theta)
        )
        / dd**2
    )
    return phi, a, r


def pulsed_dissipative_state(p: DissipativePulsedParams) -> JointStateRep:
    """Joint state after the rescaled pulse train with damped intervals."""
    theta, g = p.delta_t, p.gamma_ratio
    if is_infinite(p.n):
        # lam/N -> 0 with N^2 N_p kicks: Phi -> 0, exponents keep their N_p-linear parts
        h = math.exp(-0.5 * g * theta)
        dd = 1.0 - 2.0 * h * math.cos(theta) + h * h
        if dd <= 0.0:
            raise SingularConfigurationError("D = 0 in the N -> inf limit")
        a = p.lam**2 / 4.0 * _one_minus_exp(g * theta) * p.n_pulses / dd
        r = 0.5 * p.lam**2 * p.n_pulses * h * math.sin(theta) / dd
        return JointStateRep(0j, a, r)
    phi, a, r = _pulsed_sums(p.lam / p.n, p.n**2 * p.n_pulses, theta, g)
    return JointStateRep(phi, a, r)


def continuous_dissipative_state(p: DissipativeContinuousParams) -> JointStateRep:
    """Joint state after damped continuous evolution (omega_m = 1, g0 = sqrt(2) k)."""
    g = p.gamma_ratio
    den = 4.0 + g * g
    if is_infinite(p.n):
        a = 2.0 * p.k**2 * g * (1.0 + p.eta) * p.t_angle / den
        r = 4.0 * p.k**2 * (1.0 + p.eta) * p.t_angle / den
        return JointStateRep(0j, a, r)
    n = p.n
    g0 = math.sqrt(2.0) * p.k / n
    tau = n**2 * (1.0 + p.eta) * p.t_angle
    rate = complex(0.5 * g, 1.0)  # i omega_m + gamma/2
    phi = g0 / math.sqrt(2.0) * (-np.expm1(-rate * tau)) / rate
    h = math.exp(-0.5 * g * tau)
    c, s = math.cos(tau), math.sin(tau)
    # A_t exponent is g0^2/den * (e^{-g tau} - 1 - g tau + ...); negate to get the rate
    inner = (
        math.expm1(-g * tau)
        - g * tau
        + 4.0 * g * g * (1.0 - h * c) / den
        + 8.0 * g * h * s / den
    )
    a = -(g0**2) / den * inner
    r = 2.0 * g0**2 / den * (tau - h * (4.0 - g * g) / den * s - 4.0 * g / den * (1.0 - h * c))
    return JointStateRep(complex(phi), a, r)


def field_factors_continuous(
    k: float, eta: float, gamma_ratio: float, n: RescaleFactor
) -> tuple[float, float]:
    """Phase and decay rates of the reduced field in the continuous damped gate.

    Transcribes the closed forms for the field phase factor and the field
    decoherence factor (mechanics already traced out). Returns
    ``(phase_rate, decay_rate)``.
    """
    n = check_rescale(n)
    g = gamma_ratio
    den = 4.0 + g * g
    pre = 4.0 * k**2 / den
    if is_infinite(n):
        return pre * (1.0 + eta) * TWO_PI, k**2 * (4.0 / den) * g * math.pi * (1.0 + eta)
    arg = eta * TWO_PI * n**2
    big_x = g * math.pi * (1.0 + eta) * n**2
    ex = math.exp(-big_x)
    phase = pre * (
        (1.0 + eta) * TWO_PI
        - ex * (4.0 - g * g) / den * math.sin(arg) / n**2
        - 4.0 * g / den * (1.0 - ex * math.cos(arg)) / n**2
    )
    decay = (k**2 / n**2) * (4.0 / den) * (
        1.0
        - math.cos(arg) * ex
        + big_x
        - 2.0 * g * g / den * (1.0 - ex * math.cos(arg))
        - 4.0 * g / den * ex * math.sin(arg)
    )
    return phase, decay


def field_factors_pulsed(
    lam: float, n_p: int, xi: float, gamma_ratio: float, n: RescaleFactor
) -> tuple[float, float]:
    """Phase and decay rates of the reduced field in the pulsed damped gate.

    ``(phase_rate, decay_rate)`` from the closed forms for the field phase
    factor and the field decoherence factor at ``N**2 n_p`` pulses of
    ``lam/N``, interval ``(1 + xi) 2 pi / n_p``.
    """
    n = check_rescale(n)
    theta = (1.0 + xi) * TWO_PI / n_p
    x = gamma_ratio * theta
    h = math.exp(-0.5 * x)
    e = h * h
    dd = 1.0 - 2.0 * h * math.cos(theta) + e
    if dd <= 0.0:
        raise SingularConfigurationError("D = 0: lossless interval is a multiple of 2 pi")
    if is_infinite(n):
        return 0.5 * lam**2 * n_p * h * math.sin(theta) / dd, lam**2 / 4.0 * _one_minus_exp(x) * n_p / dd
    m = n**2 * n_p
    a2 = n**2 * TWO_PI * xi  # m * theta reduced mod 2 pi
    phase = lam**2 / (2.0 * n**2) * (
        (m - 1) * h * math.sin(theta) / dd
        - (
            e * math.sin(2.0 * theta)
            - math.exp(-0.5 * (m + 1) * x) * math.sin(a2 + theta)
            - 2.0 * math.exp(-1.5 * x) * math.sin(theta)
            + 2.0 * math.exp(-0.5 * (m + 2) * x) * math.sin(a2)
            - math.exp(-0.5 * (m + 3) * x) * math.sin(a2 - theta)
        )
        / dd**2
    )
    omx = _one_minus_exp(x)
    inner = (
        omx * (m - 1)
        + e * _one_minus_exp((m - 1) * x)
        - 2.0 / dd * omx * (
            h * math.cos(theta)
            - e
            - math.exp(-0.5 * m * x) * math.cos(a2)
            + math.exp(-0.5 * (m + 1) * x) * math.cos(a2 - theta)
        )
    )
    closing = 1.0 - 2.0 * math.exp(-0.5 * m * x) * math.cos(a2) + math.exp(-m * x)
    decay = lam**2 / (4.0 * n**2) * (inner / dd + closing / dd)
    return phase, decay


def _check_vacuum_bath(f: FieldParams) -> None:
    if f.n_th != 0:
        raise ValueError("damped closed forms assume mechanics starting in vacuum (n_th = 0)")


def _weights(f: FieldParams, tail_eps: float) -> tuple[FockWindow, np.ndarray]:
    window = poisson_window(f.alpha, tail_eps)
    return window, window_weights(f.alpha, window)


def fidelity_dissipative(
    state: JointStateRep, f: FieldParams, target_kerr: float, tail_eps: float = DEFAULT_TAIL_EPS
) -> float:
    _check_vacuum_bath(f)
    window, w = _weights(f, tail_eps)
    return series_fidelity(w, window, state.phase_rate - target_kerr, state.field_decay)


def purity_dissipative(state: JointStateRep, f: FieldParams, tail_eps: float = DEFAULT_TAIL_EPS) -> float:
    _check_vacuum_bath(f)
    _, w = _weights(f, tail_eps)
    return series_purity(w, state.field_decay)


def factor_metrics(
    phase_rate: float, decay_rate: float, f: FieldParams, target_kerr: float, tail_eps: float = DEFAULT_TAIL_EPS
) -> tuple[float, float]:
    """Fidelity and purity straight from field-level phase/decay rates."""
    window, w = _weights(f, tail_eps)
    fid = series_fidelity(w, window, phase_rate - target_kerr, decay_rate)
    return fid, series_purity(w, decay_rate)


@dataclass
class DissipativeConvergence:
    n_p: list[int]
    phase_distances: list[float]
    decay_distances: list[float]
    fidelity_distances: list[float]
    purity_distances: list[float]
    orders: dict


def dissipative_unification_check(
    k: float,
    eta: float,
    gamma_ratio: float,
    n: RescaleFactor,
    n_p_sequence: Sequence[int],
    alpha: float = 1.0,
) -> DissipativeConvergence:
    """Pulsed damped factors with the unified strength versus the continuous ones.

    The target phase of the pulsed fidelity uses the error-free strength
    ``sqrt(2) k 2 pi / N_p``; the error only enters the factors. Distances of
    the phase rate (net of target), decay rate, fidelity and purity are
    reported along with fitted log-log slopes (``None`` when a distance
    sequence is identically zero).
    """
    n = check_rescale(n)
    seq = [int(v) for v in n_p_sequence]
    if any(b <= a for a, b in zip(seq, seq[1:])):
        raise ValueError("n_p_sequence must be strictly increasing")
    f = FieldParams(alpha, 0.0)
    c_phase, c_decay = field_factors_continuous(k, eta, gamma_ratio, n)
    c_target = TWO_PI * k**2
    c_fid, c_pur = factor_metrics(c_phase, c_decay, f, c_target)
    out = DissipativeConvergence(seq, [], [], [], [], {})
    for n_p in seq:
        lam = unify_strength(k, eta, n_p)
        target = polygon_target_kerr(unify_strength(k, 0.0, n_p), n_p)
        p_phase, p_decay = field_factors_pulsed(lam, n_p, eta, gamma_ratio, n)
        p_fid, p_pur = factor_metrics(p_phase, p_decay, f, target)
        out.phase_distances.append(abs((p_phase - target) - (c_phase - c_target)))
        out.decay_distances.append(abs(p_decay - c_decay))
        out.fidelity_distances.append(abs(p_fid - c_fid))
        out.purity_distances.append(abs(p_pur - c_pur))
    for name in ("phase", "decay", "fidelity", "purity"):
        vals = getattr(out, f"{name}_distances")
        out.orders[name] = fit_order(seq, vals) if len(seq) > 1 and all(v > 0 for v in vals) else None
    return out
