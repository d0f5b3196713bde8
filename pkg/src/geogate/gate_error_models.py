"""Imperfect gates under the N-scaling transformation.

Scaling the interaction strength down by ``N`` and traversing the mechanical
phase space ``N**2`` times as often keeps the target phase but shrinks the
residual displacement. Each imperfect gate is decomposed as

    (mechanical error gate) x (self-Kerr error gate) x (target gate)

and stored as coefficients only: the displacement pair multiplying ``O x``
and ``O p`` in the mechanical error gate, and the ``O**2`` coefficients of the
two Kerr factors. ``N = INFINITY`` is evaluated from closed-form limits.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .phase_space import (
    TWO_PI,
    ContinuousParams,
    LoopCoefficients,
    PulseParams,
    continuous_coefficients,
    pulsed_coefficients,
)

INFINITY = math.inf

RescaleFactor = Union[int, float]


class UnsupportedParameterError(ValueError):
    """Raised when a closed form exists only for some parameter values."""


def is_infinite(n: RescaleFactor) -> bool:
    return n == INFINITY


def check_rescale(n: RescaleFactor) -> RescaleFactor:
    """Validate a rescale factor; returns an ``int`` or :data:`INFINITY`."""
    if is_infinite(n):
        return INFINITY
    if isinstance(n, str):
        if n.strip().lower() in ("inf", "infinity"):
            return INFINITY
        n = float(n)
    if not float(n).is_integer() or n < 1:
        raise ValueError(f"rescale factor must be a positive integer or INFINITY, got {n!r}")
    return int(n)


def format_rescale(n: RescaleFactor) -> str:
    return "inf" if is_infinite(n) else str(int(n))


@dataclass(frozen=True)
class ErrorGateDecomposition:
    mech_disp_x: float
    mech_disp_p: float
    kerr_error: float
    kerr_target: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.mech_disp_x, self.mech_disp_p, self.kerr_error, self.kerr_target)

    @property
    def kerr_total(self) -> float:
        return self.kerr_error + self.kerr_target

    @property
    def mech_norm(self) -> float:
        return math.hypot(self.mech_disp_x, self.mech_disp_p)


@dataclass(frozen=True)
class SMErrorParams:
    """Continuous gate run for ``N**2 (1 + eta)`` mechanical periods at strength ``k/N``."""

    k: float
    eta: float
    n: RescaleFactor = 1

    def __post_init__(self):
        if self.k < 0:
            raise ValueError(f"k must be non-negative, got {self.k!r}")
        object.__setattr__(self, "n", check_rescale(self.n))


@dataclass(frozen=True)
class MilburnErrorParams:
    """Pulsed gate with increment ``(1 + xi) 2 pi / n_pulses``, ``N**2 n_pulses`` pulses of ``lam/N``."""

    lam: float
    n_pulses: int
    xi: float
    n: RescaleFactor = 1

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError(f"lam must be non-negative, got {self.lam!r}")
        if int(self.n_pulses) != self.n_pulses or self.n_pulses < 2:
            raise ValueError(f"n_pulses must be an integer >= 2, got {self.n_pulses!r}")
        object.__setattr__(self, "n", check_rescale(self.n))

    @property
    def theta(self) -> float:
        return (1.0 + self.xi) * TWO_PI / self.n_pulses


def polygon_target_kerr(lam: float, n_pulses: int) -> float:
    """Kerr coefficient of the closed regular polygon: ``lam^2 (N_p/4) cot(pi/N_p)``."""
    return lam**2 * (n_pulses / 4.0) / math.tan(math.pi / n_pulses)


def circle_target_kerr(k: float) -> float:
    return TWO_PI * k**2


def sm_error_gate(p: SMErrorParams) -> ErrorGateDecomposition:
    k, eta, n = p.k, p.eta, p.n
    target = circle_target_kerr(k)
    if is_infinite(n):
        return ErrorGateDecomposition(0.0, 0.0, TWO_PI * k**2 * eta, target)
    arg = eta * TWO_PI * n**2
    amp = math.sqrt(2.0) * k / n
    return ErrorGateDecomposition(
        amp * math.sin(arg),
        -amp * (1.0 - math.cos(arg)),
        k**2 * (eta * TWO_PI - math.sin(arg) / n**2),
        target,
    )


def milburn_error_gate(
    p: MilburnErrorParams, target_lam: float | None = None
) -> ErrorGateDecomposition:
    """Decompose the rescaled, mis-timed pulse train.

    ``target_lam`` sets the strength that defines the target gate; by default
    it is ``p.lam``. Passing the error-free strength matters when ``lam``
    itself depends on ``xi`` (see :func:`unify_strength`): the target gate is
    fixed by the ideal protocol, so the error-induced change of ``lam`` must
    land in the error gate, not in the target.
    """
    lam, n_p, xi, n = p.lam, p.n_pulses, p.xi, p.n
    half = math.pi / n_p + xi * math.pi / n_p
    if abs(math.sin(half)) < 1e-15:
        raise ValueError("phase increment is a multiple of 2 pi; the pulse train does not loop")
    cot_half = 1.0 / math.tan(half)
    target = polygon_target_kerr(lam if target_lam is None else target_lam, n_p)
    polygon = lam**2 * (n_p / 4.0) * cot_half
    if is_infinite(n):
        return ErrorGateDecomposition(0.0, 0.0, polygon - target, target)
    ang = n**2 * xi * TWO_PI - TWO_PI / n_p - xi * TWO_PI / n_p
    scale = lam / n
    mech_x = scale * (0.5 + 0.5 * math.cos(ang) + 0.5 * math.sin(ang) * cot_half)
    mech_p = -scale * (0.5 * cot_half + 0.5 * math.sin(ang) - 0.5 * math.cos(ang) * cot_half)
    kerr = polygon - target - lam**2 * math.sin(n**2 * xi * TWO_PI) / (8.0 * n**2 * math.sin(half) ** 2)
    return ErrorGateDecomposition(mech_x, mech_p, kerr, target)


def milburn_kerr_taylor(p: MilburnErrorParams) -> float:
    """First-order-in-``xi`` self-Kerr error; only ``N = 1`` and ``N = INFINITY`` have one."""
    if p.n == 1:
        denom = 2.0
    elif is_infinite(p.n):
        denom = 4.0
    else:
        raise UnsupportedParameterError(
            f"linearised Kerr error is only available for N=1 and N=inf, got N={p.n}"
        )
    return -p.lam**2 * math.pi * p.xi / (denom * math.sin(math.pi / p.n_pulses) ** 2)


def unify_strength(k: float, xi: float, n_pulses: int) -> float:
    """Pulse strength whose continuous limit is the continuous gate of strength ``k``.

    ``lam = sqrt(2) k (1 + xi) 2 pi / n_pulses``: the error enters the
    strength because the pulse spacing, not the pulse count, carries it.
    """
    if n_pulses < 1:
        raise ValueError(f"n_pulses must be >= 1, got {n_pulses!r}")
    return math.sqrt(2.0) * k * (1.0 + xi) * TWO_PI / n_pulses


def unified_milburn_gate(k: float, xi: float, n_pulses: int, n: RescaleFactor) -> ErrorGateDecomposition:
    """Milburn decomposition with the unified strength and an error-free target."""
    lam = unify_strength(k, xi, n_pulses)
    return milburn_error_gate(
        MilburnErrorParams(lam, n_pulses, xi, n), target_lam=unify_strength(k, 0.0, n_pulses)
    )


def sm_composition(p: SMErrorParams) -> LoopCoefficients:
    """Loop coefficients of the whole rescaled continuous gate (finite ``N`` only)."""
    if is_infinite(p.n):
        raise UnsupportedParameterError("the composed gate has no finite loop at N=inf")
    return continuous_coefficients(ContinuousParams(p.k / p.n, p.n**2 * (1.0 + p.eta) * TWO_PI))


def milburn_composition(p: MilburnErrorParams) -> LoopCoefficients:
    if is_infinite(p.n):
        raise UnsupportedParameterError("the composed gate has no finite loop at N=inf")
    return pulsed_coefficients(PulseParams(p.lam / p.n, p.theta, p.n**2 * p.n_pulses))


def fit_order(xs: Sequence[float], errors: Sequence[float]) -> float:
    """Least-squares slope of ``log(error)`` against ``log(x)``."""
    x = np.log(np.asarray(xs, dtype=float))
    y = np.log(np.asarray(errors, dtype=float))
    return float(np.polyfit(x, y, 1)[0])


@dataclass
class ConvergenceReport:
    n_p: list[int]
    distances: list[float]
    order: float | None
    details: dict


def unification_suite(
    k: float, eta: float, n: RescaleFactor, n_p_sequence: Sequence[int]
) -> ConvergenceReport:
    """Distance between the unified Milburn and the continuous decomposition per ``N_p``.

    The distance is the max-norm over the three error coefficients (both
    displacements and the Kerr error). The target phases differ by the
    error-free polygon-versus-circle gap, which is reported separately in
    ``details["target_gaps"]``. ``order`` is the fitted log-log slope, or
    ``None`` when the distances are all zero (exact agreement, e.g. ``eta = 0``).
    """
    seq = [int(v) for v in n_p_sequence]
    if any(b <= a for a, b in zip(seq, seq[1:])):
        raise ValueError("n_p_sequence must be strictly increasing")
    sm = sm_error_gate(SMErrorParams(k, eta, n))
    dists, target_gaps = [], []
    for n_p in seq:
        mil = unified_milburn_gate(k, eta, n_p, n)
        dists.append(max(abs(a - b) for a, b in zip(mil.as_tuple()[:3], sm.as_tuple()[:3])))
        target_gaps.append(abs(mil.kerr_target - sm.kerr_target))
    positive = [d for d in dists if d > 0]
    order = fit_order(seq, dists) if len(positive) == len(dists) and len(seq) > 1 else None

    # the linearised Kerr errors, after substituting the unified strength, reproduce the
    # continuous first-order error (zero at N=1, 2 pi k^2 eta at N=inf) as N_p grows
    details: dict = {"target_gaps": target_gaps}
    if n == 1 or is_infinite(n):
        n_p = seq[-1]
        lam = unify_strength(k, eta, n_p)
        taylor = milburn_kerr_taylor(MilburnErrorParams(lam, n_p, eta, n))
        shift = polygon_target_kerr(lam, n_p) - polygon_target_kerr(unify_strength(k, 0.0, n_p), n_p)
        sm_first_order = 0.0 if n == 1 else TWO_PI * k**2 * eta
        details["taylor_first_order_gap"] = taylor + shift - sm_first_order
    return ConvergenceReport(seq, dists, order, details)
