"""Loop coefficients and phase-space geometry of pulsed and continuous gates.

A pulsed gate is a product of ``n_pulses`` kicks

    exp[i lam O (x cos(n theta) - p sin(n theta))],   n = 0 .. n_pulses-1

and collapses to ``exp[i O (c1 x - c2 p)] exp[i O^2 c3]``. The continuous
gate has the same shape with coefficients ``(d1, d2, d3)``. Both are carried
around as :class:`LoopCoefficients`.

Sign convention: the n-th kick generator ``(b e^{in theta} + b^dag e^{-in theta})/sqrt(2)``
expands to ``x cos(n theta) - p sin(n theta)``, so ``c2 = lam * sum sin(n theta)``
enters with a minus sign in front of ``p``. Trajectories are returned in
``(X, P)`` coordinates, so the end point of a loop is ``(c1, -c2)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi
# 2 pi - TWO_PI, for two-term argument reduction
_TWO_PI_LO = 2.4492935982947064e-16

# below this |sin(theta/2)| the closed forms are 0/0; use accumulation instead
_SINGULAR_SIN = 1e-8
# the Kerr closed form loses about n_pulses * eps / |sin(theta/2)| relative to lam^2
_CANCELLATION_SIN_PER_PULSE = 1e-5


@dataclass(frozen=True)
class PulseParams:
    """Equal-strength pulse train: strength per pulse, phase increment, pulse count."""

    lam: float
    theta: float
    n_pulses: int

    def __post_init__(self):
        if int(self.n_pulses) != self.n_pulses or self.n_pulses < 1:
            raise ValueError(f"n_pulses must be a positive integer, got {self.n_pulses!r}")
        if not math.isfinite(self.lam) or self.lam < 0:
            raise ValueError(f"lam must be finite and non-negative, got {self.lam!r}")
        if not math.isfinite(self.theta):
            raise ValueError(f"theta must be finite, got {self.theta!r}")


@dataclass(frozen=True)
class ContinuousParams:
    """Continuous interaction: rescaled strength ``k`` and swept angle ``phi = omega_m t``."""

    k: float
    phi: float

    def __post_init__(self):
        if not math.isfinite(self.k) or self.k < 0:
            raise ValueError(f"k must be finite and non-negative, got {self.k!r}")
        if not math.isfinite(self.phi) or self.phi < 0:
            raise ValueError(f"phi must be finite and non-negative, got {self.phi!r}")


@dataclass(frozen=True)
class LoopCoefficients:
    disp_x: float
    disp_p: float
    kerr: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.disp_x, self.disp_p, self.kerr)

    @property
    def displacement_norm(self) -> float:
        return math.hypot(self.disp_x, self.disp_p)


@dataclass(frozen=True)
class SweptAngle:
    full_loops: int
    net: float


@dataclass(frozen=True)
class Trajectory:
    """Sampled loop in (X, P) coordinates with the circle it lies on.

    ``center`` is ``None`` and ``radius`` infinite for a straight pulse train
    (phase increment a multiple of 2 pi).
    """

    points: np.ndarray
    center: tuple[float, float] | None
    radius: float

    @property
    def endpoint(self) -> np.ndarray:
        return self.points[-1] - self.points[0]


def swept_angle(total: float) -> SweptAngle:
    """Split ``total`` into ``2 pi M + net`` with ``0 <= net < 2 pi``."""
    if total < 0:
        raise ValueError(f"swept angle must be non-negative, got {total!r}")
    loops = math.floor(total / TWO_PI)
    net = total - TWO_PI * loops
    # guard rounding at the upper edge, e.g. total = 4 pi - tiny
    if net >= TWO_PI:
        loops += 1
        net -= TWO_PI
    if net < 0:
        net = 0.0
    return SweptAngle(int(loops), net)


def _reduced_angle(theta: float) -> float:
    return math.fmod(theta, TWO_PI) % TWO_PI


def centred_angle(theta: float) -> float:
    """``theta`` reduced to ``[-pi, pi]`` modulo 2 pi, keeping small remainders accurate."""
    turns = round(theta / TWO_PI)
    return (theta - turns * TWO_PI) - turns * _TWO_PI_LO


def pulsed_coefficients(p: PulseParams) -> LoopCoefficients:
    """Closed-form ``(c1, c2, c3)`` of a pulse train.

    Falls back to :func:`pulsed_coefficients_bruteforce` when the phase
    increment is close to a multiple of 2 pi: below ``|sin(theta/2)| = 1e-8``
    the closed forms are 0/0, and below ``1e-5 * n_pulses`` the Kerr term
    cancels too badly for a 1e-10 relative result.
    """
    lam, n = p.lam, p.n_pulses
    theta = centred_angle(p.theta)
    half = math.sin(theta / 2.0)
    if abs(half) < max(_SINGULAR_SIN, _CANCELLATION_SIN_PER_PULSE * n):
        return pulsed_coefficients_bruteforce(p)
    cot_half = math.cos(theta / 2.0) / half
    last = (n - 1) * theta
    c1 = lam * (0.5 + 0.5 * math.cos(last) + 0.5 * math.sin(last) * cot_half)
    c2 = lam * (cot_half * math.sin(0.5 * last) ** 2 + 0.5 * math.sin(last))
    c3 = 0.5 * lam**2 * (n * math.sin(theta) - math.sin(n * theta)) / (4.0 * half**2)
    return LoopCoefficients(c1, c2, c3)


def pulsed_coefficients_bruteforce(p: PulseParams) -> LoopCoefficients:
    """Accumulate the pulse product one kick at a time.

    Kick ``n`` adds ``lam (cos a_n, sin a_n)`` to the displacement and, through
    ``[x cos a - p sin a, x cos b - p sin b] = i sin(a - b)``, a Kerr phase
    ``lam^2/2 * sum_{m<n} sin(a_n - a_m)``. The running sums make this O(n).
    Angles and sums are kept in extended precision where the platform has it,
    so the rounding of ``n * theta`` does not build up over long trains.
    """
    lam, n = p.lam, p.n_pulses
    angles = np.arange(n, dtype=np.longdouble) * np.longdouble(centred_angle(p.theta))
    cos_a, sin_a = np.cos(angles), np.sin(angles)
    # sums over earlier kicks m < n
    prev_cos = np.concatenate(([0.0], np.cumsum(cos_a)[:-1]))
    prev_sin = np.concatenate(([0.0], np.cumsum(sin_a)[:-1]))
    pair = sin_a * prev_cos - cos_a * prev_sin
    return LoopCoefficients(
        float(lam * cos_a.sum()),
        float(lam * sin_a.sum()),
        float(0.5 * lam**2 * pair.sum()),
    )


def continuous_coefficients(c: ContinuousParams) -> LoopCoefficients:
    k, phi = c.k, c.phi
    return LoopCoefficients(
        math.sqrt(2.0) * k * math.sin(phi),
        math.sqrt(2.0) * k * (1.0 - math.cos(phi)),
        k**2 * (phi - math.sin(phi)),
    )


def continuous_limit_of_pulsed(k: float, phi: float, n_p: int) -> LoopCoefficients:
    """Pulsed coefficients with ``theta = phi/n_p`` and ``lam = sqrt(2) k theta``."""
    if n_p < 1:
        raise ValueError(f"n_p must be >= 1, got {n_p!r}")
    theta = phi / n_p
    return pulsed_coefficients(PulseParams(math.sqrt(2.0) * k * theta, theta, int(n_p)))


def pulsed_circle(lam: float, theta: float) -> tuple[tuple[float, float] | None, float]:
    """Centre and radius of the circle through all polygon vertices (first vertex at origin)."""
    reduced = _reduced_angle(theta)
    half = math.sin(reduced / 2.0)
    if half < _SINGULAR_SIN:
        return None, math.inf
    cot_half = math.cos(reduced / 2.0) / half
    return (0.5 * lam, -0.5 * lam * cot_half), lam / (2.0 * half)


def trajectory_pulsed(p: PulseParams) -> Trajectory:
    steps = np.arange(p.n_pulses) * p.theta
    moves = p.lam * np.column_stack((np.cos(steps), -np.sin(steps)))
    points = np.vstack((np.zeros((1, 2)), np.cumsum(moves, axis=0)))
    center, radius = pulsed_circle(p.lam, p.theta)
    return Trajectory(points, center, radius)


def trajectory_continuous(c: ContinuousParams, samples: int = 128) -> Trajectory:
    if samples < 2:
        raise ValueError(f"samples must be >= 2, got {samples!r}")
    r = math.sqrt(2.0) * c.k
    s = np.linspace(0.0, c.phi, samples)
    points = np.column_stack((r * np.sin(s), -r * (1.0 - np.cos(s))))
    return Trajectory(points, (0.0, -r), r)


def _cross(u, v) -> float:
    return float(u[0] * v[1] - u[1] * v[0])


def _net_sign(net: float) -> float:
    # net == pi: the triangle is degenerate, either sign gives the same area
    return 1.0 if net <= math.pi else -1.0


def kerr_area_oracle_pulsed(p: PulseParams) -> float:
    """Kerr coefficient read off the polygon.

    ``n_pulses`` times the area of the isosceles triangle (apex at the circle
    centre, base one pulse) minus the signed area of the triangle spanned by
    the centre and the two loop end points.
    """
    traj = trajectory_pulsed(p)
    if traj.center is None:
        return 0.0
    centre = np.asarray(traj.center)
    v1, v2, v_end = traj.points[0], traj.points[1], traj.points[-1]
    # traversal is clockwise in (X, P): clockwise area counts positive
    step_area = -0.5 * _cross(v1 - centre, v2 - centre)
    closing = 0.5 * abs(_cross(v1 - centre, v_end - centre))
    net = swept_angle(p.n_pulses * _reduced_angle(p.theta)).net
    return p.n_pulses * step_area - _net_sign(net) * closing


def kerr_area_oracle_continuous(c: ContinuousParams) -> float:
    """Kerr coefficient as full circles plus a sector minus a signed triangle."""
    r = math.sqrt(2.0) * c.k
    swept = swept_angle(c.phi)
    traj = trajectory_continuous(c, samples=2)
    centre = np.asarray(traj.center)
    l1, l2 = traj.points[0], traj.points[-1]
    circles = swept.full_loops * math.pi * r**2
    sector = 0.5 * r**2 * swept.net
    closing = 0.5 * abs(_cross(l1 - centre, l2 - centre))
    return circles + sector - _net_sign(swept.net) * closing
