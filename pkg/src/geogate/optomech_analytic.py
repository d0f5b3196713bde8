"""Closed-form field state of the unitary optomechanical gate.

The field starts in a real coherent state ``|alpha>`` and the mechanics in a
thermal state with ``n_th`` phonons. After the gate the reduced field matrix
is a :class:`SeriesState`: a Kerr phase ``exp[i kerr (l1^2 - l2^2)]`` and a
thermal-enhanced decoherence ``exp[-decay (l1 - l2)^2]`` on top of Poisson
weights. Fidelity, purity and the Q-function follow from it.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .gate_error_models import (
    TWO_PI,
    RescaleFactor,
    check_rescale,
    circle_target_kerr,
    is_infinite,
    polygon_target_kerr,
)
from .series import (
    DEFAULT_TAIL_EPS,
    FockWindow,
    poisson_window,
    series_fidelity,
    series_purity,
    series_qfunction,
    window_weights,
)


class SingularConfigurationError(ValueError):
    """Raised when a closed form divides by zero for the requested parameters."""


@dataclass(frozen=True)
class FieldParams:
    alpha: float
    n_th: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.alpha) or self.alpha < 0:
            raise ValueError(f"alpha must be real and non-negative, got {self.alpha!r}")
        if not math.isfinite(self.n_th) or self.n_th < 0:
            raise ValueError(f"n_th must be non-negative, got {self.n_th!r}")


@dataclass(frozen=True, eq=False)
class SeriesState:
    """Reduced field state ``rho(l1,l2) = sqrt(w1 w2) Psi(l1,l2) M(l1,l2)``.

    ``Psi = exp[i kerr (l1^2 - l2^2)]`` and ``M = exp[-decay (l1 - l2)^2]``.
    Immutable, so it can be shared between threads.
    """

    alpha: float
    window: FockWindow
    weights: np.ndarray
    kerr: float
    decay: float

    def phase(self, l1, l2):
        l1, l2 = np.asarray(l1, dtype=float), np.asarray(l2, dtype=float)
        return np.exp(1j * self.kerr * (l1 - l2) * (l1 + l2))

    def magnitude(self, l1, l2):
        d = np.asarray(l1, dtype=float) - np.asarray(l2, dtype=float)
        return np.exp(-self.decay * d * d)

    def density_matrix(self, dim: int | None = None) -> np.ndarray:
        """Dense field matrix on Fock labels ``0 .. dim-1`` (default: up to ``window.l_max``)."""
        dim = self.window.l_max + 1 if dim is None else dim
        amp = np.zeros(dim)
        labels = self.window.labels
        inside = labels < dim
        amp[labels[inside]] = np.sqrt(self.weights[inside])
        ls = np.arange(dim)
        l1, l2 = np.meshgrid(ls, ls, indexing="ij")
        return np.outer(amp, amp) * self.phase(l1, l2) * self.magnitude(l1, l2)


def _state(f: FieldParams, kerr: float, decay: float, tail_eps: float) -> SeriesState:
    window = poisson_window(f.alpha, tail_eps)
    return SeriesState(f.alpha, window, window_weights(f.alpha, window), kerr, decay)


def continuous_series_coefficients(
    k: float, eta: float, n: RescaleFactor, n_th: float = 0.0
) -> tuple[float, float]:
    """``(kerr, decay)`` after ``N**2 (1 + eta)`` periods at strength ``k/N``."""
    n = check_rescale(n)
    if is_infinite(n):
        return k**2 * (1.0 + eta) * TWO_PI, 0.0
    arg = eta * TWO_PI * n**2
    scale = k**2 / n**2
    kerr = scale * ((1.0 + eta) * TWO_PI * n**2 - math.sin(arg))
    decay = scale * (2.0 * n_th + 1.0) * (1.0 - math.cos(arg))
    return kerr, decay


def pulsed_series_coefficients(
    lam: float, n_p: int, xi: float, n: RescaleFactor, n_th: float = 0.0
) -> tuple[float, float]:
    """``(kerr, decay)`` after ``N**2 n_p`` pulses of ``lam/N`` at increment ``(1+xi) 2 pi/n_p``."""
    n = check_rescale(n)
    half = (1.0 + xi) * math.pi / n_p
    s2 = math.sin(half) ** 2
    if s2 < 1e-30:
        raise SingularConfigurationError(
            f"phase increment (1+xi) 2pi/N_p = {2 * half!r} is a multiple of 2 pi"
        )
    if is_infinite(n):
        return lam**2 * n_p * math.sin(2.0 * half) / (8.0 * s2), 0.0
    arg = n**2 * TWO_PI * xi
    scale = lam**2 / n**2
    kerr = scale * (n**2 * n_p * math.sin(2.0 * half) - math.sin(arg)) / (8.0 * s2)
    decay = scale * (2.0 * n_th + 1.0) * (1.0 - math.cos(arg)) / (8.0 * s2)
    return kerr, decay


def series_continuous(
    f: FieldParams, k: float, eta: float, n: RescaleFactor = 1, tail_eps: float = DEFAULT_TAIL_EPS
) -> SeriesState:
    kerr, decay = continuous_series_coefficients(k, eta, n, f.n_th)
    return _state(f, kerr, decay, tail_eps)


def series_pulsed(
    f: FieldParams,
    lam: float,
    n_p: int,
    xi: float,
    n: RescaleFactor = 1,
    tail_eps: float = DEFAULT_TAIL_EPS,
) -> SeriesState:
    kerr, decay = pulsed_series_coefficients(lam, n_p, xi, n, f.n_th)
    return _state(f, kerr, decay, tail_eps)


def target_kerr_continuous(k: float) -> float:
    return circle_target_kerr(k)


def target_kerr_pulsed(lam: float, n_p: int) -> float:
    return polygon_target_kerr(lam, n_p)


def _check_field(s: SeriesState, f: FieldParams) -> None:
    if f.alpha != s.alpha:
        raise ValueError(f"series built for alpha={s.alpha}, evaluated with alpha={f.alpha}")


def fidelity(s: SeriesState, f: FieldParams, target_kerr: float) -> float:
    """Overlap of the field state with ``exp[i target_kerr n^2] |alpha>``."""
    _check_field(s, f)
    return series_fidelity(s.weights, s.window, s.kerr - target_kerr, s.decay)


def purity(s: SeriesState, f: FieldParams) -> float:
    _check_field(s, f)
    return series_purity(s.weights, s.decay)


@dataclass(frozen=True)
class QGridSpec:
    re_range: tuple[float, float]
    im_range: tuple[float, float]
    resolution: int

    def __post_init__(self):
        if self.resolution < 1:
            raise ValueError("resolution must be >= 1")

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        return (
            np.linspace(*self.re_range, self.resolution),
            np.linspace(*self.im_range, self.resolution),
        )

    def points(self) -> np.ndarray:
        re, im = self.axes()
        return re[:, None] + 1j * im[None, :]


@dataclass(frozen=True)
class QGrid:
    re_range: tuple[float, float]
    im_range: tuple[float, float]
    resolution: int
    values: np.ndarray  # values[i, j] at re[i] + 1j * im[j]

    def cell_area(self) -> float:
        n = max(self.resolution - 1, 1)
        return (self.re_range[1] - self.re_range[0]) * (self.im_range[1] - self.im_range[0]) / n**2

    def to_csv(self, path) -> None:
        re = np.linspace(*self.re_range, self.resolution)
        im = np.linspace(*self.im_range, self.resolution)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["re", "im", "q"])
            for i, x in enumerate(re):
                for j, y in enumerate(im):
                    writer.writerow([repr(float(x)), repr(float(y)), repr(float(self.values[i, j]))])


def qfunction(s: SeriesState, f: FieldParams, grid: QGridSpec) -> QGrid:
    _check_field(s, f)
    values = series_qfunction(s.alpha, s.window, s.kerr, s.decay, grid.points(), s.weights)
    return QGrid(tuple(grid.re_range), tuple(grid.im_range), grid.resolution, values)


def quadrature_mean_mech_error(f: FieldParams, k: float, eta: float, phi_q: float) -> float:
    """Quadrature mean after the N=1 mechanical error gate alone."""
    return 2.0 * f.alpha * math.cos(phi_q) * math.exp(
        -(2.0 * f.n_th + 1.0) * k**2 * (1.0 - math.cos(eta * TWO_PI))
    )


def quadrature_mean_kerr_error(f: FieldParams, k: float, eta: float, phi_q: float) -> float:
    """Quadrature mean after the residual N -> inf self-Kerr error gate alone."""
    a2 = f.alpha**2
    x = 2.0 * TWO_PI * eta * k**2
    return 2.0 * f.alpha * math.exp(-a2 * (1.0 - math.cos(x))) * math.cos(
        phi_q - a2 * math.sin(x) - math.pi * eta * k**2 * 2.0
    )
