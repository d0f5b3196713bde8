"""Truncated Fock-space series over a coherent field.

Every field state in this package has density-matrix entries of the form

    rho(l1, l2) = sqrt(w(l1) w(l2)) exp[i B (l1^2 - l2^2)] exp[-c (l1 - l2)^2]

with ``w`` the Poisson(alpha^2) weights. Fidelity, purity and the Q-function
are then Toeplitz quadratic forms ``sum u(l1) conj(u(l2)) K(l1 - l2)``, which
are reduced over the offset ``d = l1 - l2`` via lagged autocorrelations.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

DEFAULT_TAIL_EPS = 1e-12

# exp(-34) < 1e-14: lags beyond this decay exponent are dropped from banded sums
BAND_EXPONENT = 34.0


@dataclass(frozen=True)
class FockWindow:
    """Fock labels ``l_min..l_max`` holding all but ``tail_mass`` of a Poisson law on each side.

    ``mass`` is the Poisson probability actually captured by the window.
    """

    l_min: int
    l_max: int
    tail_mass: float
    mass: float = 1.0

    def __post_init__(self):
        if self.l_min < 0 or self.l_max < self.l_min:
            raise ValueError(f"bad window [{self.l_min}, {self.l_max}]")

    @property
    def labels(self) -> np.ndarray:
        return np.arange(self.l_min, self.l_max + 1)

    @property
    def size(self) -> int:
        return self.l_max - self.l_min + 1

    @property
    def centre(self) -> int:
        return (self.l_min + self.l_max) // 2


def log_poisson(mean: float, labels: np.ndarray) -> np.ndarray:
    """``log(e^{-mean} mean^l / l!)`` without forming factorials."""
    labels = np.asarray(labels, dtype=float)
    if mean == 0.0:
        out = np.full(labels.shape, -np.inf)
        out[labels == 0] = 0.0
        return out
    return -mean + labels * math.log(mean) - gammaln(labels + 1.0)


def poisson_window(alpha: float, tail_eps: float = DEFAULT_TAIL_EPS) -> FockWindow:
    """Smallest label range whose excluded Poisson(alpha^2) mass is below ``tail_eps`` per side.

    The cut points come from explicit cumulative tail sums of the log-weights.
    """
    if alpha < 0:
        raise ValueError(f"alpha must be non-negative, got {alpha!r}")
    if not 0.0 < tail_eps < 1.0:
        raise ValueError(f"tail_eps must lie in (0, 1), got {tail_eps!r}")
    mean = alpha * alpha
    if mean == 0.0:
        return FockWindow(0, 0, tail_eps, 1.0)
    sd = math.sqrt(mean)
    log_eps = math.log(tail_eps)
    spread = 8.0 + math.sqrt(-2.0 * log_eps)
    while True:
        lo = max(0, int(math.floor(mean - spread * sd - 10)))
        hi = int(math.ceil(mean + spread * sd - log_eps + 10))
        labels = np.arange(lo, hi + 1)
        logw = log_poisson(mean, labels)
        # the candidate range must itself leave negligible mass outside
        if (lo == 0 or logw[0] < log_eps - 40) and logw[-1] < log_eps - 40:
            break
        spread *= 1.5
    lower = np.logaddexp.accumulate(logw)  # log sum_{j <= l}
    upper = np.logaddexp.accumulate(logw[::-1])[::-1]  # log sum_{j >= l}
    # l_min: first label with sum_{j < l_min} < eps
    below = np.concatenate(([-np.inf], lower[:-1]))
    i_min = int(np.nonzero(below < log_eps)[0][-1])
    above = np.concatenate((upper[1:], [-np.inf]))
    i_max = int(np.nonzero(above < log_eps)[0][0])
    captured = float(np.exp(np.logaddexp.reduce(logw[i_min : i_max + 1])))
    return FockWindow(int(labels[i_min]), int(labels[i_max]), tail_eps, min(captured, 1.0))


def window_weights(alpha: float, window: FockWindow) -> np.ndarray:
    """Poisson weights on the window, renormalised to sum to one."""
    logw = log_poisson(alpha * alpha, window.labels)
    w = np.exp(logw - logw.max())
    return w / w.sum()


def autocorrelation(u: np.ndarray, max_lag: int | None = None) -> np.ndarray:
    """``C[d] = sum_l u[l + d] conj(u[l])`` for ``d = 0 .. max_lag``."""
    n = u.size
    if max_lag is None or max_lag >= n - 1:
        full = np.correlate(u, u, mode="full")
        return full[n - 1 :]
    out = np.empty(max_lag + 1, dtype=complex)
    for d in range(max_lag + 1):
        out[d] = np.vdot(u[: n - d], u[d:])
    return out


def band_limit(decay: float, n: int) -> int:
    """Largest lag worth keeping for a Gaussian kernel ``exp(-decay d^2)``."""
    if decay * (n - 1) ** 2 <= BAND_EXPONENT:
        return n - 1
    return min(n - 1, int(math.ceil(math.sqrt(BAND_EXPONENT / decay))))


def toeplitz_form(u: np.ndarray, decay: float, banded: bool = True) -> complex:
    """``sum_{l1,l2} u[l1] conj(u[l2]) exp(-decay (l1 - l2)^2)``."""
    n = u.size
    max_lag = band_limit(decay, n) if banded else n - 1
    corr = autocorrelation(u, max_lag)
    lags = np.arange(corr.size, dtype=float)
    kernel = np.exp(-decay * lags**2)
    # negative lags are conjugates of positive ones
    positive = np.sum(kernel[1:] * corr[1:])
    return complex(kernel[0] * corr[0] + positive + np.conj(positive))


def centred_square(window: FockWindow) -> np.ndarray:
    """``l^2 - l0^2`` about the window centre; the dropped constant cancels in every form."""
    j = window.labels - window.centre
    return 2.0 * window.centre * j + j * j


def series_fidelity(
    weights: np.ndarray, window: FockWindow, phase: float, decay: float, tol: float = 1e-8
) -> float:
    """Overlap with the ideal Kerr state given the net Kerr phase ``phase`` (gate minus target)."""
    u = weights * np.exp(1j * phase * centred_square(window))
    value = toeplitz_form(u, decay)
    if abs(value.imag) > tol:
        raise ArithmeticError(f"fidelity has imaginary residual {value.imag:.3e}")
    return value.real


def series_purity(weights: np.ndarray, decay: float) -> float:
    return toeplitz_form(weights.astype(complex), 2.0 * decay).real


def series_qfunction(
    alpha: float,
    window: FockWindow,
    phase: float,
    decay: float,
    betas: np.ndarray,
    weights: np.ndarray | None = None,
) -> np.ndarray:
    """``<beta| rho |beta> / pi`` at each complex ``beta``, computed in log space.

    The window drops ``tail_eps`` of probability, but Q is quadratic in the
    amplitudes ``sqrt(w)``: away from the peak the truncation error grows
    towards ``sqrt(tail_eps)`` relative. Use a smaller ``tail_eps`` for
    far-tail Q values.
    """
    labels = window.labels.astype(float)
    if weights is None:
        weights = window_weights(alpha, window)
    half_logw = 0.5 * np.log(weights)
    half_lgamma = 0.5 * gammaln(labels + 1.0)
    kerr_phase = phase * centred_square(window)
    betas = np.asarray(betas, dtype=complex)
    out = np.empty(betas.shape, dtype=float)
    for idx, beta in np.ndenumerate(betas):
        r = abs(beta)
        if r == 0.0:
            logmag = np.where(labels == 0, half_logw, -np.inf)
        else:
            logmag = half_logw - 0.5 * r * r + labels * math.log(r) - half_lgamma
        keep = logmag > logmag.max() - 40.0
        lo, hi = np.nonzero(keep)[0][[0, -1]]
        sl = slice(lo, hi + 1)
        ang = kerr_phase[sl] - labels[sl] * math.atan2(beta.imag, beta.real)
        u = np.exp(logmag[sl] + 1j * ang)
        out[idx] = toeplitz_form(u, decay).real / math.pi
    return out
