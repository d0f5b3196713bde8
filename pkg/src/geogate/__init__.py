"""Geometric-phase gates: phase-space loops, error models and optomechanical fidelities."""

__version__ = "0.1.0"

from .gate_error_models import INFINITY  # noqa: E402
from .phase_space import (  # noqa: E402
    ContinuousParams,
    LoopCoefficients,
    PulseParams,
    continuous_coefficients,
    pulsed_coefficients,
)

__all__ = [
    "INFINITY",
    "ContinuousParams",
    "LoopCoefficients",
    "PulseParams",
    "continuous_coefficients",
    "pulsed_coefficients",
    "__version__",
]
