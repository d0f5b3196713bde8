"""Parameter sweeps over the timing error and the rescale factor.

A sweep is described by a JSON config (see :class:`SweepConfig`) and writes

* ``sweep.csv`` with header ``error,n,fidelity,purity``,
* optionally ``q/q_<error index>_<n>.csv`` per grid point,
* ``manifest.json`` with the full config, the error grid, tolerances and the
  package version.

Grid points are independent, so they are farmed out to a thread pool; rows
are written in grid order regardless of completion order.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .gate_error_models import check_rescale, format_rescale, is_infinite
from .optomech_analytic import (
    FieldParams,
    QGridSpec,
    SeriesState,
    fidelity,
    purity,
    qfunction,
    series_continuous,
    series_pulsed,
    target_kerr_continuous,
    target_kerr_pulsed,
)
from .optomech_dissipative import (
    DissipativeContinuousParams,
    DissipativePulsedParams,
    continuous_dissipative_state,
    pulsed_dissipative_state,
)
from .series import DEFAULT_TAIL_EPS, poisson_window, window_weights

PRESETS = ("fig3", "fig4", "fig5", "fig6")
OUTPUTS = ("fidelity", "purity", "qfunction")


class ConfigError(ValueError):
    """Invalid sweep configuration; ``path`` locates the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass(frozen=True)
class SweepConfig:
    regime: str
    alpha: float
    strength: float
    error_range: tuple[float, float, int]
    n_values: tuple
    dissipative: bool = False
    n_pulses: int | None = None
    n_th: float = 0.0
    gamma_ratio: float = 0.0
    outputs: tuple[str, ...] = ("fidelity", "purity")
    qgrid: QGridSpec | None = None
    tail_eps: float = DEFAULT_TAIL_EPS
    output_path: str = "."
    name: str = ""

    def errors(self) -> np.ndarray:
        lo, hi, count = self.error_range
        return np.linspace(lo, hi, count)

    def to_json(self) -> dict:
        out = asdict(self)
        out["n_values"] = [format_rescale(n) if is_infinite(n) else n for n in self.n_values]
        out["error_range"] = list(self.error_range)
        out["outputs"] = list(self.outputs)
        if self.qgrid is not None:
            out["qgrid"] = {
                "re_range": list(self.qgrid.re_range),
                "im_range": list(self.qgrid.im_range),
                "resolution": self.qgrid.resolution,
            }
        return out


def _number(raw: dict, key: str, default=None, *, minimum=None, required=False):
    if key not in raw:
        if required:
            raise ConfigError(key, "missing required field")
        return default
    val = raw[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)) or not math.isfinite(val):
        raise ConfigError(key, f"expected a finite number, got {val!r}")
    if minimum is not None and val < minimum:
        raise ConfigError(key, f"must be >= {minimum}, got {val!r}")
    return val


def _pair(raw, path: str) -> tuple[float, float]:
    if not isinstance(raw, (list, tuple)) or len(raw) != 2:
        raise ConfigError(path, f"expected [min, max], got {raw!r}")
    lo, hi = (float(v) for v in raw)
    if hi < lo:
        raise ConfigError(path, "max below min")
    return lo, hi


def parse_config(raw: dict) -> SweepConfig:
    """Validate a decoded JSON config."""
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    regime = raw.get("regime")
    if regime not in ("continuous", "pulsed"):
        raise ConfigError("regime", f"expected 'continuous' or 'pulsed', got {regime!r}")
    dissipative = raw.get("dissipative", False)
    if not isinstance(dissipative, bool):
        raise ConfigError("dissipative", "expected true or false")

    n_pulses = None
    if regime == "pulsed":
        n_pulses = _number(raw, "n_pulses", required=True, minimum=2)
        if int(n_pulses) != n_pulses:
            raise ConfigError("n_pulses", "must be an integer")
        n_pulses = int(n_pulses)

    er = raw.get("error_range")
    if not isinstance(er, (list, tuple)) or len(er) != 3:
        raise ConfigError("error_range", "expected [min, max, count]")
    lo, hi = _pair(er[:2], "error_range")
    count = er[2]
    if isinstance(count, bool) or not isinstance(count, int) or count < 1:
        raise ConfigError("error_range[2]", f"count must be an integer >= 1, got {count!r}")

    n_raw = raw.get("n_values")
    if not isinstance(n_raw, list) or not n_raw:
        raise ConfigError("n_values", "expected a non-empty list")
    n_values = []
    for i, n in enumerate(n_raw):
        try:
            n_values.append(check_rescale(n))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"n_values[{i}]", str(exc)) from None

    outputs = raw.get("outputs", ["fidelity", "purity"])
    if not isinstance(outputs, list) or any(o not in OUTPUTS for o in outputs):
        raise ConfigError("outputs", f"entries must be among {list(OUTPUTS)}")

    qgrid = None
    if raw.get("qgrid") is not None:
        q = raw["qgrid"]
        if not isinstance(q, dict):
            raise ConfigError("qgrid", "expected an object")
        res = q.get("resolution")
        if isinstance(res, bool) or not isinstance(res, int) or res < 1:
            raise ConfigError("qgrid.resolution", "expected an integer >= 1")
        qgrid = QGridSpec(
            _pair(q.get("re_range"), "qgrid.re_range"), _pair(q.get("im_range"), "qgrid.im_range"), res
        )
    if "qfunction" in outputs and qgrid is None:
        raise ConfigError("qgrid", "required when outputs include 'qfunction'")

    n_th = _number(raw, "n_th", 0.0, minimum=0)
    gamma = _number(raw, "gamma_ratio", 0.0, minimum=0)
    if dissipative and n_th != 0:
        raise ConfigError("n_th", "dissipative sweeps assume a vacuum bath; n_th must be 0")
    if not dissipative and gamma != 0:
        raise ConfigError("gamma_ratio", "set 'dissipative': true to use a non-zero gamma_ratio")
    tail_eps = _number(raw, "tail_eps", DEFAULT_TAIL_EPS)
    if not 0 < tail_eps < 1:
        raise ConfigError("tail_eps", "must lie in (0, 1)")
    name = raw.get("name", "")
    if not isinstance(name, str):
        raise ConfigError("name", "expected a string")
    out_path = raw.get("output_path", ".")
    if not isinstance(out_path, str):
        raise ConfigError("output_path", "expected a string")

    return SweepConfig(
        regime=regime,
        alpha=float(_number(raw, "alpha", required=True, minimum=0)),
        strength=float(_number(raw, "strength", required=True, minimum=0)),
        error_range=(lo, hi, count),
        n_values=tuple(n_values),
        dissipative=dissipative,
        n_pulses=n_pulses,
        n_th=float(n_th),
        gamma_ratio=float(gamma),
        outputs=tuple(outputs),
        qgrid=qgrid,
        tail_eps=float(tail_eps),
        output_path=out_path,
        name=name,
    )


def load_config(path) -> SweepConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError("<file>", f"no such config file: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"invalid JSON: {exc}") from None
    return parse_config(raw)


def load_preset(name: str) -> SweepConfig:
    if name not in PRESETS:
        raise ConfigError("preset", f"unknown preset {name!r}; choose from {list(PRESETS)}")
    text = resources.files("geogate.presets").joinpath(f"{name}.json").read_text()
    return parse_config(json.loads(text))


# ---------------------------------------------------------------- evaluation


@dataclass(frozen=True)
class PointResult:
    error: float
    n: object
    fidelity: float
    purity: float
    q: np.ndarray | None = field(default=None, compare=False)


def field_state(cfg: SweepConfig, error: float, n) -> tuple[SeriesState, float]:
    """Reduced field state at one grid point, plus the target Kerr coefficient."""
    f = FieldParams(cfg.alpha, cfg.n_th)
    if cfg.regime == "continuous":
        target = target_kerr_continuous(cfg.strength)
    else:
        target = target_kerr_pulsed(cfg.strength, cfg.n_pulses)
    if not cfg.dissipative:
        if cfg.regime == "continuous":
            return series_continuous(f, cfg.strength, error, n, cfg.tail_eps), target
        return series_pulsed(f, cfg.strength, cfg.n_pulses, error, n, cfg.tail_eps), target

    if cfg.regime == "continuous":
        rep = continuous_dissipative_state(
            DissipativeContinuousParams(cfg.strength, error, cfg.gamma_ratio, n, alpha=cfg.alpha)
        )
    else:
        rep = pulsed_dissipative_state(
            DissipativePulsedParams(cfg.strength, cfg.n_pulses, error, cfg.gamma_ratio, n, alpha=cfg.alpha)
        )
    window = poisson_window(cfg.alpha, cfg.tail_eps)
    state = SeriesState(cfg.alpha, window, window_weights(cfg.alpha, window), rep.phase_rate, rep.field_decay)
    return state, target


def evaluate_point(cfg: SweepConfig, error: float, n) -> PointResult:
    state, target = field_state(cfg, error, n)
    f = FieldParams(cfg.alpha, cfg.n_th)
    q = None
    if "qfunction" in cfg.outputs:
        q = qfunction(state, f, cfg.qgrid).values
    return PointResult(float(error), n, fidelity(state, f, target), purity(state, f), q)


def sweep_points(cfg: SweepConfig, threads: int = 1) -> list[PointResult]:
    tasks = [(float(e), n) for e in cfg.errors() for n in cfg.n_values]
    if threads <= 1:
        return [evaluate_point(cfg, e, n) for e, n in tasks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda t: evaluate_point(cfg, *t), tasks))


def _fmt(x: float) -> str:
    return repr(float(x))


def write_sweep_csv(results: list[PointResult], path) -> None:
    lines = ["error,n,fidelity,purity"]
    for r in results:
        lines.append(f"{_fmt(r.error)},{format_rescale(r.n)},{_fmt(r.fidelity)},{_fmt(r.purity)}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_q_csv(cfg: SweepConfig, values: np.ndarray, path) -> None:
    re, im = cfg.qgrid.axes()
    lines = ["re,im,q"]
    for i, x in enumerate(re):
        for j, y in enumerate(im):
            lines.append(f"{_fmt(x)},{_fmt(y)},{_fmt(values[i, j])}")
    Path(path).write_text("\n".join(lines) + "\n")


def run_sweep(cfg: SweepConfig, out_dir=None, threads: int = 1) -> dict:
    """Evaluate the grid and write CSV, optional Q files and the manifest. Returns the manifest."""
    out = Path(out_dir if out_dir is not None else cfg.output_path)
    out.mkdir(parents=True, exist_ok=True)
    results = sweep_points(cfg, threads)
    write_sweep_csv(results, out / "sweep.csv")
    files = ["sweep.csv"]
    if "qfunction" in cfg.outputs:
        (out / "q").mkdir(exist_ok=True)
        n_count = len(cfg.n_values)
        for idx, r in enumerate(results):
            name = f"q/q_{idx // n_count:04d}_{format_rescale(r.n)}.csv"
            write_q_csv(cfg, r.q, out / name)
            files.append(name)
    manifest = {
        "package": "geogate",
        "version": __version__,
        "config": cfg.to_json(),
        "errors": [float(e) for e in cfg.errors()],
        "tolerances": {"tail_eps": cfg.tail_eps, "imaginary_residual": 1e-8},
        "units": "hbar = omega_m = 1; error is eta (continuous) or xi (pulsed)",
        "files": files,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest
