"""Command-line entry point: ``geogate {coeffs,trajectory,sweep,qfunc,validate}``.

Exit status is 0 on success, 1 when a validation suite fails and 2 on a
configuration error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .gate_error_models import check_rescale
from .optomech_analytic import FieldParams, qfunction
from .phase_space import (
    ContinuousParams,
    PulseParams,
    continuous_coefficients,
    pulsed_coefficients,
    trajectory_continuous,
    trajectory_pulsed,
)
from .sweep import PRESETS, ConfigError, field_state, load_config, load_preset, run_sweep, write_q_csv
from .validation import SUITES, run_validation

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG = 0, 1, 2


def _loop_params(args):
    """PulseParams or ContinuousParams from flags, or from a JSON config if given."""
    if args.config:
        try:
            raw = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError("<file>", str(exc)) from None
        regime = raw.get("regime", args.regime)
    else:
        raw, regime = vars(args), args.regime
    try:
        if regime == "pulsed":
            return PulseParams(float(raw["lam"]), float(raw["theta"]), int(raw["n_pulses"]))
        if regime == "continuous":
            return ContinuousParams(float(raw["k"]), float(raw["phi"]))
    except KeyError as exc:
        raise ConfigError(exc.args[0], "missing required parameter") from None
    except (TypeError, ValueError) as exc:
        raise ConfigError("params", str(exc)) from None
    raise ConfigError("regime", f"expected 'pulsed' or 'continuous', got {regime!r}")


def emit_trajectory(params, out, samples: int = 128) -> Path:
    """Write the phase-space path as CSV with header ``x,p``."""
    if isinstance(params, PulseParams):
        traj = trajectory_pulsed(params)
    else:
        traj = trajectory_continuous(params, samples)
    path = Path(out)
    if path.suffix != ".csv":
        path.mkdir(parents=True, exist_ok=True)
        path = path / "trajectory.csv"
    rows = ["x,p"] + [f"{float(x)!r},{float(p)!r}" for x, p in traj.points]
    path.write_text("\n".join(rows) + "\n")
    return path


def cmd_coeffs(args) -> int:
    params = _loop_params(args)
    c = pulsed_coefficients(params) if isinstance(params, PulseParams) else continuous_coefficients(params)
    print(json.dumps({"disp_x": c.disp_x, "disp_p": c.disp_p, "kerr": c.kerr}))
    return EXIT_OK


def cmd_trajectory(args) -> int:
    try:
        params = _loop_params(args)
        path = emit_trajectory(params, args.out, args.samples)
    except ValueError as exc:
        raise ConfigError("params", str(exc)) from None
    print(path)
    return EXIT_OK


def _sweep_config(args):
    if bool(args.config) == bool(args.preset):
        raise ConfigError("<args>", "give exactly one of --config or --preset")
    return load_preset(args.preset) if args.preset else load_config(args.config)


def cmd_sweep(args) -> int:
    cfg = _sweep_config(args)
    manifest = run_sweep(cfg, args.out, threads=args.threads)
    print(f"wrote {len(manifest['files'])} file(s) to {args.out or cfg.output_path}")
    return EXIT_OK


def cmd_qfunc(args) -> int:
    """Q-function of one grid point; the config's first error and N are used unless overridden."""
    cfg = _sweep_config(args)
    if cfg.qgrid is None:
        raise ConfigError("qgrid", "required for qfunc")
    error = args.error if args.error is not None else float(cfg.errors()[0])
    try:
        n = check_rescale(args.n) if args.n is not None else cfg.n_values[0]
    except ValueError as exc:
        raise ConfigError("--n", str(exc)) from None
    state, _ = field_state(cfg, error, n)
    grid = qfunction(state, FieldParams(cfg.alpha, cfg.n_th), cfg.qgrid)
    out = Path(args.out or cfg.output_path)
    out.mkdir(parents=True, exist_ok=True)
    write_q_csv(cfg, grid.values, out / "qfunction.csv")
    print(out / "qfunction.csv")
    return EXIT_OK


def cmd_validate(args) -> int:
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"validation_{args.suite}.json"
    report = run_validation(args.suite, path)
    for c in report.checks:
        status = "PASS" if c.passed else "FAIL"
        print(f"{status} {c.name}: residual={c.residual:.3e} tol={c.tolerance:.1e} {c.note}".rstrip())
    return EXIT_OK if report.passed else EXIT_VALIDATION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="geogate", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def loop_flags(p):
        p.add_argument("--config", help="JSON file with regime and loop parameters")
        p.add_argument("--regime", choices=["pulsed", "continuous"], default="pulsed")
        p.add_argument("--lam", type=float)
        p.add_argument("--theta", type=float)
        p.add_argument("--n-pulses", dest="n_pulses", type=int)
        p.add_argument("--k", type=float)
        p.add_argument("--phi", type=float)

    p = sub.add_parser("coeffs", help="print loop coefficients as JSON")
    loop_flags(p)
    p.set_defaults(func=cmd_coeffs)

    p = sub.add_parser("trajectory", help="write the phase-space path as CSV")
    loop_flags(p)
    p.add_argument("--samples", type=int, default=128)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_trajectory)

    for name, func, helptext in (
        ("sweep", cmd_sweep, "fidelity/purity sweep over error and N"),
        ("qfunc", cmd_qfunc, "Q-function of one sweep point"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config")
        p.add_argument("--preset", choices=PRESETS)
        p.add_argument("--out")
        p.add_argument("--threads", type=int, default=1)
        if name == "qfunc":
            p.add_argument("--error", type=float)
            p.add_argument("--n")
        p.set_defaults(func=func)

    p = sub.add_parser("validate", help="run a validation suite and write a JSON report")
    p.add_argument("suite", choices=SUITES)
    p.add_argument("--out")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
