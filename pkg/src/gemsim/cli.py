"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 I/O error.  The output directory of any scenario can be overridden
with the GEMSIM_OUTPUT_DIR environment variable.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np
from scipy.constants import physical_constants

from .core import ConfigError, GemsimError, NumericalInstabilityError, TransverseGrid
from .modes import ModeIndex, hermite_gauss
from .pgmio import write_pgm
from .scenarios import parse_config_file, run_scenario, sweep
from .scenarios import fit_exponential_decay
from .transport import (
    KernelResolutionError,
    infer_diffusion_coefficient,
    kinetic_diffusion_coefficient,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

RB87_MASS_KG = 86.909180527 * physical_constants["atomic mass constant"][0]


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="gemsim",
        description="Gradient echo memory simulator: scenarios, sweeps and fits.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run a scenario config file")
    p_sim.add_argument("config", help="path to a dotted-key config file")

    p_sweep = sub.add_parser("sweep", help="run a scenario once per parameter value")
    p_sweep.add_argument("config")
    p_sweep.add_argument("--param", required=True, help="dotted parameter path")
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated list of values")

    p_modes = sub.add_parser("modes", help="render a Hermite-Gauss mode to PGM")
    p_modes.add_argument("--render", required=True, metavar="M,N",
                         help="mode orders, e.g. 2,0")
    p_modes.add_argument("--waist", required=True, type=float, metavar="MM",
                         help="waist in millimetres")
    p_modes.add_argument("--grid-n", type=int, default=256)
    p_modes.add_argument("--out", default=None, help="output PGM path")

    p_fit = sub.add_parser("fit", help="fit a decay or expansion model to CSV data")
    p_fit.add_argument("--csv", required=True,
                       help="two-column CSV: t, value (header and '#' lines skipped)")
    p_fit.add_argument("--model", required=True, choices=("exp", "linear"))

    p_est = sub.add_parser("estimate-d", help="kinetic-theory diffusion estimate")
    p_est.add_argument("--temp-K", required=True, type=float)
    p_est.add_argument("--buffer-torr", required=True, type=float)
    p_est.add_argument("--rate-MHz-per-torr", required=True, type=float)
    p_est.add_argument("--mass-kg", type=float, default=RB87_MASS_KG,
                       help="atomic mass (default: 87Rb)")
    return parser


def _load_xy_csv(path):
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(",")
            try:
                rows.append((float(parts[0]), float(parts[1])))
            except (ValueError, IndexError):
                continue  # header row or malformed line
    if len(rows) < 3:
        raise ConfigError(f"{path}: need at least 3 numeric (t, value) rows")
    return rows


def _cmd_simulate(args):
    config = parse_config_file(args.config)
    result = run_scenario(config)
    print(f"scenario {result.scenario}: {len(result.rows)} rows -> {result.csv_path}")
    return EXIT_OK


def _cmd_sweep(args):
    config = parse_config_file(args.config)
    raw_values = [tok for tok in args.values.split(",") if tok.strip()]
    values = []
    for tok in raw_values:
        low = tok.strip().lower()
        if low in ("true", "false"):
            values.append(low == "true")
        else:
            try:
                values.append(float(tok))
            except ValueError:
                raise ConfigError(f"cannot parse sweep value {tok!r}") from None
    results, merged = sweep(config, args.param, values)
    print(f"sweep {args.param}: {len(results)} runs, {len(merged)} rows")
    return EXIT_OK


def _cmd_modes(args):
    try:
        m_str, n_str = args.render.split(",")
        idx = ModeIndex(int(m_str), int(n_str))
    except (ValueError, GemsimError) as exc:
        raise ConfigError(f"bad --render value {args.render!r}: {exc}") from exc
    waist = args.waist * 1e-3
    extent = 10.0 * waist * np.sqrt(max(idx.m, idx.n) + 1.0)
    grid = TransverseGrid(args.grid_n, args.grid_n,
                          extent / args.grid_n, extent / args.grid_n)
    mode = hermite_gauss(idx, waist, grid)
    out = args.out or f"tem{idx.m}{idx.n}.pgm"
    write_pgm(out, mode.intensity)
    print(f"TEM-{idx.m}{idx.n} waist {args.waist} mm -> {out}")
    return EXIT_OK


def _cmd_fit(args):
    rows = _load_xy_csv(args.csv)
    if args.model == "exp":
        amp, tau, residuals = fit_exponential_decay(rows)
        print(f"A = {amp:.6e}")
        print(f"tau = {tau:.6e}")
        print(f"log-residual rms = {float(np.sqrt(np.mean(residuals**2))):.3e}")
    else:
        slope, intercept, diag = infer_diffusion_coefficient(rows)
        print(f"slope = {slope:.6e}")
        print(f"intercept = {intercept:.6e}")
        print(f"residual rms = {diag['rms_residual']:.3e}")
    return EXIT_OK


def _cmd_estimate_d(args):
    collision_rate = args.rate_MHz_per_torr * 1e6 * args.buffer_torr
    d_si = kinetic_diffusion_coefficient(args.temp_K, args.mass_kg, collision_rate)
    print(f"D = {d_si:.6e} m^2/s = {d_si * 1e4:.3f} cm^2/s")
    return EXIT_OK


_COMMANDS = {
    "simulate": _cmd_simulate,
    "sweep": _cmd_sweep,
    "modes": _cmd_modes,
    "fit": _cmd_fit,
    "estimate-d": _cmd_estimate_d,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalInstabilityError, KernelResolutionError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except GemsimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
