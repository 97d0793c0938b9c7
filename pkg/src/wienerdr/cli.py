"""Command-line front end: curve sweeps, eigenvalue tables, ratio sweeps and
Monte-Carlo runs, emitted as deterministic CSV.

Exit codes: 0 success, 2 invalid arguments, 3 numerical failure.  Output
files are written to a temporary file and renamed on success, so a failing
run never leaves a partial CSV behind; a JSON manifest (flags, versions,
seed) is written next to each output.
"""

from __future__ import annotations

import argparse
import json
import os
import platform
import sys
import tempfile

import numpy as np
import scipy

from . import __version__, drf, mc
from .quadrature import QuadratureError
from .spectral import (NumericalDegeneracyError, ProcessParams,
                       discrete_wiener_eigensystem, interp_kernel_eigensystem,
                       s_bar, s_tilde_density)
from .waterfill import BracketExpansionError

_NUMERICAL_ERRORS = (QuadratureError, NumericalDegeneracyError,
                     BracketExpansionError)


def _fmt(value: float) -> str:
    return format(float(value), ".15g")


def _write_csv_atomic(path: str, header, rows) -> None:
    """Write rows atomically; on any error the target path is untouched."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".wienerdr-", dir=directory)
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(_fmt(v) for v in row) + "\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_manifest(path: str, command: str, args: argparse.Namespace) -> None:
    flags = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    manifest = {
        "command": command,
        "flags": flags,
        "seed": flags.get("seed"),
        "versions": {
            "wienerdr": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
    }
    with open(path + ".manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _sweep(args) -> np.ndarray:
    if args.points < 2:
        raise ValueError("--points must be >= 2")
    if not (args.min > 0 and args.max > args.min):
        raise ValueError("need 0 < --min < --max")
    if args.log:
        return np.logspace(np.log10(args.min), np.log10(args.max), args.points)
    return np.linspace(args.min, args.max, args.points)


def _validate_rbar_range(rbars) -> None:
    low = np.min(rbars)
    if low < drf.MIN_RBAR:
        raise ValueError(
            f"sweep reaches {low:.3g} bits per sample, below the supported"
            f" minimum {drf.MIN_RBAR}")


def _cmd_curve(args) -> int:
    grid = _sweep(args)
    if args.rate is None:
        rbars = grid / args.fs       # sweep R at fixed fs
    else:
        rbars = args.rate / grid     # sweep fs at fixed R
    _validate_rbar_range(rbars)

    header = ["x", "d_opt", "d_ce", "d_upper", "d_w", "d_bar", "mmse",
              "theta_opt", "theta_ce"]
    rows = []
    for x in grid:
        if args.rate is None:
            p, r = ProcessParams(sigma2=args.sigma2, fs=args.fs), drf.RateSpec(x)
        else:
            p, r = ProcessParams(sigma2=args.sigma2, fs=x), drf.RateSpec(args.rate)
        b = drf.bundle(p, r)
        scale = p.fs / p.sigma2 if args.normalized else 1.0
        rows.append([x, b.d_opt * scale, b.d_ce * scale, b.d_upper * scale,
                     b.d_w * scale, b.d_bar * scale, b.mmse * scale,
                     b.theta_opt, b.theta_ce])
    _write_csv_atomic(args.out, header, rows)
    _write_manifest(args.out, "curve", args)
    return 0


def _cmd_ratio(args) -> int:
    rbars = _sweep(args)
    _validate_rbar_range(rbars)
    header = ["rbar", "ratio_smp", "ratio_qnt", "ce_penalty", "d_tilde"]
    rows = [[r, drf.ratio_smp(r), drf.ratio_qnt(r), drf.ce_penalty(r),
             drf.d_tilde(r)] for r in rbars]
    _write_csv_atomic(args.out, header, rows)
    _write_manifest(args.out, "ratio", args)
    return 0


def _cmd_eigen(args) -> int:
    if args.n < 1:
        raise ValueError("--n must be >= 1")
    params = ProcessParams(sigma2=args.sigma2, fs=args.fs)
    if args.kind == "discrete":
        system = discrete_wiener_eigensystem(params, args.n)
        limit_scale = params.sigma2 / params.fs
        limit = lambda phi: limit_scale * s_bar(phi)
    else:
        system = interp_kernel_eigensystem(params, args.n)
        limit_scale = params.sigma2 * params.ts ** 2
        limit = lambda phi: limit_scale * s_tilde_density(phi)
    header = ["k", "lambda", "density_limit"]
    rows = [[k, system.eigenvalues[k - 1], limit((k - 0.5) / args.n)]
            for k in range(1, args.n + 1)]
    _write_csv_atomic(args.out, header, rows)
    _write_manifest(args.out, "eigen", args)
    return 0


def _cmd_simulate(args) -> int:
    params = ProcessParams(sigma2=args.sigma2, fs=args.fs)
    config = mc.SimConfig(horizon_t=args.horizon, oversample=args.oversample,
                          trials=args.trials, seed=args.seed)
    if args.scheme == "mmse-only":
        result = mc.empirical_mmse(params, config)
    else:
        if args.rbar is None:
            raise ValueError("--rbar is required for the test-channel scheme")
        result = mc.mc_test_channel_run(params, config, args.rbar)
    header = ["trial", "distortion"]
    rows = [[t, v] for t, v in enumerate(result.per_trial)]
    _write_csv_atomic(args.out, header, rows)
    _write_manifest(args.out, "simulate", args)
    print(f"estimate={_fmt(result.estimate)} stderr={_fmt(result.stderr)} "
          f"reference={_fmt(result.reference)} z={_fmt(result.z_score)}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wienerdr",
        description="Distortion-rate curves of the uniformly sampled Wiener process")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--sigma2", type=float, default=1.0)
        p.add_argument("--fs", type=float, default=1.0)
        p.add_argument("--out", required=True)

    p_curve = sub.add_parser("curve", help="sweep the distortion curves")
    common(p_curve)
    p_curve.add_argument("--rate", type=float, default=None,
                         help="fix R and sweep fs (omit to sweep R at fixed --fs)")
    p_curve.add_argument("--min", type=float, required=True)
    p_curve.add_argument("--max", type=float, required=True)
    p_curve.add_argument("--points", type=int, required=True)
    p_curve.add_argument("--log", action="store_true")
    p_curve.add_argument("--normalized", action="store_true",
                         help="report distortions in units of sigma2/fs")
    p_curve.set_defaults(func=_cmd_curve)

    p_ratio = sub.add_parser("ratio", help="sweep the excess-distortion ratios")
    p_ratio.add_argument("--min", type=float, required=True)
    p_ratio.add_argument("--max", type=float, required=True)
    p_ratio.add_argument("--points", type=int, required=True)
    p_ratio.add_argument("--log", action="store_true")
    p_ratio.add_argument("--out", required=True)
    p_ratio.set_defaults(func=_cmd_ratio)

    p_eigen = sub.add_parser("eigen", help="tabulate an eigenvalue staircase")
    common(p_eigen)
    p_eigen.add_argument("--kind", choices=["discrete", "interp"], required=True)
    p_eigen.add_argument("--n", type=int, required=True)
    p_eigen.set_defaults(func=_cmd_eigen)

    p_sim = sub.add_parser("simulate", help="run a Monte-Carlo experiment")
    common(p_sim)
    p_sim.add_argument("--scheme", choices=["mmse-only", "test-channel"],
                       required=True)
    p_sim.add_argument("--horizon", type=float, required=True)
    p_sim.add_argument("--oversample", type=int, default=32)
    p_sim.add_argument("--trials", type=int, required=True)
    p_sim.add_argument("--seed", type=int, required=True)
    p_sim.add_argument("--rbar", type=float, default=None)
    p_sim.set_defaults(func=_cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        _precheck(args)
    except (ValueError, OverflowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (ValueError, OverflowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except _NUMERICAL_ERRORS as exc:
        op = getattr(args, "command", "computation")
        print(f"numerical failure in {op}: {exc}", file=sys.stderr)
        return 3


def _precheck(args) -> None:
    """Validate every numeric flag before any computation starts."""
    for name in ("sigma2", "fs", "horizon", "rate", "rbar", "min", "max"):
        value = getattr(args, name, None)
        if value is not None and not value > 0:
            raise ValueError(f"--{name} must be > 0")
    for name in ("points", "n", "oversample", "trials"):
        value = getattr(args, name, None)
        if value is not None and value < 1:
            raise ValueError(f"--{name} must be a positive integer")
    seed = getattr(args, "seed", None)
    if seed is not None and not 0 <= seed < 2 ** 64:
        raise ValueError("--seed must fit in 64 bits")


if __name__ == "__main__":
    sys.exit(main())
