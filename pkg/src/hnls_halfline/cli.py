"""Command line entry point: solvers, verification reports and contour export.

Exit codes: 0 success, 2 a verification threshold failed, 3 numerical
non-convergence, 4 invalid configuration.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
import warnings
from pathlib import Path

EXIT_OK, EXIT_CHECK_FAILED, EXIT_NO_CONVERGENCE, EXIT_CONFIG = 0, 2, 3, 4

SUBCOMMANDS = (
    "solve-linear",
    "solve-nonlinear",
    "verify-spectral",
    "verify-ibvp",
    "verify-dispersion",
    "convergence",
    "emit-contour",
)

_THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hnls-halfline", description=__doc__.splitlines()[0])
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--config", default=None, help="JSON configuration (defaults apply to missing keys)")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--threads", type=int, default=None, help="BLAS/FFT threads (default: all cores)")
    parser.add_argument("--seed", type=int, default=None, help="64-bit seed overriding the configuration")
    return parser


def _write_report(path: Path, checks) -> bool:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["check", "value", "threshold", "status"])
        for c in checks:
            writer.writerow(c.row())
    return all(c.passed for c in checks)


def _write_terminal(path: Path, u) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["x", "t", "re", "im"])
        t_end = u.t[-1]
        for xi, v in zip(u.x, u.values[-1]):
            writer.writerow([f"{xi:.17g}", f"{t_end:.17g}", f"{v.real:.17g}", f"{v.imag:.17g}"])


def _write_json(path: Path, data) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True, default=float) + "\n")


def _solve(run, out: Path, nonlinear: bool) -> int:
    from .cauchy import write_field_binary
    from .nonlinear import linear_solution, picard_solve

    u0, g = run.scenario.sample(run.solver)
    start = time.perf_counter()
    if nonlinear:
        u, diag = picard_solve(u0, g, run.solver, run.params, run.s)
        (out / "diagnostics.json").write_text(diag.to_json() + "\n")
    else:
        u = linear_solution(u0, g, run.solver, run.params, run.s)
    write_field_binary(u, out / "solution.bin")
    _write_terminal(out / "terminal.csv", u)
    _write_json(
        out / "summary.json",
        {
            "subcommand": "solve-nonlinear" if nonlinear else "solve-linear",
            "seconds": time.perf_counter() - start,
            "boundary_mismatch": float(abs(u.values[:, 0] - g.values).max()),
            "initial_mismatch": float(abs(u.values[0] - u0.values).max()),
        },
    )
    return EXIT_OK


def _convergence(run, out: Path) -> int:
    import numpy as np

    from .reference import convergence_study, fd_solve

    base = run.solver
    levels = [1, 2, 4]

    def solve(level):
        cfg = base.replace(Nx=level * (base.Nx - 1) + 1, Nt=level * (base.Nt - 1) + 1)
        u0, g = run.scenario.sample(cfg)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            u = fd_solve(u0, g, cfg, run.params, nonlinear=run.params.kappa != 0)
        return cfg.dx, cfg.x, u.values[-1]

    rows = convergence_study(solve, levels, norm_region=(0.0, 0.85 * base.L))
    with open(out / "convergence.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["h", "error", "order"])
        for h, err, order in rows:
            writer.writerow([f"{h:.6e}", f"{err:.6e}", "" if np.isnan(order) else f"{order:.4f}"])
    orders = [r[2] for r in rows[1:] if not np.isnan(r[2])]
    return EXIT_OK if orders and min(orders) >= 1.8 else EXIT_CHECK_FAILED


def _emit_contour(run, out: Path) -> int:
    from .contours import write_contour_csv
    from .nonlinear import SolutionOperator

    u0, g = run.scenario.sample(run.solver)
    op = SolutionOperator(u0, g, run.solver, run.params.with_kappa(0.0), run.s)
    write_contour_csv(op.contour, run.params, out / "contour.csv")
    meta = {k: v for k, v in op.contour.meta.items()}
    meta.update(lam=op.contour.lam, c_minus=op.contour.c_minus, c_plus=op.contour.c_plus, M=op.contour.truncation_M)
    _write_json(out / "contour_meta.json", meta)
    return EXIT_OK


def run(subcommand: str, config_path=None, flags: dict | None = None) -> int:
    """Execute one subcommand; returns the process exit code."""
    flags = flags or {}
    if flags.get("threads"):
        for var in _THREAD_VARS:
            os.environ[var] = str(flags["threads"])
    from .config import load_config
    from .errors import ConfigError, IncompatibleData, InnerSolveDiverged, NoContraction, RegularityGate

    try:
        cfg = load_config(config_path)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if flags.get("seed") is not None:
        if not 0 <= flags["seed"] < 2**64:
            print("configuration error: seed must be an unsigned 64-bit integer", file=sys.stderr)
            return EXIT_CONFIG
        cfg.seed = int(flags["seed"])
    out = Path(flags.get("out") or "out")
    out.mkdir(parents=True, exist_ok=True)

    import numpy as np

    from . import verify

    rng = np.random.default_rng(cfg.seed)
    try:
        if subcommand == "solve-linear":
            return _solve(cfg, out, nonlinear=False)
        if subcommand == "solve-nonlinear":
            return _solve(cfg, out, nonlinear=True)
        if subcommand == "verify-spectral":
            checks = []
            for label, params in verify.case_representatives(cfg.params).items():
                checks += verify.spectral_checks(params, rng, label=label)
            ok = _write_report(out / "verify_spectral.csv", checks)
        elif subcommand == "verify-ibvp":
            ok = _write_report(out / "verify_ibvp.csv", verify.ibvp_checks(cfg.params, rng, cfg.solver.T))
        elif subcommand == "verify-dispersion":
            ok = _write_report(out / "verify_dispersion.csv", verify.dispersion_checks(cfg.params, rng))
        elif subcommand == "convergence":
            return _convergence(cfg, out)
        elif subcommand == "emit-contour":
            return _emit_contour(cfg, out)
        else:
            print(f"unknown subcommand {subcommand!r}", file=sys.stderr)
            return EXIT_CONFIG
    except (NoContraction, InnerSolveDiverged) as exc:
        print(f"no convergence: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    except (IncompatibleData, RegularityGate) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    flags = {"out": args.out, "threads": args.threads, "seed": args.seed}
    return run(args.subcommand, args.config, flags)


if __name__ == "__main__":
    sys.exit(main())
