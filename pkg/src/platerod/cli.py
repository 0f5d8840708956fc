"""Command line entry point: ``platerod <solve|study|decompose|check>``.

Exit codes: 0 success, 1 solver non-convergence (or a failed check
suite), 2 configuration error. Failures also write ``error.json`` into the
output directory (and echo it on stderr). Every run writes
``resolved_config.json`` next to its CSV outputs.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import config as cf
from ._jit import set_threads
from .errors import (BoundaryError, ConfigError, ConstraintError, DomainError, MeshError, PlateRodError)

log = logging.getLogger("platerod")

EXIT_OK, EXIT_NONCONVERGED, EXIT_CONFIG = 0, 1, 2

PLATE_HEADER = ("x1", "x2", "U1", "U2", "U3", "dU3dx1", "dU3dx2")
ROD_HEADER = ("x3", "W1", "W2", "W3", "Q3")
REPORT_HEADER = ("converged", "iterations", "grad_norm", "energy", "kappa", "kappa_prime", "theta", "eta",
                 "N_fp", "N_fr", "threads", "load_fraction", "warnings")
CHECK_HEADER = ("suite", "passed", "detail")


class RunFailure(Exception):
    def __init__(self, code, kind, errors, extra=None):
        super().__init__("; ".join(errors))
        self.code, self.kind, self.errors, self.extra = code, kind, errors, extra or {}


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(x) for x in r])


def write_json(path: Path, data):
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


# ---------------------------------------------------------------- commands


def _threads(args):
    n = args.threads
    if n is None and os.environ.get("PLATEROD_THREADS"):
        try:
            n = int(os.environ["PLATEROD_THREADS"])
        except ValueError:
            raise ConfigError(f"PLATEROD_THREADS must be an integer, got {os.environ['PLATEROD_THREADS']!r}")
    if n is not None and n < 1:
        raise ConfigError(f"thread count must be >= 1, got {n}")
    return set_threads(n)


def _build_common(cfg):
    try:
        return cf.build_geometry(cfg), cf.build_material(cfg), cf.build_forces(cfg)
    except (DomainError, BoundaryError) as exc:
        raise ConfigError(str(exc)) from None


def cmd_solve(cfg, out: Path, threads: int) -> int:
    from .discretization import build_spaces
    from .solver import SolveOptions, continuation, solve_linear
    from .assembly import Assembler

    g, lp, fd = _build_common(cfg)
    r = cf.build_regime(cfg)
    d, s = cfg["discretization"], cfg["solver"]
    try:
        dm = build_spaces(g, (d["n1"], d["n2"], d["n_r"]))
    except (MeshError, BoundaryError) as exc:
        raise ConfigError(str(exc)) from None
    opts = SolveOptions(tol=s["tol"], max_iter=s["max_iter"], advisory_threshold=s["advisory_threshold"],
                        threads=threads)
    method = s["method"]
    if method == "linear" and not r.quadratic:
        raise ConfigError("solver.method = \"linear\" needs kappa > 3 and kappa_prime > 3")
    if method == "linear" or (method == "auto" and r.quadratic):
        A = Assembler(dm, lp, fd, r, d["plate_order"], d["rod_order"])
        state, rep = solve_linear(dm, lp, fd, r, opts, assembler=A)
    else:
        state, rep = continuation(dm, lp, fd, r, s["continuation_steps"], opts)
    tri = state.triple()
    m1, m2 = cfg["output"]["plate_samples"]
    X1, X2 = np.meshgrid(np.linspace(*g.x1_range, m1), np.linspace(*g.x2_range, m2), indexing="ij")
    X1, X2 = X1.ravel(), X2.ravel()
    p = tri.plate
    cols = [X1, X2] + [p.eval(i, 0, 0, X1, X2) for i in range(3)] + [p.eval(2, 1, 0, X1, X2), p.eval(2, 0, 1, X1, X2)]
    write_csv(out / "plate_fields.csv", PLATE_HEADER, zip(*cols))
    z = np.linspace(0.0, g.L, cfg["output"]["rod_samples"])
    write_csv(out / "rod_fields.csv", ROD_HEADER, zip(z, *tri.rod.values(z)))
    row = rep.as_row()
    write_csv(out / "solve_report.csv", REPORT_HEADER, [[row[k] for k in REPORT_HEADER]])
    for w in rep.warnings:
        log.warning(w)
    if not rep.converged:
        raise RunFailure(EXIT_NONCONVERGED, "NonConvergence", rep.warnings or ["solver did not converge"],
                         {"iterations": rep.iterations, "grad_norm": rep.grad_norm,
                          "load_fraction": rep.load_fraction})
    print(f"solve: converged in {rep.iterations} iteration(s), J3 = {rep.energy:.10g}")
    return EXIT_OK


def cmd_study(cfg, out: Path, threads: int) -> int:
    from . import bridge3d as b

    g, lp, fd = _build_common(cfg)
    tri = cf.build_triple(cfg)
    reg, st = cfg["regime"], cfg["study"]
    quad = b.BridgeQuad(st["plate_cells"], st["plate_order"], st["thickness_order"], st["rod_cells"],
                        st["rod_order"], st["disc_radial"], st["disc_angular"])
    try:
        res = b.convergence_study(tri, lp, fd, reg["kappa"], reg["kappa_prime"], st["deltas"], st["n"], g,
                                  quad, workers=st["workers"])
    except ConstraintError as exc:
        raise ConfigError(f"triple: {exc}") from None
    b.write_study_csv(res.rows, out / "study.csv")
    b.write_gap_plot_csv(res.rows, out / "study_plot.csv")
    for w in res.warnings:
        print(f"warning: {w}", file=sys.stderr)
    print("delta          gap            gsv_plate_err  gsv_rod_err")
    for r in res.rows:
        print(f"{r.delta:<14.6g} {r.gap:<14.6g} {r.gsv_plate_l2_error:<14.6g} {r.gsv_rod_l2_error:.6g}")
    return EXIT_OK


def cmd_decompose(cfg, out: Path, threads: int) -> int:
    from .decomposition import korn_report, write_korn_csv
    from .displacement import ExpressionDisplacement

    g, _, _ = _build_common(cfg)
    r = cf.build_regime(cfg)
    dc = cfg["decompose"]
    if dc["u"] is None or isinstance(dc["u"], str):
        raise ConfigError("decompose.u: a list of three displacement expressions is required")
    u = ExpressionDisplacement(*[str(x) for x in dc["u"]])
    rows = korn_report(u, r, g, plate_cells=dc["plate_cells"], order=dc["order"],
                       tilde_resolution=tuple(dc["tilde_resolution"]))
    write_korn_csv(rows, out / "korn_report.csv")
    for row in rows:
        print(f"{row.inequality_id:<32} ratio {row.ratio:.6g}")
    return EXIT_OK


def cmd_check(cfg, out: Path, threads: int) -> int:
    from .checks import format_table, run_checks

    results = run_checks(cfg)
    write_csv(out / "check.csv", CHECK_HEADER, [(r.name, int(r.passed), r.detail) for r in results])
    print(format_table(results))
    failed = [r.name for r in results if not r.passed]
    if failed:
        raise RunFailure(EXIT_NONCONVERGED, "CheckFailed", [f"suite {n} failed" for n in failed])
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "study": cmd_study, "decompose": cmd_decompose, "check": cmd_check}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="platerod", description="Plate-rod junction limit model toolkit.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", required=True, help="TOML run configuration")
    p.add_argument("--threads", type=int, default=None, help="worker threads (overrides PLATEROD_THREADS)")
    p.add_argument("--out", default=None, help="output directory (overrides output.directory)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _error_record(command, code, kind, errors, extra=None):
    rec = {"status": "error", "command": command, "exit_code": code, "kind": kind, "errors": list(errors)}
    if extra:
        rec.update(extra)
    return rec


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    out = Path(args.out) if args.out else None
    cfg = None
    try:
        cfg = cf.parse_config(args.config)
        out = out or Path(cfg["output"]["directory"])
        out.mkdir(parents=True, exist_ok=True)
        threads = _threads(args)
        resolved = cfg.resolved()
        resolved["run"] = {"command": args.command, "threads": threads}
        write_json(out / "resolved_config.json", resolved)
        err = out / "error.json"
        if err.exists():
            err.unlink()
        return COMMANDS[args.command](cfg, out, threads)
    except ConfigError as exc:
        rec = _error_record(args.command, EXIT_CONFIG, "ConfigError", exc.errors)
    except RunFailure as exc:
        rec = _error_record(args.command, exc.code, exc.kind, exc.errors, exc.extra)
    except (PlateRodError, ArithmeticError) as exc:
        rec = _error_record(args.command, EXIT_NONCONVERGED, type(exc).__name__, [str(exc)])
    if out is None:
        out = Path("out")
    try:
        out.mkdir(parents=True, exist_ok=True)
        write_json(out / "error.json", rec)
    except OSError:
        pass
    print(json.dumps(rec, sort_keys=True), file=sys.stderr)
    return rec["exit_code"]


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
