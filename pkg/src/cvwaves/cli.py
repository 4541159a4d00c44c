"""Command-line front end.

Subcommands write flat files into ``--out``:

* ``bifurcation-points``: table of laminar bifurcation values.
* ``continue``: branch CSV plus JSON snapshots (restartable with ``--snapshot``).
* ``flowfield``: node dump and critical-set records for a snapshot.
* ``laminar``: critical-point criterion for the bifurcating laminar flow plus its snapshot.
* ``check``: diagnostic suite; exit 0 iff every check passes.

Exit codes: 0 success, 1 invalid input, 2 numerical failure or failed check.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import checks, continuation, flowfield, governing, serialize
from .continuation import NodalReport

log = logging.getLogger("cvwaves")

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 1, 2

BRANCH_COLUMNS = (
    "s", "lambda", "mu", "m", "Q", "amplitude", "min_Q_minus_2gv", "self_intersection_margin", "det_sign",
    *NodalReport.FLAGS, "newton_iters", "res_F1", "res_F2",
)
BIF_COLUMNS = ("n", "sign", "lambda_star", "m_star", "Q_star", "dispersion_residual")
CRIT_COLUMNS = ("kind", "location", "X", "Y")


class UsageError(ValueError):
    pass


def _parse_grid(text: str | None):
    if text is None:
        return 256, 129
    try:
        nx, ny = (int(t) for t in text.split(","))
    except ValueError as exc:
        raise UsageError(f"--grid expects NX,NY, got {text!r}") from exc
    if nx < 4 or ny < 3:
        raise UsageError(f"--grid needs NX >= 4 and NY >= 3, got {text!r}")
    return nx, ny


def _outdir(args, cfg) -> Path:
    out = Path(args.out or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_bifurcation_points(args, cfg) -> int:
    params = cfg.physical
    rows = [
        (bp.n, bp.sign, bp.lambda_star, bp.m_star, bp.Q_star, governing.dispersion_residual(params, bp.lambda_star, bp.n))
        for bp in governing.bifurcation_points(params, cfg.n_max)
    ]
    path = serialize.write_table(_outdir(args, cfg) / "bifurcation_points.csv", BIF_COLUMNS, rows)
    for r in rows:
        print(f"n={r[0]} {r[1]} lambda*={r[2]:.10f} m*={r[3]:.10f} Q*={r[4]:.10f}")
    print(f"wrote {path}")
    return EXIT_OK


def branch_rows(record) -> list:
    rows = []
    for p, mon, det in zip(record.points, record.monitors, record.det_signs):
        amp = float(p.w(0.0) - p.w(np.pi)) / 2.0
        rows.append((
            p.s, p.lam, p.mu, p.m, p.Q, amp, mon.min_Q_minus_2gv, mon.self_intersection_margin, det,
            *(getattr(mon, f) for f in NodalReport.FLAGS), p.newton_iters, *p.residual_norms,
        ))
    return rows


def cmd_continue(args, cfg) -> int:
    params, bcfg = cfg.physical, cfg.branch
    resume, offset = None, 0
    if args.snapshot:
        snap = serialize.read_snapshot(args.snapshot)
        if snap["state"] is None:
            raise UsageError(f"snapshot {args.snapshot} has no continuation state")
        params = snap["params"]
        bcfg = snap["config"] or bcfg
        resume = snap["state"]
        offset = snap["index"] + 1
    record = continuation.continue_branch(params, bcfg, resume=resume)
    out = _outdir(args, cfg)
    tag = f"n{bcfg.n}{'p' if bcfg.sign == '+' else 'm'}"
    footer = {"termination": record.termination, "points": len(record.points), "first_index": offset}
    if "branch_csv" in cfg.emit:
        path = serialize.write_table(out / f"branch_{tag}.csv", BRANCH_COLUMNS, branch_rows(record), footer)
        print(f"wrote {path}")
    if "solutions" in cfg.emit:
        last = len(record.points) - 1
        for i, (p, st) in enumerate(zip(record.points, record.states)):
            idx = offset + i
            if idx % cfg.snapshot_every == 0 or i == last:
                serialize.write_snapshot(out / f"snapshot_{tag}_{idx:05d}.json", params, p, bcfg, record.bifurcation, st, idx)
    print(f"termination={record.termination} points={len(record.points)}")
    return EXIT_NUMERIC if record.termination == "newton_failure" else EXIT_OK


def _write_critical(path, cs):
    return serialize.write_table(path, CRIT_COLUMNS, cs.records())


def cmd_flowfield(args, cfg) -> int:
    if not args.snapshot:
        raise UsageError("flowfield needs --snapshot")
    snap = serialize.read_snapshot(args.snapshot)
    nx, ny = _parse_grid(args.grid)
    params, point = snap["params"], snap["point"]
    fl = flowfield.build_flowfield(params, point, nx, ny)
    out = _outdir(args, cfg)
    cols = fl.columns()
    rows = zip(*(cols[c] for c in flowfield.FIELD_COLUMNS))
    p1 = serialize.write_table(out / "fields.csv", flowfield.FIELD_COLUMNS, rows)
    cs = flowfield.critical_set(fl, params)
    p2 = _write_critical(out / "critical_set.csv", cs)
    print(f"wrote {p1}\nwrote {p2}")
    if "diagnostics" in cfg.emit and point.w.sup_norm_coeffs() > 0:
        diag = {
            "cauchy_riemann": flowfield.cauchy_riemann_residual(fl),
            "flux": flowfield.flux_residual(fl),
            "surface_bernoulli": flowfield.surface_bernoulli_residual(fl),
        }
        for k, v in diag.items():
            print(f"{k}={v:.3e}")
    return EXIT_OK


def cmd_laminar(args, cfg) -> int:
    params, bcfg = cfg.physical, cfg.branch
    res = flowfield.laminar_critical_criterion(params, bcfg.n, bcfg.sign)
    lam = cfg.laminar_lambda if cfg.laminar_lambda is not None else res.lambda_star
    flow = flowfield.LaminarFlow(params, lam)
    line = flow.critical_line()
    out = _outdir(args, cfg)
    cols = ("n", "sign", "lambda", "m", "criterion", "margin", "range_test", "critical_line_Y")
    row = (bcfg.n, bcfg.sign, lam, flow.m, res.holds, res.margin, res.range_holds, line)
    p1 = serialize.write_table(out / "laminar.csv", cols, [row])
    p2 = serialize.write_snapshot(out / "laminar_snapshot.json", params, flow.point())
    print(f"criterion={res.holds} margin={res.margin:.6g} range_test={res.range_holds} critical_line={line}")
    print(f"wrote {p1}\nwrote {p2}")
    return EXIT_OK


def cmd_check(args, cfg) -> int:
    results = checks.run_checks(seed=args.seed, params=cfg.physical.with_(N=min(cfg.physical.N, 16)))
    for r in results:
        print(r.line())
    ok = all(r.passed for r in results)
    print("ALL PASS" if ok else "SOME CHECKS FAILED")
    return EXIT_OK if ok else EXIT_NUMERIC


COMMANDS = {
    "bifurcation-points": cmd_bifurcation_points,
    "continue": cmd_continue,
    "flowfield": cmd_flowfield,
    "laminar": cmd_laminar,
    "check": cmd_check,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cvwaves", description="Periodic water waves with constant vorticity.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="INI run configuration")
        sp.add_argument("--out", help="output directory (overrides [output] dir)")
        sp.add_argument("--snapshot", help="JSON snapshot to resume from or to reconstruct")
        sp.add_argument("--grid", help="flow-field grid NX,NY (default 256,129)")
        sp.add_argument("--seed", type=int, default=0, help="seed for randomized checks")
        sp.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.seed < 0:
        print("error: --seed must be non-negative", file=sys.stderr)
        return EXIT_INVALID
    try:
        cfg = serialize.load_config(args.config)
        return COMMANDS[args.command](args, cfg)
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (continuation.ContinuationError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
