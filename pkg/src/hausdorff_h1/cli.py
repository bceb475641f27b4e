"""Command line entry point: ``hausdorff-h1 <command>`` or ``python -m hausdorff_h1``.

Exit codes: 0 success, 1 a check failed, 2 bad configuration or input.
"""
import argparse
import csv
import sys

import numpy as np

from . import __version__, harness
from .errors import ConfigError


def _read_points(path):
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for i, row in enumerate(csv.reader(fh)):
            if not row or row[0].lstrip().startswith("#"):
                continue
            try:
                rows.append([float(v) for v in row])
            except ValueError:
                if i == 0 and not rows:  # header line
                    continue
                raise ConfigError(f"{path}: non-numeric row {i + 1}: {row}")
    if not rows:
        raise ConfigError(f"{path}: no points")
    if len({len(r) for r in rows}) != 1:
        raise ConfigError(f"{path}: rows have different lengths")
    return np.array(rows)


def cmd_verify(args):
    cfg = harness.ExperimentConfig.load(args.config)
    if args.seed is not None:
        cfg = harness.ExperimentConfig.from_dict({**cfg.to_dict(), "seed": args.seed})
    report = harness.run(cfg)
    text = harness.emit(report, "json", args.out, include_timing=args.timing)
    if args.out is None:
        sys.stdout.write(text)
    s = report.summary()
    print(f"pass {s['pass']}  fail {s['fail']}  skip {s['skip']}", file=sys.stderr)
    for r in report.failed:
        print(f"FAILED {r.name}: lhs={r.lhs} rhs={r.rhs} ({r.relation}, tol {r.tolerance})", file=sys.stderr)
    return 0 if report.ok else 1


def cmd_bound(args):
    b = harness.bound_report(harness.ExperimentConfig.load(args.config))
    sys.stdout.write(harness.canonical_json(b.to_dict()) + "\n")
    return 0


def cmd_apply(args):
    cfg = harness.ExperimentConfig.load(args.config)
    pts = _read_points(args.points)
    if pts.shape[1] != cfg.group.coord_dim:
        raise ConfigError(f"{args.points}: expected {cfg.group.coord_dim} coordinates per row")
    vals = harness.apply_operator(cfg, pts)
    cols = [f"x{i + 1}" for i in range(pts.shape[1])] + ["value"]
    try:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(cols)
            for p, v in zip(pts, vals):
                w.writerow(["%.12e" % c for c in p] + ["%.12e" % v])
    except OSError as e:
        raise OSError(f"cannot write {args.out}: {e.strerror or e}") from e
    return 0


def cmd_sweep(args):
    rows, text = harness.sweep(harness.load_config_dir(args.dir), args.out)
    if args.out is None:
        sys.stdout.write(text)
    return 0 if all(r["verdict"] == "pass" for r in rows) else 1


def cmd_acceptance(args):
    return harness.acceptance(args.seed).exit_code


def build_parser():
    p = argparse.ArgumentParser(prog="hausdorff-h1", description="Hausdorff operators on H^1 of groups")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run the configured check suites")
    v.add_argument("--config", required=True)
    v.add_argument("--seed", type=int)
    v.add_argument("--out", help="write the JSON report here instead of stdout")
    v.add_argument("--timing", action="store_true", help="include runtime_ms (breaks byte-identity)")
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("bound", help="print kernel norms and the operator-norm bound")
    b.add_argument("--config", required=True)
    b.set_defaults(func=cmd_bound)

    a = sub.add_parser("apply", help="evaluate the operator on the configured function")
    a.add_argument("--config", required=True)
    a.add_argument("--points", required=True, help="CSV, one point per row")
    a.add_argument("--out", required=True)
    a.set_defaults(func=cmd_apply)

    s = sub.add_parser("sweep", help="norms, bounds and L1 check for every config in a directory")
    s.add_argument("--dir", required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_sweep)

    c = sub.add_parser("acceptance", help="run the acceptance criteria")
    c.add_argument("--seed", type=int, default=0)
    c.set_defaults(func=cmd_acceptance)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
