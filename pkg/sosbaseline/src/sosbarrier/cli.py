"""Command line for the SoS baseline: synthesis, comparison, degree study."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .compare import compare_csv, load_records
from .lagrange import lagrange_demo
from .program import SosError, sos_problem_from_file, solve_sos


def cmd_synth(args) -> int:
    spec = sos_problem_from_file(args.problem, m=args.m,
                                 m_lambda=args.m_lambda,
                                 horizon=args.horizon)
    try:
        cert = solve_sos(spec, solver=args.solver)
    except SosError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.out:
        cert.save(args.out)
        run_path = str(args.out).replace(".json", "") + ".run.json"
        with open(run_path, "w") as fh:
            json.dump({"delta_s": cert.delta_s, "eta": cert.eta,
                       "gamma": cert.gamma, "meta": cert.meta}, fh, indent=2)
    print(json.dumps({"problem": cert.meta["problem"], "m": cert.m,
                      "m_lambda": cert.meta["m_lambda"],
                      "eta": cert.eta, "gamma": cert.gamma,
                      "delta_s": cert.delta_s,
                      "wall_time_s": cert.meta["wall_time_s"],
                      "variables": cert.meta["variables"],
                      "constraints": cert.meta["constraints"],
                      "solver_status": cert.meta["solver_status"]}, indent=2))
    return 0


def cmd_lagrange(args) -> int:
    rep = lagrange_demo(args.m_lambda)
    print(json.dumps({"m_lambda": rep.m_lambda, "feasible": rep.feasible,
                      "error_poly_min": rep.error_poly_min}, indent=2))
    return 0


def cmd_compare(args) -> int:
    text = compare_csv(load_records(args.bernstein), load_records(args.sos))
    if args.out:
        Path(args.out).write_text(text)
    print(text, end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="sosbarrier",
        description="Sum-of-squares baseline for barrier synthesis")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("synth", help="solve the SoS program for a problem file")
    sp.add_argument("problem")
    sp.add_argument("--m", type=int, required=True,
                    help="barrier cumulative degree")
    sp.add_argument("--m-lambda", type=int, required=True,
                    help="Lagrange multiplier degree (even)")
    sp.add_argument("--horizon", type=int, default=None)
    sp.add_argument("--solver", default="CLARABEL")
    sp.add_argument("--out", default=None, help="certificate JSON path")
    sp.set_defaults(func=cmd_synth)

    lp = sub.add_parser("lagrange-demo",
                        help="multiplier-degree feasibility study")
    lp.add_argument("--m-lambda", type=int, required=True)
    lp.set_defaults(func=cmd_lagrange)

    cp_ = sub.add_parser("compare", help="merge run records into one table")
    cp_.add_argument("--bernstein", nargs="*", default=[],
                     help="run-record JSON files from the LP lane")
    cp_.add_argument("--sos", nargs="*", default=[],
                     help="run-record JSON files from this lane")
    cp_.add_argument("--out", default=None)
    cp_.set_defaults(func=cmd_compare)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
