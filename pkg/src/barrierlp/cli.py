"""Command-line front end: synthesis runs, verification and benchmark sweeps.

Exit codes: 0 success / certificate verified, 1 usage or runtime error,
2 infeasible synthesis problem, 3 failed verification.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict, dataclass

from .adaptive import refine_loop
from .problems import load_problem
from .synthesis import (Certificate, InfeasibleProblem, SynthesisConfig,
                        SynthesisError, assemble, export_lp_text, synthesize)
from .verify import grid_falsify, monte_carlo_safety, sound_check

SWEEP_HEADER = ("m", "knob", "t_s", "delta_s", "M", "C", "status")


@dataclass
class RunRecord:
    """One synthesis run: configuration echo plus headline results."""

    problem: str
    m: int
    m_plus: int
    p_plus: int
    kappa: int
    degree_form: str
    horizon: int
    eta: float
    gamma: float
    delta_s: float
    wall_time_s: float
    variables: int
    constraints: int
    solver_status: str
    adaptive: bool = False

    @staticmethod
    def from_certificate(cert: Certificate) -> "RunRecord":
        meta = cert.meta
        return RunRecord(
            problem=meta.get("problem", ""),
            m=meta["m"],
            m_plus=meta["m_plus"],
            p_plus=meta["p_plus"],
            kappa=meta["kappa"],
            degree_form=meta["degree_form"],
            horizon=cert.horizon,
            eta=cert.eta,
            gamma=cert.gamma,
            delta_s=cert.delta_s,
            wall_time_s=meta["wall_time_s"],
            variables=meta["variables"],
            constraints=meta["constraints"],
            solver_status=meta["solver_status"],
            adaptive="rounds" in meta,
        )


def _config_from_args(args) -> SynthesisConfig:
    return SynthesisConfig(
        m=args.m,
        m_plus=args.m_plus,
        p_plus=args.p_plus,
        kappa=args.kappa,
        horizon=args.horizon,
        degree_form=args.degree_form,
        max_constraints=args.max_constraints,
        coeff_bound=args.coeff_bound,
    )


def _add_synth_flags(sp) -> None:
    sp.add_argument("--m", type=int, required=True, help="barrier degree")
    sp.add_argument("--m-plus", type=int, default=None,
                    help="raised conversion degree (default: m)")
    sp.add_argument("--p-plus", type=int, default=None,
                    help="raised degree for the martingale rows "
                         "(default: composed degree)")
    sp.add_argument("--kappa", type=int, default=1,
                    help="uniform subdivisions per dimension")
    sp.add_argument("--horizon", type=int, default=None,
                    help="override the problem-file horizon K")
    sp.add_argument("--degree-form", choices=("maximal", "cumulative"),
                    default="maximal")
    sp.add_argument("--max-constraints", type=int, default=None,
                    help="refuse to assemble beyond this row count")
    sp.add_argument("--coeff-bound", type=float, default=None,
                    help="optional |b_i| box bound for solver conditioning")


def cmd_synth(args) -> int:
    problem = load_problem(args.problem)
    cfg = _config_from_args(args)
    try:
        if args.adaptive:
            cert = refine_loop(problem, cfg, rounds=args.rounds,
                               c_max=args.c_max)
        else:
            cert = synthesize(problem, cfg)
    except InfeasibleProblem as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 2
    record = RunRecord.from_certificate(cert)
    if args.out:
        cert.save(args.out)
        record_path = str(args.out).replace(".json", "") + ".run.json"
        with open(record_path, "w") as fh:
            json.dump(asdict(record), fh, indent=2)
    print(json.dumps(asdict(record), indent=2))
    return 0


def cmd_verify(args) -> int:
    problem = load_problem(args.problem)
    cert = Certificate.load(args.certificate)
    reports = {}
    checks = args.checks.split(",")
    ok = True
    if "sound" in checks:
        rep = sound_check(cert, problem, m_check=args.m_check,
                          kappa_check=args.kappa_check)
        reports["sound"] = rep.to_dict()
        ok &= rep.passed
    if "grid" in checks:
        rep = grid_falsify(cert, problem, points_per_dim=args.points_per_dim)
        reports["grid"] = rep.to_dict()
        ok &= rep.passed
    if "mc" in checks:
        est = monte_carlo_safety(problem, trials=args.mc_trials,
                                 seed=args.seed)
        mc_ok = est.probability + est.half_width >= cert.delta_s
        reports["mc"] = {
            "probability": est.probability,
            "half_width": est.half_width,
            "delta_s": cert.delta_s,
            "pass": mc_ok,
        }
        ok &= mc_ok
    print(json.dumps(reports, indent=2))
    return 0 if ok else 3


def _sweep_cell(problem_path: str, m: int, knob: int, kwargs: dict) -> tuple:
    """One sweep row; module-level so parallel workers can pickle it."""
    try:
        problem = load_problem(problem_path)
        cert = synthesize(problem, SynthesisConfig(**kwargs))
        return (m, knob, f"{cert.meta['wall_time_s']:.3f}",
                f"{cert.delta_s:.6f}", cert.meta["variables"],
                cert.meta["constraints"], "optimal")
    except InfeasibleProblem:
        return (m, knob, "", "", "", "", "infeasible")
    except (SynthesisError, ValueError, OSError) as exc:
        return (m, knob, "", "", "", "", f"error: {exc}".splitlines()[0])


def cmd_sweep(args) -> int:
    load_problem(args.problem)  # fail fast on bad files before spawning work
    ms = [int(v) for v in args.m.split(",")]
    if args.m_plus:
        knob_name = "m_plus"
        knobs = [int(v) for v in args.m_plus.split(",")]
    else:
        knob_name = "kappa"
        knobs = [int(v) for v in args.kappa.split(",")]
    cells = []
    for m in ms:
        for knob in knobs:
            kwargs = dict(m=m, horizon=args.horizon,
                          degree_form=args.degree_form,
                          max_constraints=args.max_constraints)
            kwargs[knob_name] = knob
            cells.append((args.problem, m, knob, kwargs))
    rows = [SWEEP_HEADER]
    if args.jobs > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows += list(pool.map(_sweep_cell, *zip(*cells)))
    else:
        rows += [_sweep_cell(*cell) for cell in cells]
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerows(rows)
    text = buf.getvalue()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    print(text, end="")
    return 0


def cmd_export_lp(args) -> int:
    problem = load_problem(args.problem)
    cfg = _config_from_args(args)
    lp = assemble(problem, cfg)
    text = export_lp_text(lp, name=problem.name)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        print(text, end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="barrierlp",
        description="Safety certificates for polynomial stochastic systems "
                    "via Bernstein-relaxation linear programs")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("synth", help="synthesize a barrier certificate")
    sp.add_argument("problem", help="problem JSON path or bundled fixture name")
    _add_synth_flags(sp)
    sp.add_argument("--adaptive", action="store_true",
                    help="refine the partition adaptively between solves")
    sp.add_argument("--c-max", type=int, default=None,
                    help="constraint budget for adaptive refinement")
    sp.add_argument("--rounds", type=int, default=2,
                    help="synthesis rounds when --adaptive is set")
    sp.add_argument("--out", default=None, help="certificate JSON output path")
    sp.set_defaults(func=cmd_synth)

    vp = sub.add_parser("verify", help="check a certificate against a problem")
    vp.add_argument("problem")
    vp.add_argument("certificate")
    vp.add_argument("--checks", default="sound,grid",
                    help="comma list from sound,grid,mc")
    vp.add_argument("--m-check", type=int, default=None)
    vp.add_argument("--kappa-check", type=int, default=None)
    vp.add_argument("--points-per-dim", type=int, default=50)
    vp.add_argument("--mc-trials", type=int, default=10_000)
    vp.add_argument("--seed", type=int, default=0)
    vp.set_defaults(func=cmd_verify)

    wp = sub.add_parser("sweep", help="run a grid of configurations, emit CSV")
    wp.add_argument("problem")
    wp.add_argument("--m", required=True, help="comma list of degrees")
    wp.add_argument("--kappa", default="1", help="comma list of subdivisions")
    wp.add_argument("--m-plus", default=None,
                    help="comma list of raised degrees (overrides --kappa as "
                         "the sweep knob)")
    wp.add_argument("--horizon", type=int, default=None)
    wp.add_argument("--degree-form", choices=("maximal", "cumulative"),
                    default="maximal")
    wp.add_argument("--max-constraints", type=int, default=None)
    wp.add_argument("--jobs", type=int, default=1,
                    help="parallel rows (independent problems)")
    wp.add_argument("--out", default=None, help="CSV output path")
    wp.set_defaults(func=cmd_sweep)

    ep = sub.add_parser("export-lp",
                        help="write the assembled LP in CPLEX LP text format")
    ep.add_argument("problem")
    _add_synth_flags(ep)
    ep.add_argument("--out", default=None)
    ep.set_defaults(func=cmd_export_lp)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError, KeyError, json.JSONDecodeError,
            SynthesisError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
