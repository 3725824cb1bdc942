"""Command-line front end: plan / sweep / ckm subcommands.

Exit codes: 0 success, 2 requirements infeasible, 1 any other error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .channel import ArrayConfig
from .ckm import build_ckm, load_ckm, save_ckm
from .errors import IrsPlanError
from .metrics import CostWeights, Requirements, db_to_linear, dbm_to_watts, watts_to_dbm
from .planner import RunConfig, run_pipeline, sweep
from .scene import load_scenario, scene_hash
from .solvers import SDP_SIZE_LIMIT

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INFEASIBLE = 2


def _add_run_args(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--scenario", required=True, help="scenario JSON file")
    sub.add_argument("--algo", choices=("sca", "cbd", "rrb"), default="sca")
    sub.add_argument("--case", choices=("1", "2"), default="1",
                     help="1 = one reflective config, 2 = per-point reconfiguration")
    sub.add_argument("--ps-dbm", type=float, default=-75.0,
                     help="sensing illumination threshold (dBm)")
    sub.add_argument("--gc-db", type=float, default=6.0, help="communication SNR threshold (dB)")
    sub.add_argument("--sigma-dbm", type=float, default=-80.0, help="noise power (dBm)")
    sub.add_argument("--p0max-dbm", type=float, default=30.0, help="transmit power budget (dBm)")
    sub.add_argument("--w1", type=float, default=1.0, help="deployment cost weight")
    sub.add_argument("--w2", type=float, default=0.0, help="transmit power cost weight")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--ngr", type=int, default=200, help="Gaussian randomization draws")
    sub.add_argument("--nt", type=int, default=4, help="BS antennas")
    sub.add_argument("--m", type=int, default=None,
                     help="reflective elements per IRS (default: largest size the "
                          "semidefinite solver guard admits, at most 8)")
    sub.add_argument("--ckm-cache", default=None, help="directory of reusable ray-traced maps")
    sub.add_argument("--out", default=None, help="report output directory")


def _elements_per_site(requested: int | None, n_sites: int) -> int:
    # SDR order is 2(KM+1)+1; keep it under the solver guard
    cap = max(1, (SDP_SIZE_LIMIT // 2 - 2) // max(n_sites, 1))
    if requested is None:
        return min(8, cap)
    if requested > cap:
        print(f"note: {requested} elements/site exceeds the solver size guard; "
              f"using {cap}", file=sys.stderr)
        return cap
    return requested


def _config_from_args(args) -> RunConfig:
    scene, _ = load_scenario(Path(args.scenario).read_text())
    m = _elements_per_site(args.m, len(scene.candidate_sites))
    req = Requirements(
        P_s=dbm_to_watts(args.ps_dbm),
        Gamma_c=db_to_linear(args.gc_db),
        sigma_c2=dbm_to_watts(args.sigma_dbm),
        P0_max=dbm_to_watts(args.p0max_dbm),
    )
    return RunConfig(
        scenario_path=args.scenario,
        requirements=req,
        weights=CostWeights(w1=args.w1, w2=args.w2),
        algorithm=args.algo,
        case_tag="I" if args.case == "1" else "II",
        seed=args.seed,
        n_gr=args.ngr,
        arrays=ArrayConfig(n_bs_antennas=args.nt, n_irs_elements=m),
        out_dir=args.out,
        ckm_cache=args.ckm_cache,
        empty_deployment=getattr(args, "empty", False),
    )


def _cmd_plan(args) -> int:
    report = run_pipeline(_config_from_args(args))
    if not report.feasible and report.plan is None:
        print(f"infeasible: {report.infeasible_reason}", file=sys.stderr)
        return EXIT_INFEASIBLE
    plan = report.plan
    deployed = [k for k, b in enumerate(plan.beta) if b > 0]
    print(f"feasible={report.feasible} sites={deployed} "
          f"P0={watts_to_dbm(plan.P0):.2f} dBm cost={plan.cost:.6g}")
    if args.out:
        print(f"report written to {args.out}")
    return EXIT_OK if report.feasible else EXIT_INFEASIBLE


def _cmd_sweep(args) -> int:
    axis = {"gc": "Gamma_c", "ps": "P_s", "w2": "w2"}[args.axis]
    raw = [float(v) for v in args.values.split(",")]
    if axis == "Gamma_c":
        values = [db_to_linear(v) for v in raw]
    elif axis == "P_s":
        values = [dbm_to_watts(v) for v in raw]
    else:
        values = raw
    rows = sweep(_config_from_args(args), axis, values)
    for shown, row in zip(raw, rows):
        print(f"{args.axis}={shown:g} feasible={row['feasible']} "
              f"count={row['irs_count']} cost={row['cost']}")
    if all(not row["feasible"] for row in rows):
        return EXIT_INFEASIBLE
    return EXIT_OK


def _cmd_ckm_build(args) -> int:
    scene, points = load_scenario(Path(args.scenario).read_text())
    ckm = build_ckm(scene, points)
    save_ckm(ckm, args.out)
    print(f"wrote {args.out} (scene {scene_hash(scene)[:16]}, "
          f"{len(ckm.paths)} endpoint pairs)")
    return EXIT_OK


def _cmd_ckm_inspect(args) -> int:
    ckm = load_ckm(args.file)
    n_paths = sum(len(records) for records in ckm.paths.values())
    doc = {
        "frequency_hz": ckm.frequency_hz,
        "scene_hash": ckm.scene_hash[:16],
        "endpoints": len(ckm.endpoints),
        "pairs": len(ckm.paths),
        "paths": n_paths,
    }
    print(json.dumps(doc, indent=2, sort_keys=True))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="irsplan",
                                     description="IRS deployment planner for joint "
                                                 "sensing/communication coverage")
    subs = parser.add_subparsers(dest="command", required=True)

    p_plan = subs.add_parser("plan", help="optimize one deployment")
    _add_run_args(p_plan)
    p_plan.add_argument("--empty", action="store_true",
                        help="evaluate the empty deployment instead of optimizing")
    p_plan.set_defaults(fn=_cmd_plan)

    p_sweep = subs.add_parser("sweep", help="cost curve over a requirement axis")
    _add_run_args(p_sweep)
    p_sweep.add_argument("--axis", choices=("gc", "ps", "w2"), required=True)
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated ascending values (gc in dB, ps in dBm)")
    p_sweep.set_defaults(fn=_cmd_sweep)

    p_ckm = subs.add_parser("ckm", help="ray-traced map utilities")
    ckm_subs = p_ckm.add_subparsers(dest="ckm_command", required=True)
    p_build = ckm_subs.add_parser("build", help="trace a scenario into a map file")
    p_build.add_argument("--scenario", required=True)
    p_build.add_argument("--out", required=True)
    p_build.set_defaults(fn=_cmd_ckm_build)
    p_inspect = ckm_subs.add_parser("inspect", help="summarize a map file")
    p_inspect.add_argument("file")
    p_inspect.set_defaults(fn=_cmd_ckm_inspect)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except IrsPlanError as err:
        stage = getattr(err, "stage", None)
        tag = f"[{stage}] " if stage else ""
        print(f"error: {tag}{err}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
