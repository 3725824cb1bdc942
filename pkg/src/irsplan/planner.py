"""End-to-end planning pipeline: scenario -> CKM -> channels -> plan -> report.

Coverage numbers in every report are recomputed from the returned plan through
the exact metric evaluators; nothing is copied out of solver internals.
"""

from __future__ import annotations

import csv
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .channel import ArrayConfig, ChannelSet, assemble_channel_set
from .ckm import CKM, build_ckm, load_ckm, save_ckm
from .errors import InfeasibleError, IrsPlanError, UnreachableTargetError
from .heuristics import cbd_plan, rrb_plan
from .metrics import (
    CostWeights,
    DeploymentPlan,
    Requirements,
    linear_to_db,
    make_plan,
    optimal_covariance,
    system_cost,
    verify_plan,
    watts_to_dbm,
)
from .rounding import N_GR_DEFAULT, greedy_round
from .sca import ScaOptions, solve_relaxed
from .scene import PointSet, Scene, load_scenario, scene_hash

WORKERS_ENV = "IRSPLAN_WORKERS"

ALGORITHMS = ("sca", "cbd", "rrb")
SWEEP_AXES = ("Gamma_c", "P_s", "w2")


@dataclass(frozen=True)
class RunConfig:
    """One pipeline run. Requirement fields are linear (watts / ratios);
    dB-valued CLI inputs are converted exactly once, before this is built."""

    scenario_path: str
    requirements: Requirements
    weights: CostWeights = field(default_factory=CostWeights)
    algorithm: str = "sca"
    case_tag: str = "I"
    seed: int = 0
    n_gr: int = N_GR_DEFAULT
    arrays: ArrayConfig = field(default_factory=ArrayConfig)
    out_dir: str | None = None
    ckm_cache: str | None = None  # directory of reusable ray-traced maps
    empty_deployment: bool = False  # evaluate beta = 0 instead of optimizing
    sca_options: ScaOptions | None = None

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise IrsPlanError(f"unknown algorithm {self.algorithm!r}")
        if self.case_tag not in ("I", "II"):
            raise IrsPlanError(f"unknown case tag {self.case_tag!r}")
        if self.algorithm == "rrb" and self.case_tag != "I":
            raise IrsPlanError("the random-phase baseline only supports case I")


@dataclass
class Report:
    feasible: bool
    plan: DeploymentPlan | None
    rho_dbm: np.ndarray | None  # per-SP illumination power
    snr_db: np.ndarray | None  # per-CP SNR
    cost_breakdown: dict
    sca_trace: list | None
    timings: dict
    infeasible_reason: str = ""


@dataclass
class Prepared:
    """Scenario artifacts shared across runs (e.g. every value of a sweep)."""

    scene: Scene
    points: PointSet
    ckm: CKM
    channels: ChannelSet


def _stage(timings: dict, name: str, fn, *args, **kwargs):
    start = time.perf_counter()
    try:
        out = fn(*args, **kwargs)
    except IrsPlanError as err:
        err.stage = name  # tag the failing pipeline stage on the way out
        raise
    timings[name] = time.perf_counter() - start
    return out


def prepare(config: RunConfig, timings: dict | None = None) -> Prepared:
    """Load the scenario and produce channels, reusing a cached CKM if present."""
    timings = timings if timings is not None else {}
    text = _stage(timings, "scenario", Path(config.scenario_path).read_text)
    scene, points = _stage(timings, "scenario-parse", load_scenario, text)
    ckm = _stage(timings, "ckm", _cached_ckm, scene, points, config.ckm_cache)
    channels = _stage(
        timings, "channels", assemble_channel_set, ckm, scene, points, config.arrays
    )
    return Prepared(scene=scene, points=points, ckm=ckm, channels=channels)


def _cached_ckm(scene: Scene, points: PointSet, cache_dir: str | None) -> CKM:
    if cache_dir is None:
        return build_ckm(scene, points)
    path = Path(cache_dir) / f"ckm-{scene_hash(scene)[:16]}.json"
    if path.exists():
        return load_ckm(path, expected_scene=scene)
    ckm = build_ckm(scene, points)
    path.parent.mkdir(parents=True, exist_ok=True)
    save_ckm(ckm, path)
    return ckm


def plan_with_algorithm(
    channels: ChannelSet,
    req: Requirements,
    weights: CostWeights,
    algorithm: str,
    case_tag: str = "I",
    seed: int = 0,
    n_gr: int = N_GR_DEFAULT,
    sca_options: ScaOptions | None = None,
):
    """Run one deployment algorithm; returns (plan, sca objective trace or None)."""
    if algorithm == "sca":
        opts = sca_options or ScaOptions()
        opts = replace(opts, seed=seed, n_gr=n_gr)
        relaxed = solve_relaxed(channels, req, weights, case_tag=case_tag, options=opts)
        plan = greedy_round(
            relaxed.beta_relaxed, channels, req, weights,
            case_tag=case_tag, seed=seed, n_gr=n_gr,
        )
        return plan, relaxed.objective_trace
    if algorithm == "cbd":
        return cbd_plan(channels, req, weights, case_tag=case_tag, seed=seed, n_gr=n_gr), None
    return rrb_plan(channels, req, weights, seed=seed), None


def coverage_map(plan: DeploymentPlan, channels: ChannelSet, req: Requirements) -> list[dict]:
    """Per-point achieved metrics under the plan's point-optimal covariances.

    Rows carry the linear value and its dB form; unreachable points report an
    exact zero (illumination/SNR) rather than an error.
    """
    phases = plan.phases()
    per_point = plan.case_tag == "II"
    rows = []
    for p in range(channels.P):
        v = phases[0][p] if per_point else phases
        try:
            _, rho = optimal_covariance(plan.beta, v, channels, plan.P0, ("s", p))
        except UnreachableTargetError:
            rho = 0.0
        rows.append({
            "id": f"sp{p}", "kind": "s", "index": p, "linear": rho,
            "db": watts_to_dbm(rho) if rho > 0.0 else -np.inf,
        })
    for q in range(channels.Q):
        v = phases[1][q] if per_point else phases
        try:
            _, snr = optimal_covariance(
                plan.beta, v, channels, plan.P0, ("c", q), sigma_c2=req.sigma_c2
            )
        except UnreachableTargetError:
            snr = 0.0
        rows.append({
            "id": f"cp{q}", "kind": "c", "index": q, "linear": snr,
            "db": linear_to_db(snr) if snr > 0.0 else -np.inf,
        })
    return rows


def _empty_plan(channels: ChannelSet, req: Requirements, weights: CostWeights) -> DeploymentPlan:
    v = np.ones(channels.K * channels.M, dtype=complex)
    return make_plan(np.zeros(channels.K), v, req.P0_max, weights, case_tag="I")


def run_pipeline(config: RunConfig, prepared: Prepared | None = None) -> Report:
    """Scenario to report. Deterministic given the config seed.

    Infeasibility is reported in-band (feasible=False plus reason); genuine
    errors raise with a stage tag.
    """
    timings: dict = {}
    if prepared is None:
        prepared = prepare(config, timings)
    channels = prepared.channels
    req, weights = config.requirements, config.weights

    trace = None
    reason = ""
    if config.empty_deployment:
        plan = _stage(timings, "plan", _empty_plan, channels, req, weights)
        check = verify_plan(plan, channels, req)
        feasible = bool(check["feasible"])
    else:
        try:
            plan, trace = _stage(
                timings, "plan", plan_with_algorithm,
                channels, req, weights, config.algorithm,
                case_tag=config.case_tag, seed=config.seed, n_gr=config.n_gr,
                sca_options=config.sca_options,
            )
            feasible = bool(verify_plan(plan, channels, req)["feasible"])
            if not feasible:
                reason = "plan failed the independent feasibility re-check"
        except (InfeasibleError, UnreachableTargetError) as err:
            report = Report(
                feasible=False, plan=None, rho_dbm=None, snr_db=None,
                cost_breakdown={}, sca_trace=None, timings=timings,
                infeasible_reason=str(err),
            )
            if config.out_dir is not None:
                _write_report(config, report, prepared)
            return report

    rows = _stage(timings, "coverage", coverage_map, plan, channels, req)
    rho = np.array([r["linear"] for r in rows if r["kind"] == "s"])
    snr = np.array([r["linear"] for r in rows if r["kind"] == "c"])
    report = Report(
        feasible=feasible,
        plan=plan,
        rho_dbm=np.array([watts_to_dbm(x) if x > 0 else -np.inf for x in rho]),
        snr_db=np.array([linear_to_db(x) if x > 0 else -np.inf for x in snr]),
        cost_breakdown={
            "deployment": weights.w1 * float(np.sum(plan.beta)),
            "power": weights.w2 * plan.P0,
            "total": plan.cost,
        },
        sca_trace=trace,
        timings=timings,
        infeasible_reason=reason,
    )
    if config.out_dir is not None:
        _write_report(config, report, prepared)
    return report


def plan_document(plan: DeploymentPlan) -> str:
    """Canonical JSON for a plan: sorted keys, fixed separators, repr floats —
    byte-identical across runs of the same configuration."""
    doc = {
        "case": plan.case_tag,
        "beta": [int(b) for b in plan.beta],
        "P0_watts": plan.P0,
        "cost": plan.cost,
    }
    if plan.case_tag == "I":
        doc["phases_re"] = [float(x) for x in np.real(plan.v)]
        doc["phases_im"] = [float(x) for x in np.imag(plan.v)]
    else:
        doc["sensing_phases_re"] = np.real(plan.v_sensing).tolist()
        doc["sensing_phases_im"] = np.imag(plan.v_sensing).tolist()
        doc["comm_phases_re"] = np.real(plan.v_comm).tolist()
        doc["comm_phases_im"] = np.imag(plan.v_comm).tolist()
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def _write_report(config: RunConfig, report: Report, prepared: Prepared) -> None:
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summary = {
        "feasible": report.feasible,
        "algorithm": config.algorithm,
        "case": config.case_tag,
        "seed": config.seed,
        "cost": report.cost_breakdown,
        "timings": report.timings,
    }
    if not report.feasible and report.plan is None:
        summary["infeasible_reason"] = report.infeasible_reason
        (out / "report.json").write_text(json.dumps(summary, indent=2, sort_keys=True))
        return
    (out / "plan.json").write_text(plan_document(report.plan))
    (out / "report.json").write_text(json.dumps(summary, indent=2, sort_keys=True))
    rows = coverage_map(report.plan, prepared.channels, config.requirements)
    coords = {
        f"sp{p}": prepared.points.sensing_points[p] for p in range(len(prepared.points.sensing_points))
    }
    coords.update(
        {f"cp{q}": prepared.points.comm_points[q] for q in range(len(prepared.points.comm_points))}
    )
    with open(out / "coverage.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["point", "x", "y", "z", "metric_db"])
        for row in rows:
            x, y, z = coords[row["id"]]
            writer.writerow([row["id"], x, y, z, row["db"]])
    if report.sca_trace is not None:
        with open(out / "sca_trace.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["iteration", "objective"])
            for i, val in enumerate(report.sca_trace):
                writer.writerow([i, repr(val)])


def _apply_axis(config: RunConfig, axis: str, value: float) -> RunConfig:
    if axis == "Gamma_c":
        return replace(config, requirements=replace(config.requirements, Gamma_c=value))
    if axis == "P_s":
        return replace(config, requirements=replace(config.requirements, P_s=value))
    if axis == "w2":
        return replace(config, weights=replace(config.weights, w2=value))
    raise IrsPlanError(f"unknown sweep axis {axis!r}; expected one of {SWEEP_AXES}")


def _sweep_one(args):
    config, prepared, axis, value = args
    cfg = _apply_axis(replace(config, out_dir=None), axis, value)
    report = run_pipeline(cfg, prepared=prepared)
    if not report.feasible or report.plan is None:
        return {
            "value": value, "irs_count": None, "P0": None, "cost": None,
            "feasible": False, "reason": report.infeasible_reason,
        }
    return {
        "value": value,
        "irs_count": int(np.sum(report.plan.beta)),
        "P0": report.plan.P0,
        "cost": report.plan.cost,
        "feasible": True,
        "reason": "",
    }


def sweep(config: RunConfig, axis: str, values) -> list[dict]:
    """One pipeline run per value over a shared CKM; failures are recorded
    per value and the sweep continues.

    Values must be sorted ascending. Worker count comes from the
    IRSPLAN_WORKERS environment variable (default 1 = sequential).
    """
    values = [float(v) for v in values]
    if values != sorted(values):
        raise IrsPlanError("sweep values must be sorted ascending")
    prepared = prepare(config)
    jobs = [(config, prepared, axis, v) for v in values]
    workers = int(os.environ.get(WORKERS_ENV, "1"))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_one, jobs))
    else:
        rows = [_sweep_one(job) for job in jobs]
    if config.out_dir is not None:
        out = Path(config.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "sweep.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["value", "irs_count", "P0", "cost", "feasible", "reason"])
            for row in rows:
                writer.writerow([row[k] for k in ("value", "irs_count", "P0", "cost", "feasible", "reason")])
    return rows
