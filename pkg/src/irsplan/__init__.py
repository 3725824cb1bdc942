"""IRS deployment planning for integrated sensing and communication.

Ray-traced channel knowledge maps, channel synthesis, and a joint
deployment/phase/power optimizer with greedy rounding and low-complexity
baselines.
"""

from .channel import ArrayConfig, ChannelSet, assemble_channel_set, synthesize_channel
from .ckm import CKM, PathRecord, build_ckm, load_ckm, save_ckm, trace_paths
from .errors import (
    CkmError,
    GeometryError,
    InfeasibleError,
    IrsPlanError,
    ScenarioError,
    SolverError,
    UnreachableTargetError,
)
from .heuristics import cbd_plan, cbd_weights, rrb_plan
from .metrics import (
    CostWeights,
    DeploymentPlan,
    Requirements,
    communication_snr,
    db_to_linear,
    dbm_to_watts,
    illumination_power,
    linear_to_db,
    optimal_covariance,
    required_power,
    system_cost,
    verify_plan,
    watts_to_dbm,
)
from .rounding import greedy_round, init_binary, solve_reflective_subproblem
from .sca import RelaxedSolution, ScaOptions, solve_relaxed
from .scene import (
    Box,
    CandidateSite,
    Obstacle,
    PointSet,
    Scene,
    load_scenario,
    sample_points,
    scene_hash,
    serialize_scene,
)

__all__ = [
    "ArrayConfig",
    "Box",
    "CKM",
    "CandidateSite",
    "ChannelSet",
    "CkmError",
    "CostWeights",
    "DeploymentPlan",
    "GeometryError",
    "InfeasibleError",
    "IrsPlanError",
    "Obstacle",
    "PathRecord",
    "PointSet",
    "RelaxedSolution",
    "Requirements",
    "ScaOptions",
    "Scene",
    "ScenarioError",
    "SolverError",
    "UnreachableTargetError",
    "assemble_channel_set",
    "build_ckm",
    "cbd_plan",
    "cbd_weights",
    "communication_snr",
    "db_to_linear",
    "dbm_to_watts",
    "greedy_round",
    "illumination_power",
    "init_binary",
    "linear_to_db",
    "load_ckm",
    "load_scenario",
    "optimal_covariance",
    "required_power",
    "rrb_plan",
    "sample_points",
    "save_ckm",
    "scene_hash",
    "serialize_scene",
    "solve_reflective_subproblem",
    "solve_relaxed",
    "synthesize_channel",
    "system_cost",
    "trace_paths",
    "verify_plan",
    "watts_to_dbm",
]

__version__ = "0.1.0"
