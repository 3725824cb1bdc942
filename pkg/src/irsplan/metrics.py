"""Performance and cost functionals evaluated exactly.

All powers are in watts internally; dB/dBm conversions happen only at the
interfaces. Deployment weights ``beta`` may be fractional here (the relaxed
optimizers reuse these evaluators); plans carry binary beta.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelSet
from .errors import IrsPlanError, UnreachableTargetError

_REACH_TOL = 1e-30  # squared-norm floor below which a target counts as unreachable
_UNIT_TOL = 1e-9


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0) * 1e-3

def watts_to_dbm(watts: float) -> float:
    return 10.0 * np.log10(watts / 1e-3)

def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)

def linear_to_db(x: float) -> float:
    return 10.0 * np.log10(x)


@dataclass(frozen=True)
class Requirements:
    P_s: float  # sensing illumination threshold, watts
    Gamma_c: float  # communication SNR threshold, linear
    sigma_c2: float  # noise power, watts
    P0_max: float  # transmit power budget, watts

    def __post_init__(self):
        for name in ("P_s", "Gamma_c", "sigma_c2", "P0_max"):
            if not getattr(self, name) > 0:
                raise IrsPlanError(f"requirement {name} must be strictly positive")


@dataclass(frozen=True)
class CostWeights:
    w1: float = 1.0  # cost per deployed IRS
    w2: float = 0.0  # cost per watt of transmit power

    def __post_init__(self):
        if self.w1 < 0 or self.w2 < 0:
            raise IrsPlanError("cost weights must be non-negative")


@dataclass(frozen=True)
class DeploymentPlan:
    """Binary deployment plus the operating point found for it.

    Case I carries one reflective vector ``v`` (stacked, length K*M); case II
    carries one vector per SP (``v_sensing``, shape (P, K*M)) and per CP
    (``v_comm``, shape (Q, K*M)).
    """

    beta: np.ndarray  # (K,) of {0, 1}
    case_tag: str  # "I" or "II"
    P0: float
    cost: float
    v: np.ndarray | None = None
    v_sensing: np.ndarray | None = None
    v_comm: np.ndarray | None = None

    def __post_init__(self):
        beta = np.asarray(self.beta, dtype=float)
        if not np.all(np.isin(beta, (0.0, 1.0))):
            raise IrsPlanError("plan beta entries must be binary")
        beta.setflags(write=False)
        object.__setattr__(self, "beta", beta)
        if self.case_tag not in ("I", "II"):
            raise IrsPlanError("case_tag must be 'I' or 'II'")
        if self.case_tag == "I":
            if self.v is None:
                raise IrsPlanError("case I plan requires a reflective vector v")
            vs = (self.v,)
        else:
            if self.v_sensing is None or self.v_comm is None:
                raise IrsPlanError("case II plan requires per-point reflective vectors")
            vs = (self.v_sensing, self.v_comm)
        for arr in vs:
            if np.max(np.abs(np.abs(arr) - 1.0)) > _UNIT_TOL:
                raise IrsPlanError("reflective phase entries must be unit modulus")

    def phases(self):
        """Phase argument(s) used by metrics evaluators."""
        if self.case_tag == "I":
            return self.v
        return (self.v_sensing, self.v_comm)


def effective_sensing_vector(beta, v, channels: ChannelSet, p: int) -> np.ndarray:
    """u_p = sum_k beta_k H0k^H diag(g_kp) v_k  (length Nt)."""
    K, M = channels.K, channels.M
    v = np.asarray(v)
    u = np.zeros(channels.Nt, dtype=complex)
    for k in range(K):
        if beta[k] == 0:
            continue
        u += beta[k] * (channels.H0k[k].conj().T @ (channels.gkp[k, p] * v[k * M:(k + 1) * M]))
    return u


def effective_comm_vector(beta, v, channels: ChannelSet, q: int) -> np.ndarray:
    """u_q = sum_k beta_k H0k^H diag(h_kq) v_k + h_0q  (length Nt)."""
    K, M = channels.K, channels.M
    v = np.asarray(v)
    u = channels.h0q[q].copy()
    for k in range(K):
        if beta[k] == 0:
            continue
        u += beta[k] * (channels.H0k[k].conj().T @ (channels.hkq[k, q] * v[k * M:(k + 1) * M]))
    return u


def _check_psd(R: np.ndarray) -> None:
    Rh = 0.5 * (R + R.conj().T)
    w = np.linalg.eigvalsh(Rh)
    tr = max(float(np.trace(Rh).real), 1e-300)
    if w[0] < -1e-9 * tr:
        raise IrsPlanError("covariance matrix is not positive semidefinite")


def illumination_power(beta, v, R: np.ndarray, channels: ChannelSet, p: int) -> float:
    """Received illumination power at SP p through the deployed virtual LoS links."""
    _check_psd(R)
    u = effective_sensing_vector(beta, v, channels, p)
    return float((u.conj() @ R @ u).real)


def communication_snr(beta, v, R: np.ndarray, channels: ChannelSet, q: int, sigma_c2: float) -> float:
    """Received SNR at CP q under transmit covariance R."""
    _check_psd(R)
    u = effective_comm_vector(beta, v, channels, q)
    return float((u.conj() @ R @ u).real) / sigma_c2


def optimal_covariance(beta, v, channels: ChannelSet, P0: float, target, sigma_c2: float | None = None):
    """Rank-one transmit covariance maximizing the target metric at power P0.

    ``target`` is ("s", p) for an SP or ("c", q) for a CP. Returns (R, value);
    the comm value is an SNR and needs ``sigma_c2``.
    """
    kind, idx = target
    if kind == "s":
        u = effective_sensing_vector(beta, v, channels, idx)
    elif kind == "c":
        u = effective_comm_vector(beta, v, channels, idx)
    else:
        raise IrsPlanError(f"unknown target kind {kind!r}")
    nrm2 = float(np.vdot(u, u).real)
    if nrm2 < _REACH_TOL:
        raise UnreachableTargetError([f"{'sp' if kind == 's' else 'cp'}{idx}"])
    R = (P0 / nrm2) * np.outer(u, u.conj())
    value = P0 * nrm2
    if kind == "c":
        if sigma_c2 is None:
            raise IrsPlanError("sigma_c2 required for a communication target")
        value /= sigma_c2
    return R, value


def target_gains(beta, phases, channels: ChannelSet):
    """Squared effective-channel norms per SP and CP.

    ``phases`` is a stacked vector (case I) or a pair (v_sensing, v_comm) of
    per-point vectors (case II).
    """
    per_point = isinstance(phases, tuple)
    gs = np.empty(channels.P)
    gc = np.empty(channels.Q)
    for p in range(channels.P):
        v = phases[0][p] if per_point else phases
        u = effective_sensing_vector(beta, v, channels, p)
        gs[p] = float(np.vdot(u, u).real)
    for q in range(channels.Q):
        v = phases[1][q] if per_point else phases
        u = effective_comm_vector(beta, v, channels, q)
        gc[q] = float(np.vdot(u, u).real)
    return gs, gc


def required_power(beta, phases, channels: ChannelSet, req: Requirements) -> float:
    """Minimum P0 meeting every per-point requirement under optimal covariances.

    Raises UnreachableTargetError listing every dead point when some effective
    channel is identically zero.
    """
    gs, gc = target_gains(beta, phases, channels)
    dead = [f"sp{p}" for p in range(channels.P) if gs[p] < _REACH_TOL]
    dead += [f"cp{q}" for q in range(channels.Q) if gc[q] < _REACH_TOL]
    if dead:
        raise UnreachableTargetError(dead)
    ratios = [req.P_s / g for g in gs] + [req.sigma_c2 * req.Gamma_c / g for g in gc]
    return float(max(ratios))


def system_cost(beta, P0: float, weights: CostWeights) -> float:
    return weights.w1 * float(np.sum(beta)) + weights.w2 * float(P0)


def make_plan(beta, phases, P0: float, weights: CostWeights, case_tag: str) -> DeploymentPlan:
    """Assemble a DeploymentPlan with a consistent cost field."""
    cost = system_cost(beta, P0, weights)
    if case_tag == "I":
        return DeploymentPlan(beta=np.asarray(beta, float), case_tag="I", P0=P0, cost=cost, v=np.asarray(phases))
    vs, vc = phases
    return DeploymentPlan(
        beta=np.asarray(beta, float), case_tag="II", P0=P0, cost=cost,
        v_sensing=np.asarray(vs), v_comm=np.asarray(vc),
    )


def verify_plan(plan: DeploymentPlan, channels: ChannelSet, req: Requirements,
                rel_slack: float = 1e-6) -> dict:
    """Independent feasibility re-check of a plan via the exact evaluators.

    Returns achieved per-point metrics plus a 'feasible' flag; never trusts
    solver-internal numbers.
    """
    gs, gc = target_gains(plan.beta, plan.phases(), channels)
    rho = plan.P0 * gs
    snr = plan.P0 * gc / req.sigma_c2
    feasible = (
        bool(np.all(rho >= req.P_s * (1.0 - rel_slack)))
        and bool(np.all(snr >= req.Gamma_c * (1.0 - rel_slack)))
        and plan.P0 <= req.P0_max * (1.0 + 1e-9)
    )
    return {"rho": rho, "snr": snr, "feasible": feasible}
