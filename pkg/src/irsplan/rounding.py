"""Greedy relax-and-round: binary deployment recovery with fixed-beta
reflective beamforming found by semidefinite relaxation plus Gaussian
randomization.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelSet
from .errors import InfeasibleError
from .metrics import CostWeights, DeploymentPlan, Requirements, make_plan, verify_plan
from .solvers import SDProblem, complex_embed, complex_extract, solve_sdp, structure_average

N_GR_DEFAULT = 200
SNAP_TOL = 1e-3
_BUDGET_SLACK = 1e-9


def sensing_selection_matrix(beta, channels: ChannelSet, p: int) -> np.ndarray:
    """F_p^s(beta): Nt x (KM+1) block matrix [beta_k H0k^H diag(g_kp)]_k with a
    zero last column."""
    K, M, Nt = channels.K, channels.M, channels.Nt
    F = np.zeros((Nt, K * M + 1), dtype=complex)
    for k in range(K):
        if beta[k] == 0:
            continue
        F[:, k * M:(k + 1) * M] = beta[k] * (channels.H0k[k].conj().T * channels.gkp[k, p][None, :])
    return F


def comm_selection_matrix(beta, channels: ChannelSet, q: int) -> np.ndarray:
    """F_q^c(beta): like the sensing version but with the direct channel as the
    last column."""
    K, M, Nt = channels.K, channels.M, channels.Nt
    F = np.zeros((Nt, K * M + 1), dtype=complex)
    for k in range(K):
        if beta[k] == 0:
            continue
        F[:, k * M:(k + 1) * M] = beta[k] * (channels.H0k[k].conj().T * channels.hkq[k, q][None, :])
    F[:, -1] = channels.h0q[q]
    return F


@dataclass
class ReflectiveSolution:
    """Outcome of a fixed-beta reflective beamforming subproblem."""

    feasible: bool
    reason: str = ""  # "", "unreachable", "over_budget", "sdr_infeasible"
    v: np.ndarray | None = None  # (KM,) unit-modulus
    P0: float = np.inf
    sdr_P0: float = np.inf  # relaxation lower bound on P0
    unreachable: list = field(default_factory=list)


def _solve_sdr(targets: list[tuple[np.ndarray, float]], n: int, tol: float = 1e-6):
    """Maximize s s.t. trace(M_i V) >= thr_i * s, diag(V) = 1, V Hermitian PSD.

    Solved through the real embedding with s as an extra 1x1 diagonal block.
    Returns (V, s).
    """
    N = 2 * n + 1
    C = np.zeros((N, N))
    C[-1, -1] = -1.0  # maximize s
    # Condition the data: each target matrix is normalized to unit peak
    # magnitude and s is rescaled by the weakest target's gain/threshold
    # ratio, so every SDP coefficient is O(1) regardless of the absolute
    # channel and threshold scales (which span many orders of magnitude).
    peaks = [float(np.max(np.abs(Mmat))) for Mmat, _ in targets]
    if min(peaks) <= 0.0:
        return None, "unbounded"
    s_scale = min(peak / thr for peak, (_, thr) in zip(peaks, targets))
    cons = []
    for peak, (Mmat, thr) in zip(peaks, targets):
        A = np.zeros((N, N))
        A[:2 * n, :2 * n] = complex_embed(Mmat / peak)
        A[-1, -1] = -2.0 * s_scale * thr / peak
        cons.append((A, ">=", 0.0))
    for i in range(2 * n):
        E = np.zeros((N, N))
        E[i, i] = 1.0
        cons.append((E, "==", 1.0))
    sol = solve_sdp(SDProblem(C=C, constraints=tuple(cons)), tol=tol)
    if not sol.ok:
        return None, sol.status
    Xv = sol.x
    V = complex_extract(structure_average(Xv[:2 * n, :2 * n]))
    V = 0.5 * (V + V.conj().T)
    s = float(Xv[-1, -1]) * s_scale
    return (V, s), "optimal"


def _randomize(V: np.ndarray, n_gr: int, seed) -> np.ndarray:
    """Candidate unit-modulus vectors: n_gr Gaussian draws with covariance V,
    each phase-normalized by its last entry, plus the principal eigenvector."""
    n = V.shape[0]
    w, U = np.linalg.eigh(V)
    w = np.clip(w, 0.0, None)
    L = U * np.sqrt(w)[None, :]
    rng = np.random.default_rng(seed)
    Z = (rng.standard_normal((n_gr, n)) + 1j * rng.standard_normal((n_gr, n))) / np.sqrt(2.0)
    draws = Z @ L.T
    cands = [draws]
    lead = U[:, np.argmax(w)]
    if abs(lead[-1]) > 1e-12:
        cands.append(lead[None, :])
    raw = np.concatenate(cands, axis=0)
    ref = raw[:, -1:]
    ok = np.abs(ref[:, 0]) > 0
    raw = raw[ok]
    return np.exp(1j * np.angle(raw / raw[:, -1:]))


def _best_candidate(cands: np.ndarray, targets: list[tuple[np.ndarray, float]]):
    """Per-candidate required power P0 = max_i thr_i / ||F_i v||^2; returns the
    minimizer (first on ties)."""
    P0 = np.zeros(cands.shape[0])
    for F, thr in targets:
        gains = np.sum(np.abs(cands @ F.T) ** 2, axis=1)  # row i is |F v_i|^2
        P0 = np.maximum(P0, thr / np.maximum(gains, 1e-300))
    best = int(np.argmin(P0))
    return cands[best], float(P0[best])


def _collect_targets(beta, channels: ChannelSet, req: Requirements, target=None):
    """(F, threshold) pairs for the requested targets; flags unreachable points."""
    pairs, unreachable = [], []
    if target is None:
        wanted = [("s", p) for p in range(channels.P)] + [("c", q) for q in range(channels.Q)]
    else:
        wanted = [target]
    for kind, idx in wanted:
        if kind == "s":
            F, thr, name = sensing_selection_matrix(beta, channels, idx), req.P_s, f"sp{idx}"
        else:
            F, thr, name = comm_selection_matrix(beta, channels, idx), req.sigma_c2 * req.Gamma_c, f"cp{idx}"
        if np.max(np.abs(F)) == 0.0:
            unreachable.append(name)
        pairs.append((F, thr))
    return pairs, unreachable


def solve_reflective_subproblem(
    beta, channels: ChannelSet, req: Requirements, seed=0, n_gr: int = N_GR_DEFAULT,
    target=None,
) -> ReflectiveSolution:
    """Minimum-power reflective beamforming for a fixed binary deployment.

    With ``target`` set to ("s", p) or ("c", q) this solves the single-point
    subproblem used in the dynamic-reflection case, otherwise all P+Q
    constraints are enforced jointly.
    """
    targets, unreachable = _collect_targets(beta, channels, req, target)
    if unreachable:
        return ReflectiveSolution(False, "unreachable", unreachable=unreachable)
    n = channels.K * channels.M + 1
    quad_targets = [(F.conj().T @ F, thr) for F, thr in targets]
    out, status = _solve_sdr(quad_targets, n)
    if out is None:
        return ReflectiveSolution(False, "sdr_infeasible")
    V, s = out
    if s <= 0.0:
        return ReflectiveSolution(False, "unreachable",
                                  unreachable=[f"target{i}" for i in range(len(targets))])
    cands = _randomize(V, n_gr, seed)
    v_bar, P0 = _best_candidate(cands, targets)
    sol = ReflectiveSolution(
        feasible=P0 <= req.P0_max * (1.0 + _BUDGET_SLACK),
        v=v_bar[:-1],
        P0=P0,
        sdr_P0=1.0 / s,
    )
    if not sol.feasible:
        sol.reason = "over_budget"
    return sol


def solve_point_subproblem(beta, channels: ChannelSet, req: Requirements, target,
                           seed=0, n_gr: int = N_GR_DEFAULT) -> ReflectiveSolution:
    """Single-constraint variant: best reflective vector for one SP or CP,
    with ``target`` = ("s", p) or ("c", q)."""
    return solve_reflective_subproblem(beta, channels, req, seed=seed, n_gr=n_gr, target=target)


def init_binary(beta_relaxed, snap: float = SNAP_TOL) -> np.ndarray:
    """Relaxed weights -> starting binary pattern: snapped zeros stay zero,
    everything else becomes one."""
    b = np.asarray(beta_relaxed, dtype=float)
    if np.any(b < -1e-9) or np.any(b > 1.0 + 1e-9):
        raise InfeasibleError("relaxed beta outside [0, 1]")
    return (b > snap).astype(float)


@dataclass
class RoundingState:
    """Bookkeeping of the greedy removal search."""

    beta: np.ndarray
    ordering: list  # candidate indices, ascending relaxed weight
    candidates: list = field(default_factory=list)  # (beta, phases, P0, cost)


def _solve_for_beta(beta, channels, req, case_tag, seed, n_gr, step):
    """Reflective beamforming + required power for one binary pattern.

    Returns (phases, P0, feasible). Case II solves one subproblem per point and
    takes the worst per-point power.
    """
    if case_tag == "I":
        sub_seed = np.random.SeedSequence([seed, step, 0]).generate_state(1)[0]
        sol = solve_reflective_subproblem(beta, channels, req, seed=sub_seed, n_gr=n_gr)
        return sol.v, sol.P0, sol.feasible
    KM = channels.K * channels.M
    vs = np.ones((channels.P, KM), dtype=complex)
    vc = np.ones((channels.Q, KM), dtype=complex)
    P0 = 0.0
    for j, (kind, count) in enumerate((("s", channels.P), ("c", channels.Q))):
        for idx in range(count):
            sub_seed = np.random.SeedSequence([seed, step, j + 1, idx]).generate_state(1)[0]
            sol = solve_reflective_subproblem(
                beta, channels, req, seed=sub_seed, n_gr=n_gr, target=(kind, idx)
            )
            if not sol.feasible:
                return None, np.inf, False
            (vs if kind == "s" else vc)[idx] = sol.v
            P0 = max(P0, sol.P0)
    return (vs, vc), P0, P0 <= req.P0_max * (1.0 + _BUDGET_SLACK)


def greedy_round(
    beta_relaxed,
    channels: ChannelSet,
    req: Requirements,
    weights: CostWeights,
    case_tag: str = "I",
    seed: int = 0,
    n_gr: int = N_GR_DEFAULT,
    snap: float = SNAP_TOL,
) -> DeploymentPlan:
    """Greedy removal search over the non-zero relaxed weights.

    Walks the non-zero weights in ascending order, keeps each removal that
    stays feasible, records every feasible pattern met along the way, and
    returns the recorded candidate with minimum cost (re-verified by the exact
    metrics before returning).
    """
    beta = init_binary(beta_relaxed, snap=snap)
    relaxed = np.asarray(beta_relaxed, dtype=float)
    nonzero = [k for k in range(len(beta)) if beta[k] == 1.0]
    # ascending relaxed weight, ties broken by lower index
    ordering = sorted(nonzero, key=lambda k: (relaxed[k], k))
    state = RoundingState(beta=beta.copy(), ordering=ordering)

    phases, P0, feasible = _solve_for_beta(beta, channels, req, case_tag, seed, n_gr, step=0)
    if feasible:
        state.candidates.append((beta.copy(), phases, P0, float(weights.w1 * beta.sum() + weights.w2 * P0)))

    for i, k in enumerate(ordering, start=1):
        state.beta[k] = 0.0
        phases, P0, feasible = _solve_for_beta(state.beta, channels, req, case_tag, seed, n_gr, step=i)
        if feasible:
            cost = float(weights.w1 * state.beta.sum() + weights.w2 * P0)
            state.candidates.append((state.beta.copy(), phases, P0, cost))
        else:
            state.beta[k] = 1.0  # restore and move on

    if not state.candidates:
        raise InfeasibleError("no feasible deployment within the power budget")
    best = min(state.candidates, key=lambda c: c[3])
    plan = make_plan(best[0], best[1], best[2], weights, case_tag)
    check = verify_plan(plan, channels, req)
    if not check["feasible"]:
        raise InfeasibleError("rounded plan failed the metrics feasibility re-check")
    return plan
