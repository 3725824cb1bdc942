"""Successive convex approximation for the relaxed joint deployment problem.

The non-convex coverage constraints are replaced by quadratic majorizers
expanded at the current iterate; each step solves one convex QCQP over the
stacked real parametrization [Re(v), Im(v), beta] plus the substituted
inverse-power variable t = 1/P0 and its epigraph s >= 1/t.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .channel import ChannelSet
from .errors import InfeasibleError, SolverError
from .metrics import (
    CostWeights,
    Requirements,
    effective_comm_vector,
    effective_sensing_vector,
    required_power,
)
from .rounding import N_GR_DEFAULT, solve_reflective_subproblem
from .solvers import BoxConstraint, ConvexQP, QuadConstraint, SocConstraint, solve_convex

MU_FLOOR = 1e-12


def _block_matrix(channels: ChannelSet, target) -> list[np.ndarray]:
    """Per-site mixing matrices A_k = H0k^H diag(c_k) for the given target."""
    kind, idx = target
    vecs = channels.gkp[:, idx, :] if kind == "s" else channels.hkq[:, idx, :]
    return [channels.H0k[k].conj().T * vecs[k][None, :] for k in range(channels.K)]


def eval_f(channels: ChannelSet, beta, v, target):
    """Negative squared effective-channel norm and its gradient.

    The gradient is over the stacked real vector [Re(v), Im(v), beta]
    (length 2*K*M + K).
    """
    kind, idx = target
    K, M = channels.K, channels.M
    v = np.asarray(v, dtype=complex)
    blocks = _block_matrix(channels, target)
    if kind == "s":
        u = effective_sensing_vector(beta, v, channels, idx)
    else:
        u = effective_comm_vector(beta, v, channels, idx)
    f = -float(np.vdot(u, u).real)
    gv = np.zeros(K * M, dtype=complex)
    gb = np.zeros(K)
    for k in range(K):
        Ak = blocks[k]
        gv[k * M:(k + 1) * M] = -2.0 * beta[k] * (Ak.conj().T @ u)
        gb[k] = -2.0 * float((np.conj(Ak @ v[k * M:(k + 1) * M]) @ u).real)
    grad = np.concatenate([gv.real, gv.imag, gb])
    return f, grad


def estimate_mu(channels: ChannelSet, target) -> float:
    """Descent-lemma curvature: 4(1+M) * (sum_k ||A_k||_2)^2, floored at MU_FLOOR."""
    M = channels.M
    total = 0.0
    for Ak in _block_matrix(channels, target):
        total += float(np.linalg.norm(Ak, 2))
    mu = 4.0 * (1.0 + M) * total ** 2
    return max(mu, MU_FLOOR)


@dataclass(frozen=True)
class Surrogate:
    """Quadratic majorizer of one coverage constraint function at x0."""

    target: tuple
    x0: np.ndarray  # stacked [Re v, Im v, beta] expansion point
    f0: float
    grad: np.ndarray
    mu: float
    threshold: float  # P_s for SPs, sigma_c2 * Gamma_c for CPs

    def value(self, x: np.ndarray) -> float:
        d = x - self.x0
        return self.f0 + float(self.grad @ d) + 0.5 * self.mu * float(d @ d)


def make_surrogate(channels: ChannelSet, beta, v, target, mu: float, req: Requirements) -> Surrogate:
    f0, grad = eval_f(channels, beta, v, target)
    x0 = np.concatenate([np.real(v), np.imag(v), np.asarray(beta, float)])
    thr = req.P_s if target[0] == "s" else req.sigma_c2 * req.Gamma_c
    return Surrogate(target=target, x0=x0, f0=f0, grad=grad, mu=mu, threshold=thr)


@dataclass(frozen=True)
class SubproblemLayout:
    """Index bookkeeping for the stacked QCQP variable."""

    K: int
    KM: int
    n_blocks: int  # 1 (case I) or P+Q (case II)

    @property
    def beta_off(self) -> int:
        return 2 * self.KM * self.n_blocks

    @property
    def t_idx(self) -> int:
        return self.beta_off + self.K

    @property
    def s_idx(self) -> int:
        return self.t_idx + 1

    @property
    def n(self) -> int:
        return self.s_idx + 1

    def v_slice(self, block: int) -> tuple[int, int]:
        return 2 * self.KM * block, 2 * self.KM * (block + 1)


def build_subproblem(
    surrogates: list[Surrogate],
    layout: SubproblemLayout,
    req: Requirements,
    weights: CostWeights,
) -> ConvexQP:
    """Convex QCQP of one SCA step.

    Surrogate i lives on v-block i (or the single shared block in case I) and
    the shared beta; t = 1/P0 with t >= 1/P0_max; the objective's power term is
    w2 * s with the hyperbolic cone s*t >= 1.
    """
    n = layout.n
    KM, K = layout.KM, layout.K
    constraints = []

    for i, s in enumerate(surrogates):
        block = 0 if layout.n_blocks == 1 else i
        lo, hi = layout.v_slice(block)
        idx = np.concatenate([np.arange(lo, hi), np.arange(layout.beta_off, layout.beta_off + K)])
        # the raw constraint (surrogate + thr*t <= 0) lives at the threshold's
        # scale, many orders below the solver's absolute tolerance; divide it
        # through by thr so violations are measured relative to the threshold
        diag = np.zeros(n)
        diag[idx] = s.mu / s.threshold
        q = np.zeros(n)
        q[idx] = (s.grad - s.mu * s.x0) / s.threshold
        q[layout.t_idx] = 1.0
        r = (s.f0 - float(s.grad @ s.x0) + 0.5 * s.mu * float(s.x0 @ s.x0)) / s.threshold
        # row-normalize to unit peak coefficient: the curvature term can sit
        # many orders above the O(1) disc/box rows, and that spread alone can
        # sink the interior-point solver; the constraint set is unchanged
        scale = max(float(np.max(diag)), float(np.max(np.abs(q))), abs(r), 1.0)
        constraints.append(QuadConstraint(P=sp.diags(diag / scale), q=q / scale, r=r / scale))

    # unit-disc relaxation of every reflective element, per block
    for block in range(layout.n_blocks):
        lo, _ = layout.v_slice(block)
        for i in range(KM):
            diag = np.zeros(n)
            diag[lo + i] = 2.0
            diag[lo + KM + i] = 2.0
            constraints.append(QuadConstraint(P=sp.diags(diag), q=np.zeros(n), r=-1.0))

    lo_b = np.full(n, -np.inf)
    hi_b = np.full(n, np.inf)
    lo_b[:layout.beta_off] = -1.0
    hi_b[:layout.beta_off] = 1.0
    lo_b[layout.beta_off:layout.beta_off + K] = 0.0
    hi_b[layout.beta_off:layout.beta_off + K] = 1.0
    lo_b[layout.t_idx] = 1.0 / req.P0_max
    lo_b[layout.s_idx] = 0.0
    constraints.append(BoxConstraint(lo=lo_b, hi=hi_b))

    # s * t >= 1  <=>  ||(2, s - t)|| <= s + t
    A = np.zeros((2, n))
    A[1, layout.s_idx] = 1.0
    A[1, layout.t_idx] = -1.0
    b = np.array([2.0, 0.0])
    c = np.zeros(n)
    c[layout.s_idx] = 1.0
    c[layout.t_idx] = 1.0
    constraints.append(SocConstraint(A=A, b=b, c=c, d=0.0))

    q_obj = np.zeros(n)
    q_obj[layout.beta_off:layout.beta_off + K] = weights.w1
    q_obj[layout.s_idx] = weights.w2
    return ConvexQP(n=n, q=q_obj, constraints=tuple(constraints))


@dataclass
class ScaOptions:
    max_iters: int = 100
    tol: float = 1e-4  # relative objective decrease threshold
    consecutive: int = 3  # plateau length that triggers convergence
    mu_safety: float = 1.0
    mu_shrink: float = 0.5  # relax curvature after accepted steps (1.0 disables)
    max_doublings: int = 10
    snap: float = 1e-3
    seed: int = 0
    n_gr: int = N_GR_DEFAULT
    # intermediate iterates only steer the search (final plans are re-verified
    # exactly), so the subproblem residual gate can be loose
    qp_tol: float = 1e-4
    trace_path: str | None = None
    on_iterate: object = None  # callback(iteration, surrogates, x_new, objective)


@dataclass
class RelaxedSolution:
    beta_relaxed: np.ndarray
    phases: object  # (KM,) vector for case I, (vs, vc) arrays for case II
    P0: float
    objective_trace: list
    iterations: int
    case_tag: str


def _targets(channels: ChannelSet):
    return [("s", p) for p in range(channels.P)] + [("c", q) for q in range(channels.Q)]


def _initial_point(channels, req, case_tag, seed, n_gr):
    beta0 = np.ones(channels.K)
    joint = solve_reflective_subproblem(beta0, channels, req, seed=seed, n_gr=n_gr)
    if case_tag == "I":
        if not joint.feasible:
            raise InfeasibleError(
                "requirements cannot be met even with every candidate IRS deployed"
            )
        return beta0, [joint.v]
    if joint.feasible:
        # a jointly feasible vector is per-point feasible; start every block
        # from it and let the descent specialize them
        return beta0, [joint.v.copy() for _ in _targets(channels)]
    vs = []
    for target in _targets(channels):
        sol = solve_reflective_subproblem(beta0, channels, req, seed=seed, n_gr=n_gr, target=target)
        if not sol.feasible:
            raise InfeasibleError(
                f"requirements cannot be met at {target} even with full deployment"
            )
        vs.append(sol.v)
    return beta0, vs


def _phases_from_blocks(blocks, channels, case_tag):
    if case_tag == "I":
        return blocks[0]
    P = channels.P
    return (np.asarray(blocks[:P]), np.asarray(blocks[P:]))


def solve_relaxed(
    channels: ChannelSet,
    req: Requirements,
    weights: CostWeights,
    case_tag: str = "I",
    options: ScaOptions | None = None,
) -> RelaxedSolution:
    """SCA descent on the relaxed joint deployment problem.

    Starts from full deployment with SDR-initialized reflective vectors,
    iterates majorize-and-solve steps with a backtracking (mu-doubling) guard,
    and returns the converged relaxed weights plus the objective trace.
    """
    opt = options or ScaOptions()
    targets = _targets(channels)
    KM = channels.K * channels.M
    n_blocks = 1 if case_tag == "I" else len(targets)
    layout = SubproblemLayout(K=channels.K, KM=KM, n_blocks=n_blocks)

    beta, v_blocks = _initial_point(channels, req, case_tag, opt.seed, opt.n_gr)
    mus = [opt.mu_safety * estimate_mu(channels, t) for t in targets]

    def block_of(i):
        return 0 if case_tag == "I" else i

    def objective(beta_, blocks_):
        P0 = required_power(beta_, _phases_from_blocks(blocks_, channels, case_tag), channels, req)
        return float(weights.w1 * np.sum(beta_) + weights.w2 * P0), P0

    obj, P0 = objective(beta, v_blocks)
    trace = [obj]
    plateau = 0
    iterations = 0

    for it in range(1, opt.max_iters + 1):
        surrogates = [
            make_surrogate(channels, beta, v_blocks[block_of(i)], t, mus[i], req)
            for i, t in enumerate(targets)
        ]
        accepted = False
        for _ in range(opt.max_doublings + 1):
            qp = build_subproblem(surrogates, layout, req, weights)
            try:
                sol = solve_convex(qp, tol=opt.qp_tol)
            except SolverError:
                sol = None
            if sol is None or not sol.ok:
                mus = [2.0 * m for m in mus]
                surrogates = [
                    make_surrogate(channels, beta, v_blocks[block_of(i)], t, mus[i], req)
                    for i, t in enumerate(targets)
                ]
                continue
            x = sol.x
            new_blocks = []
            for blk in range(n_blocks):
                lo, hi = layout.v_slice(blk)
                re = x[lo:lo + KM]
                im = x[lo + KM:hi]
                new_blocks.append(re + 1j * im)
            new_beta = np.clip(x[layout.beta_off:layout.beta_off + layout.K], 0.0, 1.0)
            # re-verify majorization at the accepted point; double mu on violation
            violated = []
            for i, (t, s) in enumerate(zip(targets, surrogates)):
                f_new, _ = eval_f(channels, new_beta, new_blocks[block_of(i)], t)
                x_new = np.concatenate(
                    [np.real(new_blocks[block_of(i)]), np.imag(new_blocks[block_of(i)]), new_beta]
                )
                if f_new > s.value(x_new) + 1e-9 * max(1.0, abs(f_new)):
                    violated.append(i)
            if violated:
                for i in violated:
                    mus[i] *= 2.0
                surrogates = [
                    make_surrogate(channels, beta, v_blocks[block_of(i)], t, mus[i], req)
                    for i, t in enumerate(targets)
                ]
                continue
            accepted = True
            break
        if not accepted:
            raise SolverError("majorization", "majorization failed after max mu doublings")

        new_obj, new_P0 = objective(new_beta, new_blocks)
        if new_obj > obj + 1e-9:
            # numerically ascending step: treat as converged, keep old point
            break
        if new_obj > obj:
            new_obj = obj  # guard sub-1e-9 solver noise so the trace stays monotone
        else:
            beta, v_blocks, P0 = new_beta, new_blocks, new_P0
        rel = (obj - new_obj) / max(abs(obj), 1e-12)
        obj = new_obj
        trace.append(obj)
        iterations = it
        if opt.on_iterate is not None:
            opt.on_iterate(it, surrogates, (new_beta, new_blocks), obj)
        plateau = plateau + 1 if rel < opt.tol else 0
        if plateau >= opt.consecutive:
            break
        # the descent-lemma curvature is very conservative; relax it while the
        # majorization check keeps passing (violations double it back up)
        mus = [max(m * opt.mu_shrink, MU_FLOOR) for m in mus]

    beta = beta.copy()
    beta[beta < opt.snap] = 0.0

    if opt.trace_path:
        with open(opt.trace_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["iteration", "objective"])
            for i, val in enumerate(trace):
                writer.writerow([i, repr(val)])

    return RelaxedSolution(
        beta_relaxed=beta,
        phases=_phases_from_blocks(v_blocks, channels, case_tag),
        P0=P0,
        objective_trace=trace,
        iterations=iterations,
        case_tag=case_tag,
    )
