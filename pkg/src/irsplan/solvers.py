"""Convex solver contracts: a QCQP solver, a small-scale SDP solver, and
complex<->real embedding utilities.

Both solvers are thin, certified fronts over cvxpy (Clarabel for cone
programs, SCS for SDPs): every returned solution is re-checked for primal
feasibility outside the solver, and a failed check is reported as an error
rather than a silently wrong answer. Inputs are deterministic, so repeated
solves return identical results.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import cvxpy as cp
import warnings

import numpy as np
import scipy.sparse as sp

from .errors import IrsPlanError, SolverError

SDP_SIZE_LIMIT = 200  # desk-scale guard: reject SDPs above this matrix order

_PSD_TOL = 1e-9


def _as_matrix(P):
    return P.toarray() if sp.issparse(P) else np.asarray(P, dtype=float)


def _check_psd_matrix(P, what: str) -> None:
    if sp.issparse(P) and (P - sp.diags(P.diagonal())).nnz == 0:
        if np.min(P.diagonal(), initial=0.0) < -_PSD_TOL:
            raise IrsPlanError(f"{what} must be positive semidefinite")
        return
    M = _as_matrix(P)
    w = np.linalg.eigvalsh(0.5 * (M + M.T))
    scale = max(abs(w[-1]), 1.0)
    if w[0] < -_PSD_TOL * scale:
        raise IrsPlanError(f"{what} must be positive semidefinite")


@dataclass(frozen=True)
class QuadConstraint:
    """0.5 x^T P x + q^T x + r <= 0 with P PSD (dense or sparse)."""

    P: object
    q: np.ndarray
    r: float


@dataclass(frozen=True)
class SocConstraint:
    """||A x + b|| <= c^T x + d."""

    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: float


@dataclass(frozen=True)
class BoxConstraint:
    """Elementwise lo <= x <= hi; +-inf entries disable a bound."""

    lo: np.ndarray
    hi: np.ndarray


@dataclass(frozen=True)
class ConvexQP:
    """Convex quadratic objective with quadratic / second-order-cone / box constraints."""

    n: int
    P: object = None  # objective Hessian (PSD) or None for a linear objective
    q: np.ndarray = None
    r: float = 0.0
    constraints: tuple = ()

    def validate(self) -> None:
        if self.P is not None:
            _check_psd_matrix(self.P, "objective Hessian")
        for c in self.constraints:
            if isinstance(c, QuadConstraint):
                _check_psd_matrix(c.P, "constraint Hessian")


@dataclass(frozen=True)
class SDProblem:
    """minimize trace(C X) s.t. trace(A_i X) {>=,==} b_i, X PSD (real symmetric)."""

    C: np.ndarray
    constraints: tuple  # of (A, op, b) with op in {">=", "=="}

    @property
    def n(self) -> int:
        return self.C.shape[0]

    def validate(self) -> None:
        if not np.allclose(self.C, self.C.T, atol=1e-12):
            raise IrsPlanError("SDP cost matrix must be symmetric")
        for A, op, _ in self.constraints:
            if op not in (">=", "=="):
                raise IrsPlanError(f"unknown constraint op {op!r}")
            if not np.allclose(_as_matrix(A), _as_matrix(A).T, atol=1e-12):
                raise IrsPlanError("SDP constraint matrices must be symmetric")


@dataclass
class Solution:
    x: np.ndarray
    objective: float
    status: str  # optimal | infeasible | unbounded | max_iterations
    duals: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.status == "optimal"


def _quad_expr(x, P, q, r):
    terms = []
    if P is not None:
        diag_only = sp.issparse(P) and (P - sp.diags(P.diagonal())).nnz == 0
        if not diag_only and not sp.issparse(P):
            M = np.asarray(P)
            diag_only = np.count_nonzero(M - np.diag(np.diagonal(M))) == 0
        if diag_only:
            d = np.asarray(P.diagonal() if sp.issparse(P) else np.diagonal(np.asarray(P)))
            # restrict to the support so canonicalization stays proportional
            # to the entries actually involved, not the full variable length
            nz = np.flatnonzero(d)
            if nz.size:
                terms.append(0.5 * cp.sum(cp.multiply(d[nz], cp.square(x[nz]))))
        else:
            terms.append(0.5 * cp.quad_form(x, _as_matrix(P), assume_PSD=True))
    if q is not None:
        terms.append(np.asarray(q, float) @ x)
    terms.append(float(r))
    return sum(terms)


def _map_status(status: str) -> str:
    # "inaccurate" optima are still candidates: acceptance is decided by our
    # own feasibility residual, never by the solver's self-assessment
    if status in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE):
        return "optimal"
    if status in (cp.INFEASIBLE, cp.INFEASIBLE_INACCURATE):
        return "infeasible"
    if status in (cp.UNBOUNDED, cp.UNBOUNDED_INACCURATE):
        return "unbounded"
    return "max_iterations"


def qp_feasibility_residual(problem: ConvexQP, x: np.ndarray) -> float:
    """Worst constraint violation at x, computed independently of the solver."""
    worst = 0.0
    for c in problem.constraints:
        if isinstance(c, QuadConstraint):
            val = 0.5 * float(x @ (_as_matrix(c.P) @ x)) + float(np.asarray(c.q) @ x) + c.r
            worst = max(worst, val)
        elif isinstance(c, SocConstraint):
            lhs = float(np.linalg.norm(c.A @ x + c.b))
            rhs = float(np.asarray(c.c) @ x + c.d)
            worst = max(worst, lhs - rhs)
        elif isinstance(c, BoxConstraint):
            worst = max(worst, float(np.max(np.maximum(c.lo - x, x - c.hi), initial=0.0)))
    return worst


def solve_convex(problem: ConvexQP, tol: float = 1e-6) -> Solution:
    problem.validate()
    x = cp.Variable(problem.n)
    cons = []
    for c in problem.constraints:
        if isinstance(c, QuadConstraint):
            cons.append(_quad_expr(x, c.P, c.q, c.r) <= 0)
        elif isinstance(c, SocConstraint):
            cons.append(cp.SOC(np.asarray(c.c, float) @ x + c.d, c.A @ x + np.asarray(c.b, float)))
        elif isinstance(c, BoxConstraint):
            lo, hi = np.asarray(c.lo, float), np.asarray(c.hi, float)
            m = np.isfinite(lo)
            if m.any():
                cons.append(x[m] >= lo[m])
            m = np.isfinite(hi)
            if m.any():
                cons.append(x[m] <= hi[m])
        else:
            raise IrsPlanError(f"unknown constraint type {type(c).__name__}")
    obj = cp.Minimize(_quad_expr(x, problem.P, problem.q, problem.r))
    prob = cp.Problem(obj, cons)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UserWarning)
            prob.solve(solver=cp.CLARABEL)
    except cp.error.SolverError as exc:
        raise SolverError("error", str(exc)) from None
    status = _map_status(prob.status)
    if x.value is None:
        return Solution(x=None, objective=np.inf, status=status)
    xv = np.asarray(x.value, float).ravel()
    resid = qp_feasibility_residual(problem, xv)
    scale = 1.0 + abs(float(prob.value))
    if status == "optimal" and resid > tol * scale:
        raise SolverError("inaccurate", f"feasibility residual {resid:.2e} exceeds tolerance")
    return Solution(x=xv, objective=float(prob.value), status=status)


def sdp_feasibility_residual(problem: SDProblem, X: np.ndarray) -> float:
    """Worst violation of trace constraints and PSD-ness (scaled)."""
    worst = max(0.0, -float(np.linalg.eigvalsh(0.5 * (X + X.T))[0]))
    for A, op, b in problem.constraints:
        val = float(np.tensordot(_as_matrix(A), X))
        scale = 1.0 + abs(b)
        if op == ">=":
            worst = max(worst, (b - val) / scale)
        else:
            worst = max(worst, abs(val - b) / scale)
    return worst


def solve_sdp(problem: SDProblem, tol: float = 1e-6) -> Solution:
    problem.validate()
    n = problem.n
    if n > SDP_SIZE_LIMIT:
        raise IrsPlanError(
            f"SDP of order {n} exceeds the desk-scale limit {SDP_SIZE_LIMIT}; "
            "reduce the problem (e.g. fewer reflecting elements)"
        )
    X = cp.Variable((n, n), PSD=True)
    cons = []
    for A, op, b in problem.constraints:
        expr = cp.trace(cp.Constant(_as_matrix(A)) @ X)
        cons.append(expr >= b if op == ">=" else expr == b)
    prob = cp.Problem(cp.Minimize(cp.trace(cp.Constant(problem.C) @ X)), cons)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UserWarning)
            prob.solve(solver=cp.SCS, eps=min(tol * 1e-2, 1e-7))
    except cp.error.SolverError as exc:
        raise SolverError("error", str(exc)) from None
    status = _map_status(prob.status)
    if X.value is None:
        return Solution(x=None, objective=np.inf, status=status)
    Xv = 0.5 * (np.asarray(X.value) + np.asarray(X.value).T)
    resid = sdp_feasibility_residual(problem, Xv)
    if status == "optimal" and resid > tol * max(1.0, float(np.trace(Xv))):
        raise SolverError("inaccurate", f"SDP residual {resid:.2e} exceeds tolerance")
    duals = [np.asarray(c.dual_value) if c.dual_value is not None else None for c in cons]
    return Solution(x=Xv, objective=float(prob.value), status=status, duals=duals)


def complex_embed(H: np.ndarray) -> np.ndarray:
    """Standard [[Re,-Im],[Im,Re]] real embedding of a complex matrix."""
    H = np.atleast_2d(np.asarray(H, dtype=complex))
    return np.block([[H.real, -H.imag], [H.imag, H.real]])


def complex_extract(X: np.ndarray) -> np.ndarray:
    """Inverse of complex_embed (exact round trip)."""
    X = np.asarray(X, dtype=float)
    m2, n2 = X.shape
    m, n = m2 // 2, n2 // 2
    re = 0.5 * (X[:m, :n] + X[m:, n:])
    im = 0.5 * (X[m:, :n] - X[:m, n:])
    return re + 1j * im


def structure_average(X: np.ndarray) -> np.ndarray:
    """Project a real 2n x 2n matrix onto the complex-embedding structure.

    For SDP data built entirely from embeddings, the objective and constraints
    are invariant under this projection, so a structured optimum can be read
    off any real optimum.
    """
    n = X.shape[0] // 2
    A, B = X[:n, :n], X[:n, n:]
    C, D = X[n:, :n], X[n:, n:]
    Ah = 0.5 * (A + D)
    Ch = 0.5 * (C - B)
    return np.block([[Ah, -Ch], [Ch, Ah]])
