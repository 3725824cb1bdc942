"""SCA surrogates and the relaxed descent loop.

[DERIVED] oracles: central finite differences for gradients, direct evaluation
for tangency/majorization, spectral-norm arithmetic for the curvature recipe.
"""

import numpy as np
import pytest

from irsplan.metrics import CostWeights, Requirements, required_power
from irsplan.sca import (
    MU_FLOOR,
    ScaOptions,
    SubproblemLayout,
    build_subproblem,
    estimate_mu,
    eval_f,
    make_surrogate,
    solve_relaxed,
)
from irsplan.solvers import qp_feasibility_residual

from conftest import SIGMA2, calibrated_requirements, make_channels


def stacked(beta, v):
    return np.concatenate([np.real(v), np.imag(v), np.asarray(beta, float)])


def random_point(rng, K, M):
    """Random point inside the relaxed feasible box."""
    v = (rng.uniform(-1, 1, K * M) + 1j * rng.uniform(-1, 1, K * M)) / np.sqrt(2)
    beta = rng.uniform(0, 1, K)
    return beta, v


class TestSurrogate:
    def test_tangency(self):
        # [DERIVED] surrogate value equals f at the expansion point, abs < 1e-10.
        rng = np.random.default_rng(0)
        for trial in range(20):
            ch = make_channels(trial, K=3, M=4, Nt=3, P=3, Q=3)
            beta, v = random_point(rng, 3, 4)
            req = Requirements(1e-13, 2.0, SIGMA2, 1.0)
            for target in (("s", 1), ("c", 2)):
                s = make_surrogate(ch, beta, v, target, estimate_mu(ch, target), req)
                f0, _ = eval_f(ch, beta, v, target)
                assert abs(s.value(stacked(beta, v)) - f0) < 1e-10

    def test_gradient_matches_central_differences(self):
        # [DERIVED] 50 random instances, relative error < 1e-5 against a
        # central finite-difference of f over [Re v, Im v, beta].
        rng = np.random.default_rng(1)
        h = 1e-6
        for trial in range(50):
            K, M, Nt = 2, 3, 2
            ch = make_channels(1000 + trial, K=K, M=M, Nt=Nt, P=2, Q=2)
            beta, v = random_point(rng, K, M)
            target = ("s", trial % 2) if trial % 3 else ("c", trial % 2)

            def f_of(x):
                vv = x[:K * M] + 1j * x[K * M:2 * K * M]
                bb = x[2 * K * M:]
                return eval_f(ch, bb, vv, target)[0]

            x0 = stacked(beta, v)
            _, grad = eval_f(ch, beta, v, target)
            fd = np.empty_like(x0)
            for i in range(x0.size):
                xp, xm = x0.copy(), x0.copy()
                xp[i] += h
                xm[i] -= h
                fd[i] = (f_of(xp) - f_of(xm)) / (2 * h)
            denom = max(np.linalg.norm(fd), 1e-30)
            assert np.linalg.norm(grad - fd) / denom < 1e-5

    def test_mu_scalar_case(self):
        # [DERIVED] K = M = Nt = 1: A is a scalar a, so the recipe gives
        # mu = 4*(1+1)*|a|^2 = 8|a|^2.
        ch = make_channels(3, K=1, M=1, Nt=1, P=1, Q=1)
        a = (ch.H0k[0].conj().T * ch.gkp[0, 0][None, :])[0, 0]
        assert estimate_mu(ch, ("s", 0)) == pytest.approx(8 * abs(a) ** 2, rel=1e-12)
        assert estimate_mu(ch, ("s", 0)) >= MU_FLOOR

    def test_majorization_on_feasible_box(self):
        # [DERIVED] f(x) <= surrogate(x) at 100 random feasible points for the
        # descent-lemma curvature.
        rng = np.random.default_rng(4)
        ch = make_channels(4, K=3, M=4, Nt=3, P=2, Q=2)
        beta0, v0 = random_point(rng, 3, 4)
        req = Requirements(1e-13, 2.0, SIGMA2, 1.0)
        for target in (("s", 0), ("c", 1)):
            s = make_surrogate(ch, beta0, v0, target, estimate_mu(ch, target), req)
            for _ in range(100):
                beta, v = random_point(rng, 3, 4)
                f, _ = eval_f(ch, beta, v, target)
                assert f <= s.value(stacked(beta, v)) + 1e-12 * max(1.0, abs(f))


class TestSubproblem:
    def test_expansion_point_feasible(self):
        # [DERIVED] the current iterate with t = 1/P0(current) satisfies every
        # constraint of the QCQP it spawns.
        rng = np.random.default_rng(5)
        ch = make_channels(5, K=3, M=4, Nt=3, P=3, Q=3, direct_frac=1.0)
        req = calibrated_requirements(ch, margin=50.0)
        beta = np.ones(3)
        v = np.exp(1j * rng.uniform(0, 2 * np.pi, 12))
        targets = [("s", p) for p in range(3)] + [("c", q) for q in range(3)]
        surrogates = [
            make_surrogate(ch, beta, v, t, estimate_mu(ch, t), req) for t in targets
        ]
        layout = SubproblemLayout(K=3, KM=12, n_blocks=1)
        qp = build_subproblem(surrogates, layout, req, CostWeights())
        p0 = required_power(beta, v, ch, req)
        x = np.zeros(layout.n)
        x[:12] = v.real
        x[12:24] = v.imag
        x[layout.beta_off:layout.beta_off + 3] = beta
        x[layout.t_idx] = 1.0 / p0
        x[layout.s_idx] = p0
        assert qp_feasibility_residual(qp, x) <= 1e-9


class TestSolveRelaxed:
    def test_monotone_descent_and_convergence(self, tmp_path):
        # [DERIVED] the objective trace never increases (within 1e-9) and the
        # loop converges within the iteration budget on synthetic instances.
        ch = make_channels(42, K=4, M=4, Nt=3, P=4, Q=4)
        req = calibrated_requirements(ch, margin=40.0)
        trace_file = tmp_path / "trace.csv"
        opts = ScaOptions(seed=0, n_gr=50, trace_path=str(trace_file))
        sol = solve_relaxed(ch, req, CostWeights(1.0, 0.0), "I", opts)
        tr = np.asarray(sol.objective_trace)
        assert np.all(np.diff(tr) <= 1e-9)
        assert sol.iterations <= opts.max_iters
        assert tr[-1] <= tr[0]
        assert np.all(sol.beta_relaxed >= 0) and np.all(sol.beta_relaxed <= 1)
        assert sol.P0 <= req.P0_max * (1 + 1e-9)
        assert trace_file.exists()
        rows = trace_file.read_text().strip().splitlines()
        assert len(rows) == len(tr) + 1  # header + one row per trace entry

    def test_deterministic(self):
        # [TRIVIAL] identical options give identical runs.
        ch = make_channels(43, K=3, M=3, Nt=2, P=3, Q=3)
        req = calibrated_requirements(ch, margin=40.0)
        a = solve_relaxed(ch, req, CostWeights(), "I", ScaOptions(seed=1, n_gr=50))
        b = solve_relaxed(ch, req, CostWeights(), "I", ScaOptions(seed=1, n_gr=50))
        assert np.array_equal(a.beta_relaxed, b.beta_relaxed)
        assert a.objective_trace == b.objective_trace
