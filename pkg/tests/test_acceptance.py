"""Acceptance criteria: twelve end-to-end checks, one printed verdict each.

Each test prints exactly one ``criterion NN: PASS/FAIL`` line. Oracles are
independent of the code under test: closed-form linear algebra, central finite
differences, exhaustive enumeration, and hand geometry.
"""

import itertools
import time

import numpy as np
import pytest

from irsplan.ckm import REFLECTED, trace_paths
from irsplan.errors import InfeasibleError
from irsplan.heuristics import cbd_plan, rrb_plan
from irsplan.metrics import (
    CostWeights,
    Requirements,
    effective_comm_vector,
    effective_sensing_vector,
    optimal_covariance,
    required_power,
    target_gains,
)
from irsplan.planner import RunConfig, coverage_map, run_pipeline, sweep
from irsplan.rounding import _randomize, greedy_round, solve_reflective_subproblem
from irsplan.sca import ScaOptions, estimate_mu, eval_f, make_surrogate, solve_relaxed
from irsplan.scene import CandidateSite, Obstacle

from conftest import SIGMA2, calibrated_requirements, crandn, make_channels
from test_ckm import make_scene
from test_planner import desk_config, desk_requirements

W10 = CostWeights(1.0, 0.0)


def verdict(num, ok, detail):
    print(f"criterion {num:02d}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"criterion {num:02d} failed: {detail}"


# --------------------------------------------------------------------------
# shared desk-scale SCA/CBD/RRB runs (criteria 3 and 7)
# --------------------------------------------------------------------------

DESK_SEEDS = range(10)


@pytest.fixture(scope="module")
def desk_runs():
    runs = []
    for seed in DESK_SEEDS:
        ch = make_channels(seed, K=6, M=8, Nt=4, P=10, Q=10)
        req = calibrated_requirements(ch, margin=5.0)
        t0 = time.perf_counter()
        rel = solve_relaxed(ch, req, W10, "I", ScaOptions(seed=seed, n_gr=100))
        sca = greedy_round(rel.beta_relaxed, ch, req, W10, seed=seed, n_gr=100)
        elapsed = time.perf_counter() - t0
        cbd = cbd_plan(ch, req, W10, seed=seed, n_gr=100)
        rrb = rrb_plan(ch, req, W10, seed=seed)
        runs.append({
            "trace": np.asarray(rel.objective_trace),
            "iterations": rel.iterations,
            "elapsed": elapsed,
            "sca": sca.cost, "cbd": cbd.cost, "rrb": rrb.cost,
        })
    return runs


def test_criterion_01_mrt_optimality():
    """Closed-form covariance beats 1000 random trace-P0 PSD covariances on
    each of 50 random instances, in under 10 seconds."""
    start = time.perf_counter()
    rng = np.random.default_rng(101)
    violations = 0
    for trial in range(50):
        ch = make_channels(500 + trial, K=3, M=4, Nt=4, P=2, Q=2, direct_frac=1.0)
        beta = np.ones(3)
        v = np.exp(1j * rng.uniform(0, 2 * np.pi, 12))
        P0 = 0.7
        target = ("s", 0) if trial % 2 else ("c", 1)
        R, value = optimal_covariance(beta, v, ch, P0, target, sigma_c2=SIGMA2)
        if target[0] == "s":
            u = effective_sensing_vector(beta, v, ch, 0)
            scale = 1.0
        else:
            u = effective_comm_vector(beta, v, ch, 1)
            scale = 1.0 / SIGMA2
        A = crandn(rng, 1000, 4, 4)
        Rs = A @ A.conj().transpose(0, 2, 1)
        tr = np.einsum("nii->n", Rs).real
        Rs *= (P0 / tr)[:, None, None]
        vals = np.einsum("i,nij,j->n", u.conj(), Rs, u).real * scale
        violations += int(np.sum(vals > value * (1 + 1e-12)))
    elapsed = time.perf_counter() - start
    ok = violations == 0 and elapsed < 10.0
    verdict(1, ok, f"{violations} violations over 50x1000 covariances in {elapsed:.1f}s")


def test_criterion_02_surrogate_correctness():
    """Tangency < 1e-10, gradients within 1e-5 of central differences on 50
    instances, and post-backtracking majorization at 100 random feasible
    points per accepted iterate."""
    rng = np.random.default_rng(202)
    worst_tan, worst_grad = 0.0, 0.0
    for trial in range(50):
        K, M = 2, 3
        ch = make_channels(700 + trial, K=K, M=M, Nt=2, P=2, Q=2)
        v = (rng.uniform(-1, 1, K * M) + 1j * rng.uniform(-1, 1, K * M)) / np.sqrt(2)
        beta = rng.uniform(0, 1, K)
        target = ("s", trial % 2) if trial % 3 else ("c", trial % 2)
        req = Requirements(1e-13, 2.0, SIGMA2, 1.0)
        s = make_surrogate(ch, beta, v, target, estimate_mu(ch, target), req)
        f0, grad = eval_f(ch, beta, v, target)
        x0 = np.concatenate([v.real, v.imag, beta])
        worst_tan = max(worst_tan, abs(s.value(x0) - f0))

        h = 1e-6
        fd = np.empty_like(x0)
        for i in range(x0.size):
            xp, xm = x0.copy(), x0.copy()
            xp[i] += h
            xm[i] -= h

            def f_of(x):
                vv = x[:K * M] + 1j * x[K * M:2 * K * M]
                return eval_f(ch, x[2 * K * M:], vv, target)[0]

            fd[i] = (f_of(xp) - f_of(xm)) / (2 * h)
        worst_grad = max(worst_grad, np.linalg.norm(grad - fd) / max(np.linalg.norm(fd), 1e-30))

    # majorization along an actual descent run, re-checked at 100 random
    # feasible points per accepted iterate
    ch = make_channels(777, K=3, M=3, Nt=2, P=3, Q=3)
    req = calibrated_requirements(ch, margin=40.0)
    maj_violations = 0
    check_rng = np.random.default_rng(99)

    def on_iterate(it, surrogates, x_new, objective):
        nonlocal maj_violations
        K, M = ch.K, ch.M
        for _ in range(100):
            v = (check_rng.uniform(-1, 1, K * M)
                 + 1j * check_rng.uniform(-1, 1, K * M)) / np.sqrt(2)
            beta = check_rng.uniform(0, 1, K)
            x = np.concatenate([v.real, v.imag, beta])
            for s in surrogates:
                f, _ = eval_f(ch, beta, v, s.target)
                if f > s.value(x) + 1e-9 * max(1.0, abs(f)):
                    maj_violations += 1

    # mu_shrink=1.0 keeps the descent-lemma curvature, which majorizes over the
    # whole feasible box (the adaptive shrink only guarantees majorization at
    # the accepted point)
    solve_relaxed(ch, req, W10, "I",
                  ScaOptions(seed=0, n_gr=50, mu_shrink=1.0, on_iterate=on_iterate))
    ok = worst_tan < 1e-10 and worst_grad < 1e-5 and maj_violations == 0
    verdict(2, ok, f"tangency {worst_tan:.1e}, grad rel err {worst_grad:.1e}, "
                   f"{maj_violations} majorization violations")


def test_criterion_03_sca_descent(desk_runs):
    """Non-increasing trace (within 1e-9), convergence within 100 iterations,
    under 60 s per desk-scale run (K=6, M=8, Nt=4, P=Q=10), 10 seeds."""
    worst_rise = max(float(np.max(np.diff(r["trace"]), initial=-np.inf)) for r in desk_runs)
    max_iters = max(r["iterations"] for r in desk_runs)
    max_time = max(r["elapsed"] for r in desk_runs)
    ok = worst_rise <= 1e-9 and max_iters <= 100 and max_time < 60.0
    verdict(3, ok, f"worst trace rise {worst_rise:.1e}, max {max_iters} iters, "
                   f"slowest run {max_time:.1f}s")


def test_criterion_04_rounding_feasibility():
    """Every plan from every algorithm and both cases satisfies the thresholds
    (rel slack 1e-6), the budget, and binary beta, via direct recomputation."""
    ch = make_channels(404, K=4, M=4, Nt=3, P=4, Q=4)
    req = calibrated_requirements(ch, margin=60.0)
    plans = []
    for case in ("I", "II"):
        rel = solve_relaxed(ch, req, W10, case, ScaOptions(seed=0, n_gr=60))
        plans.append(("sca-" + case, greedy_round(
            rel.beta_relaxed, ch, req, W10, case_tag=case, seed=0, n_gr=60)))
        plans.append(("cbd-" + case, cbd_plan(ch, req, W10, case_tag=case, seed=0, n_gr=60)))
    plans.append(("rrb-I", rrb_plan(ch, req, W10, seed=0)))

    bad = []
    for name, plan in plans:
        if not np.all(np.isin(plan.beta, (0.0, 1.0))):
            bad.append(f"{name}: non-binary beta")
        if plan.P0 > req.P0_max * (1 + 1e-9):
            bad.append(f"{name}: over budget")
        gs, gc = target_gains(plan.beta, plan.phases(), ch)
        if np.min(plan.P0 * gs) < req.P_s * (1 - 1e-6):
            bad.append(f"{name}: sensing threshold violated")
        if np.min(plan.P0 * gc / req.sigma_c2) < req.Gamma_c * (1 - 1e-6):
            bad.append(f"{name}: SNR threshold violated")
    verdict(4, not bad, f"{len(plans)} plans re-checked" + ("; " + "; ".join(bad) if bad else ""))


def test_criterion_05_brute_force_near_optimality():
    """K=2, M=1, Nt=2, one SP + one CP: SCA relax-and-round vs a 360-level
    phase-grid oracle over all deployment patterns. The heuristic cost never
    beats the oracle by more than 1e-6 and stays within 5% on >= 8/10 seeds."""
    grid = np.exp(2j * np.pi * np.arange(360) / 360.0)
    within = 0
    never_below = True
    for seed in range(10):
        ch = make_channels(900 + seed, K=2, M=1, Nt=2, P=1, Q=1, direct_frac=1.0)
        req = calibrated_requirements(ch, margin=20.0)

        # oracle: exhaustive beta and per-element phase grid, closed-form P0
        best = np.inf
        for bits in itertools.product((0.0, 1.0), repeat=2):
            beta = np.array(bits)
            V1, V2 = np.meshgrid(grid, grid, indexing="ij")
            us = np.zeros((360, 360, 2), complex)
            uc = np.tile(ch.h0q[0], (360, 360, 1))
            for k, Vk in enumerate((V1, V2)):
                if beta[k] == 0:
                    continue
                a_s = ch.H0k[k].conj().T @ np.diag(ch.gkp[k, 0]) @ np.ones(1)
                a_c = ch.H0k[k].conj().T @ np.diag(ch.hkq[k, 0]) @ np.ones(1)
                us += Vk[..., None] * a_s
                uc += Vk[..., None] * a_c
            gs = np.sum(np.abs(us) ** 2, axis=-1)
            gc = np.sum(np.abs(uc) ** 2, axis=-1)
            with np.errstate(divide="ignore"):
                p0 = np.maximum(req.P_s / gs, req.sigma_c2 * req.Gamma_c / gc)
            if np.min(p0) <= req.P0_max * (1 + 1e-9):
                best = min(best, float(np.sum(beta)))
        assert np.isfinite(best)

        rel = solve_relaxed(ch, req, W10, "I", ScaOptions(seed=seed, n_gr=100))
        plan = greedy_round(rel.beta_relaxed, ch, req, W10, seed=seed, n_gr=100)
        if plan.cost < best - 1e-6:
            never_below = False
        if plan.cost <= best * 1.05 + 1e-9:
            within += 1
    ok = never_below and within >= 8
    verdict(5, ok, f"never below oracle: {never_below}; within 5% on {within}/10 seeds")


def test_criterion_06_rrb_exactness():
    """RRB equals an independent second enumeration on 20 random K=3 scenes
    and reports infeasibility when no pattern fits the budget."""
    mismatches = 0
    for trial in range(20):
        ch = make_channels(300 + trial, K=3, M=3, Nt=2, P=2, Q=2)
        req = calibrated_requirements(ch, margin=500.0)
        weights = CostWeights(1.0, 0.1)
        plan = rrb_plan(ch, req, weights, seed=trial)
        v = np.exp(1j * np.random.default_rng(trial).uniform(0, 2 * np.pi, 9))
        best = None
        for bits in itertools.product((0.0, 1.0), repeat=3):
            beta = np.array(bits)
            gs, gc = target_gains(beta, v, ch)
            if np.min(gs) <= 0 or np.min(gc) <= 0:
                continue
            p0 = max(np.max(req.P_s / gs), np.max(req.sigma_c2 * req.Gamma_c / gc))
            if p0 > req.P0_max * (1 + 1e-9):
                continue
            key = (weights.w1 * beta.sum() + weights.w2 * p0, beta.sum())
            if best is None or key < best[0]:
                best = (key, beta, p0)
        if not (np.array_equal(plan.beta, best[1])
                and abs(plan.P0 - best[2]) <= 1e-12 * best[2]):
            mismatches += 1

    ch = make_channels(1, K=3, M=3, Nt=2, P=2, Q=2)
    tight = Requirements(P_s=1.0, Gamma_c=2.0, sigma_c2=SIGMA2, P0_max=1e-12)
    try:
        rrb_plan(ch, tight, W10, seed=0)
        infeasible_ok = False
    except InfeasibleError:
        infeasible_ok = True
    ok = mismatches == 0 and infeasible_ok
    verdict(6, ok, f"{mismatches} enumeration mismatches; "
                   f"infeasibility reported: {infeasible_ok}")


def test_criterion_07_algorithm_ordering(desk_runs):
    """Median cost over 10 desk seeds: SCA <= CBD <= RRB."""
    med = {a: float(np.median([r[a] for r in desk_runs])) for a in ("sca", "cbd", "rrb")}
    ok = med["sca"] <= med["cbd"] + 1e-12 and med["cbd"] <= med["rrb"] + 1e-12
    verdict(7, ok, f"median costs sca={med['sca']} cbd={med['cbd']} rrb={med['rrb']}")


def test_criterion_08_case_dominance():
    """Median cost of per-point reflection (case II) never exceeds the joint
    configuration (case I) by more than 1e-6 on identical scenes and seeds."""
    weights = CostWeights(1.0, 10.0)
    costs = {"I": [], "II": []}
    for seed in range(10):
        ch = make_channels(8000 + seed, K=4, M=4, Nt=3, P=4, Q=4)
        req = calibrated_requirements(ch, margin=60.0)
        for case in ("I", "II"):
            rel = solve_relaxed(ch, req, weights, case, ScaOptions(seed=seed, n_gr=60))
            plan = greedy_round(rel.beta_relaxed, ch, req, weights,
                                case_tag=case, seed=seed, n_gr=60)
            costs[case].append(plan.cost)
    med1, med2 = float(np.median(costs["I"])), float(np.median(costs["II"]))
    ok = med2 <= med1 + 1e-6
    verdict(8, ok, f"median cost case I={med1:.6g}, case II={med2:.6g}")


def test_criterion_09_threshold_monotonicity():
    """Total cost is non-decreasing (within 1e-6) along five ascending SNR
    thresholds on the demo scene."""
    cfg = desk_config(algorithm="rrb")
    values = [2.0, 3.0, 4.0, 5.0, 6.0]
    rows = sweep(cfg, "Gamma_c", values)
    costs = [row["cost"] if row["feasible"] else np.inf for row in rows]
    steps = np.diff(costs)
    ok = bool(np.all(steps >= -1e-6))
    verdict(9, ok, f"costs along the sweep: {costs}")


def test_criterion_10_ray_tracer_geometry():
    """100 random single-slab configs: every reflected record passes the
    image-length identity and the specular law within 1e-9; reciprocity is
    exact."""
    rng = np.random.default_rng(4242)
    checked, worst = 0, 0.0
    recip_exact = True
    for _ in range(100):
        lo = np.array([rng.uniform(2.5, 4.0), rng.uniform(-5, -4), rng.uniform(-5, -4)])
        hi = lo + np.array([rng.uniform(0.5, 2.0), rng.uniform(8, 10), rng.uniform(8, 10)])
        slab = Obstacle(lo, hi, reflect=0.7)
        scene = make_scene(obstacles=(slab,))
        tx = rng.uniform(-2, 1.5, size=3)
        rx = rng.uniform(-2, 1.5, size=3)
        if np.allclose(tx, rx):
            continue
        fwd = trace_paths(scene, tx, rx)
        for r in fwd:
            if r.kind != REFLECTED:
                continue
            bp = np.array(r.bounce_point)
            axis = int(np.argmin([min(abs(bp[i] - lo[i]), abs(bp[i] - hi[i])) for i in range(3)]))
            plane = lo[axis] if abs(bp[axis] - lo[axis]) < abs(bp[axis] - hi[axis]) else hi[axis]
            mirror = rx.copy()
            mirror[axis] = 2 * plane - rx[axis]
            err = abs(r.length - np.linalg.norm(mirror - tx))
            n = np.zeros(3)
            n[axis] = 1.0
            d_in = (bp - tx) / np.linalg.norm(bp - tx)
            d_out = (rx - bp) / np.linalg.norm(rx - bp)
            err = max(err, abs(abs(d_in @ n) - abs(d_out @ n)))
            worst = max(worst, err)
            checked += 1

    # reciprocity at the map level: querying a pair in the reverse direction
    # returns the stored records exactly, with departure/arrival swapped
    from irsplan.ckm import build_ckm
    from irsplan.scene import PointSet

    slab = Obstacle([2, 0, 0], [2.5, 1, 1], reflect=0.5)
    scene = make_scene(obstacles=(slab,))
    points = PointSet(np.array([[5.5, 0.3, 0.5]]), np.array([[7.5, 0.7, 0.5]]))
    ckm = build_ckm(scene, points)
    for tx_id, rx_id in ckm.paths:
        fwd = ckm.get_paths(tx_id, rx_id)
        bwd = ckm.get_paths(rx_id, tx_id)
        for f, b in zip(fwd, bwd):
            if not (f.length == b.length and f.complex_gain == b.complex_gain
                    and f.aod == b.aoa and f.aoa == b.aod
                    and f.bounce_point == b.bounce_point):
                recip_exact = False

    ok = checked >= 50 and worst < 1e-9 and recip_exact
    verdict(10, ok, f"{checked} reflections, worst geometric error {worst:.1e}, "
                    f"reciprocity exact: {recip_exact}")


def test_criterion_11_blocked_scene_zero_coverage(demo_channels):
    """Demo scene with no IRS deployed: illumination is exactly zero at every
    sensing point."""
    cfg = desk_config(empty_deployment=True)
    report = run_pipeline(cfg)
    rows = coverage_map(report.plan, demo_channels, cfg.requirements)
    srows = [r for r in rows if r["kind"] == "s"]
    ok = (not report.feasible
          and len(srows) == demo_channels.P
          and all(r["linear"] == 0.0 for r in srows))
    verdict(11, ok, f"{len(srows)} sensing points, all exactly zero: "
                    f"{all(r['linear'] == 0.0 for r in srows)}")


def test_criterion_12_sdr_lower_bound():
    """30 random fixed-beta subproblems: the relaxation power never exceeds the
    randomized candidate's power (up to SDP solver accuracy); a rank-one input
    is recovered exactly."""
    violations = 0
    for trial in range(30):
        ch = make_channels(1200 + trial, K=2, M=3, Nt=2, P=2, Q=2)
        req = calibrated_requirements(ch, margin=1e3)
        sol = solve_reflective_subproblem(np.ones(2), ch, req, seed=trial, n_gr=60)
        if not (sol.feasible and sol.sdr_P0 <= sol.P0 * (1 + 1e-6)):
            violations += 1

    rng = np.random.default_rng(55)
    u = np.exp(1j * rng.uniform(0, 2 * np.pi, 7))
    u[-1] = 1.0
    cands = _randomize(np.outer(u, u.conj()), 20, seed=5)
    recovery = float(np.min(np.max(np.abs(cands - u[None, :]), axis=1)))
    ok = violations == 0 and recovery < 1e-9
    verdict(12, ok, f"{violations} bound violations over 30 subproblems; "
                    f"rank-one recovery error {recovery:.1e}")
