"""Exact metric evaluators, tested against independent linear-algebra oracles."""

import numpy as np
import pytest

from irsplan.errors import IrsPlanError, UnreachableTargetError
from irsplan.metrics import (
    CostWeights,
    Requirements,
    db_to_linear,
    dbm_to_watts,
    effective_comm_vector,
    effective_sensing_vector,
    illumination_power,
    linear_to_db,
    make_plan,
    optimal_covariance,
    required_power,
    system_cost,
    target_gains,
    verify_plan,
    watts_to_dbm,
)

from conftest import calibrated_requirements, crandn, make_channels


def random_phases(rng, n):
    return np.exp(1j * rng.uniform(0, 2 * np.pi, n))


class TestConversions:
    def test_round_trips_and_anchors(self):
        # [TRIVIAL] 30 dBm = 1 W, 0 dB = 1x.
        assert dbm_to_watts(30.0) == pytest.approx(1.0)
        assert watts_to_dbm(1e-3) == pytest.approx(0.0)
        assert db_to_linear(0.0) == 1.0
        assert linear_to_db(100.0) == pytest.approx(20.0)
        for x in (1e-9, 0.5, 7.0):
            assert dbm_to_watts(watts_to_dbm(x)) == pytest.approx(x)
            assert db_to_linear(linear_to_db(x)) == pytest.approx(x)


class TestEffectiveVectors:
    def test_sensing_vector_manual_sum(self):
        # [DERIVED] recompute sum_k beta_k H0k^H diag(g_kp) v_k by hand.
        ch = make_channels(0, K=3, M=4, Nt=2, P=2, Q=2)
        rng = np.random.default_rng(1)
        beta = np.array([1.0, 0.0, 1.0])
        v = random_phases(rng, 12)
        u = effective_sensing_vector(beta, v, ch, 1)
        expected = np.zeros(2, complex)
        for k in (0, 2):
            expected += ch.H0k[k].conj().T @ np.diag(ch.gkp[k, 1]) @ v[4 * k:4 * k + 4]
        assert u == pytest.approx(expected, abs=1e-15)

    def test_comm_vector_includes_direct(self):
        # [DERIVED]
        ch = make_channels(0, K=2, M=3, Nt=2, P=2, Q=2, direct_frac=1.0)
        rng = np.random.default_rng(2)
        beta = np.array([0.0, 1.0])
        v = random_phases(rng, 6)
        u = effective_comm_vector(beta, v, ch, 0)
        expected = ch.h0q[0] + ch.H0k[1].conj().T @ np.diag(ch.hkq[1, 0]) @ v[3:]
        assert u == pytest.approx(expected, abs=1e-15)


class TestOptimalCovariance:
    def test_beats_random_psd_covariances(self):
        # [DERIVED] the closed-form rank-one covariance achieves at least the
        # value of any random trace-P0 PSD covariance (Rayleigh-quotient bound).
        rng = np.random.default_rng(5)
        for trial in range(10):
            ch = make_channels(100 + trial, K=2, M=3, Nt=3, P=2, Q=2)
            beta = np.ones(2)
            v = random_phases(rng, 6)
            P0 = 0.5
            R, value = optimal_covariance(beta, v, ch, P0, ("s", 0))
            assert np.trace(R).real == pytest.approx(P0, rel=1e-12)
            assert illumination_power(beta, v, R, ch, 0) == pytest.approx(value, rel=1e-12)
            for _ in range(50):
                A = crandn(rng, 3, 3)
                Rr = A @ A.conj().T
                Rr *= P0 / np.trace(Rr).real
                assert illumination_power(beta, v, Rr, ch, 0) <= value * (1 + 1e-12)

    def test_comm_value_is_snr(self):
        # [DERIVED] value = P0 |u|^2 / sigma^2 matches communication_snr.
        from irsplan.metrics import communication_snr

        ch = make_channels(7, K=2, M=3, Nt=2, P=2, Q=2, direct_frac=1.0)
        rng = np.random.default_rng(7)
        beta, v = np.ones(2), random_phases(rng, 6)
        R, value = optimal_covariance(beta, v, ch, 0.2, ("c", 1), sigma_c2=1e-11)
        assert communication_snr(beta, v, R, ch, 1, 1e-11) == pytest.approx(value, rel=1e-12)

    def test_unreachable_raises(self):
        # [TRIVIAL] all-zero beta cuts every sensing point off.
        ch = make_channels(9, K=2, M=3, Nt=2, P=2, Q=2)
        with pytest.raises(UnreachableTargetError):
            optimal_covariance(np.zeros(2), np.ones(6, complex), ch, 1.0, ("s", 0))

    def test_non_psd_covariance_rejected(self):
        # [TRIVIAL]
        ch = make_channels(9, K=2, M=3, Nt=2, P=2, Q=2)
        R = np.diag([1.0, -1.0])
        with pytest.raises(IrsPlanError):
            illumination_power(np.ones(2), np.ones(6, complex), R, ch, 0)


class TestRequiredPower:
    def test_matches_per_point_ratio_oracle(self):
        # [DERIVED] P0* = max over points of threshold / |u|^2.
        ch = make_channels(11, K=3, M=4, Nt=3, P=4, Q=4, direct_frac=1.0)
        rng = np.random.default_rng(11)
        beta, v = np.ones(3), random_phases(rng, 12)
        req = Requirements(P_s=1e-13, Gamma_c=3.0, sigma_c2=1e-11, P0_max=1.0)
        p0 = required_power(beta, v, ch, req)
        ratios = []
        for p in range(4):
            u = effective_sensing_vector(beta, v, ch, p)
            ratios.append(req.P_s / np.vdot(u, u).real)
        for q in range(4):
            u = effective_comm_vector(beta, v, ch, q)
            ratios.append(req.sigma_c2 * req.Gamma_c / np.vdot(u, u).real)
        assert p0 == pytest.approx(max(ratios), rel=1e-12)

    def test_dead_points_all_listed(self):
        # [TRIVIAL] with beta = 0 and no direct links, every point is dead.
        ch = make_channels(13, K=2, M=3, Nt=2, P=3, Q=2, direct_frac=0.0)
        with pytest.raises(UnreachableTargetError) as exc:
            required_power(np.zeros(2), np.ones(6, complex), ch,
                           Requirements(1e-13, 2.0, 1e-11, 1.0))
        assert set(exc.value.points) == {"sp0", "sp1", "sp2", "cp0", "cp1"}


class TestPlans:
    def test_cost_and_verification(self):
        # [TRIVIAL] cost arithmetic plus verify_plan consistency.
        ch = make_channels(17, K=3, M=4, Nt=3, P=3, Q=3, direct_frac=1.0)
        req = calibrated_requirements(ch, margin=10.0)
        beta = np.ones(3)
        v = np.ones(12, complex)
        p0 = required_power(beta, v, ch, req)
        w = CostWeights(w1=1.0, w2=2.0)
        plan = make_plan(beta, v, p0, w, "I")
        assert plan.cost == pytest.approx(3.0 + 2.0 * p0)
        assert system_cost(beta, p0, w) == plan.cost
        res = verify_plan(plan, ch, req)
        assert res["feasible"]
        assert np.min(res["rho"]) == pytest.approx(req.P_s, rel=1e-9) or np.min(
            res["snr"]) == pytest.approx(req.Gamma_c, rel=1e-9)
        starved = make_plan(beta, v, p0 * 0.5, w, "I")
        assert not verify_plan(starved, ch, req)["feasible"]

    def test_binary_and_unit_modulus_enforced(self):
        # [TRIVIAL]
        with pytest.raises(IrsPlanError):
            make_plan(np.array([0.5, 1.0]), np.ones(4, complex), 1.0, CostWeights(), "I")
        with pytest.raises(IrsPlanError):
            make_plan(np.array([1.0, 1.0]), 2.0 * np.ones(4, complex), 1.0, CostWeights(), "I")

    def test_case_ii_per_point_phases(self):
        # [DERIVED] case II gains use each point's own vector.
        ch = make_channels(19, K=2, M=3, Nt=2, P=2, Q=2, direct_frac=1.0)
        rng = np.random.default_rng(19)
        beta = np.ones(2)
        vs = np.stack([random_phases(rng, 6) for _ in range(2)])
        vc = np.stack([random_phases(rng, 6) for _ in range(2)])
        gs, gc = target_gains(beta, (vs, vc), ch)
        for p in range(2):
            u = effective_sensing_vector(beta, vs[p], ch, p)
            assert gs[p] == pytest.approx(np.vdot(u, u).real, rel=1e-12)
        for q in range(2):
            u = effective_comm_vector(beta, vc[q], ch, q)
            assert gc[q] == pytest.approx(np.vdot(u, u).real, rel=1e-12)
