"""Shared fixtures and synthetic-instance helpers."""

from __future__ import annotations

import numpy as np
import pytest

from irsplan.channel import ArrayConfig, ChannelSet, assemble_channel_set
from irsplan.ckm import build_ckm
from irsplan.metrics import Requirements, required_power
from irsplan.scenarios import demo_text
from irsplan.scene import load_scenario

SIGMA2 = 1e-11  # -80 dBm


def crandn(rng, *shape):
    """Unit-variance circular complex Gaussians."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def make_channels(seed, K=6, M=8, Nt=4, P=10, Q=10,
                  bs_scale=1e-3, irs_scale=1e-3, direct_scale=1e-4,
                  direct_frac=0.4) -> ChannelSet:
    """Random desk-scale channel set.

    IRS-side links are always present; only a fraction of the CPs get a
    direct BS link, mimicking the shadowed-room geometry.
    """
    rng = np.random.default_rng(seed)
    H0k = crandn(rng, K, M, Nt) * bs_scale
    gkp = crandn(rng, K, P, M) * irs_scale
    hkq = crandn(rng, K, Q, M) * irs_scale
    h0q = crandn(rng, Q, Nt) * direct_scale
    h0q[rng.random(Q) > direct_frac] = 0.0
    return ChannelSet(H0k=H0k, h0q=h0q, hkq=hkq, gkp=gkp)


def calibrated_requirements(channels: ChannelSet, margin=30.0, gamma=2.0,
                            p_s=1e-14) -> Requirements:
    """Requirements whose budget is ``margin`` times the full-deployment
    all-ones-phase power, so deployment selection is non-trivial but feasible."""
    probe = Requirements(P_s=p_s, Gamma_c=gamma, sigma_c2=SIGMA2, P0_max=np.inf)
    beta = np.ones(channels.K)
    v = np.ones(channels.K * channels.M, dtype=complex)
    p0_ref = required_power(beta, v, channels, probe)
    return Requirements(P_s=p_s, Gamma_c=gamma, sigma_c2=SIGMA2, P0_max=margin * p0_ref)


@pytest.fixture(scope="session")
def demo_scene():
    scene, points = load_scenario(demo_text("desk"))
    return scene, points


@pytest.fixture(scope="session")
def demo_ckm(demo_scene):
    scene, points = demo_scene
    return build_ckm(scene, points)


@pytest.fixture(scope="session")
def demo_channels(demo_scene, demo_ckm):
    scene, points = demo_scene
    return assemble_channel_set(demo_ckm, scene, points, ArrayConfig())
