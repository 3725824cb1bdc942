"""Low-complexity deployment baselines.

Two reference planners that skip the SCA descent:

* channel-budget deployment (CBD): score each candidate site by the coverage
  demand routed through it and hand the normalized scores to the greedy
  rounding stage;
* random-phase baseline (RRB): draw one uniform phase vector, then enumerate
  deployment patterns exactly with the closed-form transmit power.
"""

from __future__ import annotations

import itertools

import numpy as np

from .channel import ChannelSet
from .errors import InfeasibleError, UnreachableTargetError
from .metrics import (
    CostWeights,
    DeploymentPlan,
    Requirements,
    make_plan,
    required_power,
    system_cost,
)
from .rounding import N_GR_DEFAULT, greedy_round

RRB_MAX_SITES = 20  # 2^K patterns are enumerated exactly; guard the blow-up


def cbd_weights(channels: ChannelSet, req: Requirements) -> np.ndarray:
    """Demand score per site: P_s-weighted sensing energy plus SNR-weighted comm energy."""
    eta = np.empty(channels.K)
    for k in range(channels.K):
        sense = float(np.sum(np.abs(channels.gkp[k]) ** 2))
        comm = float(np.sum(np.abs(channels.hkq[k]) ** 2))
        eta[k] = req.P_s * sense + req.sigma_c2 * req.Gamma_c * comm
    top = eta.max()
    if top <= 0.0:
        raise UnreachableTargetError([f"sp{p}" for p in range(channels.P)])
    return eta / top


def cbd_plan(
    channels: ChannelSet,
    req: Requirements,
    weights: CostWeights,
    case_tag: str = "I",
    seed: int = 0,
    n_gr: int = N_GR_DEFAULT,
) -> DeploymentPlan:
    """Channel-budget deployment: score sites by demand, then greedily round."""
    scores = cbd_weights(channels, req)
    return greedy_round(
        scores, channels, req, weights, case_tag=case_tag, seed=seed, n_gr=n_gr
    )


def rrb_plan(
    channels: ChannelSet,
    req: Requirements,
    weights: CostWeights,
    seed: int = 0,
) -> DeploymentPlan:
    """Random-phase baseline: one uniform phase draw, exact pattern enumeration.

    Only the joint-phase configuration (case I) is defined for this baseline.
    The transmit power of each pattern comes from the closed-form maximum-ratio
    expression, so the search over {0,1}^K is exact rather than greedy.
    """
    K = channels.K
    if K > RRB_MAX_SITES:
        raise ValueError(
            f"random-phase baseline enumerates 2^K patterns; K={K} exceeds {RRB_MAX_SITES}"
        )
    rng = np.random.default_rng(seed)
    v = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, K * channels.M))

    best = None
    for bits in itertools.product((0.0, 1.0), repeat=K):
        beta = np.array(bits)
        try:
            P0 = required_power(beta, v, channels, req)
        except UnreachableTargetError:
            continue
        if P0 > req.P0_max * (1.0 + 1e-9):
            continue
        cost = system_cost(beta, P0, weights)
        key = (cost, int(np.sum(beta)))
        if best is None or key < best[0]:
            best = (key, beta, P0)
    if best is None:
        raise InfeasibleError(
            "random-phase baseline found no feasible deployment pattern"
        )
    _, beta, P0 = best
    return make_plan(beta, v, P0, weights, case_tag="I")
