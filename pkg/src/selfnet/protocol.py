"""Reputation protocol and the threshold best-response rule.

A paired agent k shares its intermediate estimate with partner l iff

    b_k / c_k  >  chi_k / theta_{lk}(i),      chi = (1 - delta*r) / (delta*(1 - r)),

where b_k is agent k's expected benefit from receiving the partner's estimate,
c_k the transmission cost, and theta_{lk} the reputation score agent k holds
about l.  Scores evolve only on iterations where the two agents are paired:

    theta_{lk}(i+1) = max( r * theta_{lk}(i) + (1 - r) * a_{lk}(i), epsilon ).

Two benefit signals are provided: an oracle that evaluates the exact one-step
improvement from the true error vector, and a realtime proxy computable from
the agent's own data stream.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .model import AgentState, Array


def chi(delta: float, r: float) -> float:
    """Cooperation threshold chi = (1 - delta*r) / (delta*(1 - r)).

    Always above 1, decreasing in delta (patient agents tolerate a smaller
    benefit-to-cost ratio) and increasing in r (a sluggish reputation blunts
    the future consequence of withholding, so the bar to share rises).
    """
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if not 0.0 < r < 1.0:
        raise ValueError("r must lie in (0, 1)")
    return (1.0 - delta * r) / (delta * (1.0 - r))


def reputation_update(theta: float, action: bool, paired: bool,
                      r: float, epsilon: float) -> float:
    """One reputation-score step; inert when the two agents were not paired."""
    if not paired:
        return float(theta)
    return max(r * theta + (1.0 - r) * (1.0 if action else 0.0), epsilon)


def belief(theta_kl: float, theta_lk: float) -> float:
    """Probability both directions of a pair share, theta_{kl} * theta_{lk}."""
    return float(theta_kl) * float(theta_lk)


def benefit_oracle(w_err: Array, cov: Array, mu: float) -> float:
    """Exact expected one-step benefit  || (I - mu R) w_err ||^2_R .

    `w_err` is the true error w_o - w_{k,i-1} and R the agent's regressor
    covariance; this is the drop in weighted error an agent foregoes when its
    partner withholds, evaluated at the partner's best response.
    """
    w_err = np.asarray(w_err, dtype=np.float64)
    cov = np.asarray(cov, dtype=np.float64)
    y = w_err - mu * (cov @ w_err)
    return float(y @ cov @ y)


def benefit_realtime(state: AgentState, u: Array, mu: float,
                     nu: float) -> tuple[float, AgentState]:
    """Realtime benefit proxy  (1 - mu ||u||^2)^2 (u . (wo_hat - w))^2 .

    Advances the agent's EWMA objective estimate wo_hat <- (1-nu) wo_hat +
    nu psi *before* forming the perceived error, and returns the benefit
    together with the updated state.  The proxy replaces the unknown true
    error by wo_hat - w and the covariance statistics by the instantaneous
    regressor.
    """
    u = np.asarray(u, dtype=np.float64)
    wo_hat = (1.0 - nu) * state.wo_hat + nu * state.psi
    w_err = wo_hat - state.w
    s = float(u @ w_err)
    b = (1.0 - mu * float(u @ u)) ** 2 * s * s
    return max(b, 0.0), replace(state, wo_hat=wo_hat)


@dataclass(frozen=True)
class ActionDecision:
    share: bool
    ratio: float
    threshold: float


def decide_action(benefit: float, comm_cost: float, chi_value: float,
                  theta_opp: float) -> ActionDecision:
    """Threshold best response: share iff benefit/cost > chi/theta (strict).

    Division follows IEEE semantics so a zero cost yields ratio inf (share
    whenever the benefit is positive) and 0/0 yields no share.
    """
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = float(np.float64(benefit) / np.float64(comm_cost))
        threshold = float(np.float64(chi_value) / np.float64(theta_opp))
    return ActionDecision(share=bool(ratio > threshold), ratio=ratio,
                          threshold=threshold)
