"""One-shot game analysis of the information-sharing interaction.

For a realized pair (k, l) with error vectors w_err prior to adaptation, the
expected payoff of agent k under the action profile (a_k, a_l) is

    J_k(a_k, a_l) = E || w_err_k_next(a_l) ||^2_{R_k} + sigma2_k + a_k c_k,

where the expectation runs over fresh regressor/noise draws of both agents.
Because the own action enters only through the additive cost, withholding is
strictly dominant whenever c_k > 0, so (0, 0) is the unique one-shot Nash
equilibrium; mutual sharing Pareto-dominates it iff each agent's expected
benefit b = E||psi_err||^2_R - E||alpha psi_err_k + (1-alpha) psi_err_l||^2_R
exceeds its cost.

`series_threshold_oracle` evaluates the far-sighted sharing condition by
truncated series summation: share at reputation theta_lk iff

    c + sum_{t>0} delta^t c - sum_{t>0} delta^t (1 - r^t) theta_lk b  <  0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import AgentParams, Array
from .protocol import chi


def _psi_errors(w_err: Array, cov: Array, noise_var: float, mu: float,
                n_samples: int, rng: np.random.Generator) -> Array:
    """Sample psi-stage errors (I - mu u'u) w_err - mu u' v, shape (n, M)."""
    m = w_err.shape[0]
    chol = np.linalg.cholesky(cov)
    u = rng.standard_normal((n_samples, m)) @ chol.T
    v = rng.standard_normal(n_samples) * math.sqrt(noise_var)
    s = u @ w_err + v
    return w_err[None, :] - mu * u * s[:, None]


def _mean_quad(e: Array, cov: Array) -> float:
    return float(np.einsum("nm,nm->n", e @ cov, e).mean())


def exact_benefit(w_err_k: Array, w_err_l: Array, cov_k: Array, alpha_k: float,
                  mu: float, n_samples: int, rng: np.random.Generator, *,
                  cov_l: Array | None = None, noise_var_k: float = 0.0,
                  noise_var_l: float = 0.0) -> float:
    """Monte-Carlo estimate of agent k's expected benefit from receiving.

    b_k = E||psi_err_k||^2_{R_k} - E||alpha psi_err_k + (1-alpha) psi_err_l||^2_{R_k}
    with fresh draws for both agents.  The partner's statistics default to
    (cov_k, noiseless); override via keywords for heterogeneous pairs.
    """
    w_err_k = np.asarray(w_err_k, dtype=np.float64)
    w_err_l = np.asarray(w_err_l, dtype=np.float64)
    cov_k = np.asarray(cov_k, dtype=np.float64)
    cov_l = cov_k if cov_l is None else np.asarray(cov_l, dtype=np.float64)
    ek = _psi_errors(w_err_k, cov_k, noise_var_k, mu, n_samples, rng)
    el = _psi_errors(w_err_l, cov_l, noise_var_l, mu, n_samples, rng)
    combo = alpha_k * ek + (1.0 - alpha_k) * el
    return _mean_quad(ek, cov_k) - _mean_quad(combo, cov_k)


@dataclass(frozen=True)
class StageGame:
    """Expected payoffs of the 2x2 sharing game, indexed [a_k, a_l]."""

    payoff_k: Array   # (2, 2)
    payoff_l: Array   # (2, 2)
    benefit_k: float
    benefit_l: float
    cost_k: float
    cost_l: float

    def nash_equilibrium(self) -> tuple[int, int]:
        return (0, 0)

    def withholding_dominant(self, strict: bool = True) -> bool:
        dk = self.payoff_k[1, :] - self.payoff_k[0, :]
        dl = self.payoff_l[:, 1] - self.payoff_l[:, 0]
        if strict:
            return bool(np.all(dk > 0) and np.all(dl > 0))
        return bool(np.all(dk >= 0) and np.all(dl >= 0))


def stage_game(w_err_k: Array, w_err_l: Array, models, params: AgentParams,
               n_samples: int, rng: np.random.Generator) -> StageGame:
    """Expected one-shot payoff table for a realized pair.

    `models` is a pair ((cov_k, noise_var_k), (cov_l, noise_var_l)).  Common
    random numbers are used across all four cells, so structural identities
    (e.g. the own-action difference equals the cost exactly) hold without
    Monte-Carlo slack.
    """
    (cov_k, nv_k), (cov_l, nv_l) = models
    w_err_k = np.asarray(w_err_k, dtype=np.float64)
    w_err_l = np.asarray(w_err_l, dtype=np.float64)
    cov_k = np.asarray(cov_k, dtype=np.float64)
    cov_l = np.asarray(cov_l, dtype=np.float64)
    ek = _psi_errors(w_err_k, cov_k, nv_k, params.mu, n_samples, rng)
    el = _psi_errors(w_err_l, cov_l, nv_l, params.mu, n_samples, rng)
    a = params.alpha
    combo_k = a * ek + (1.0 - a) * el
    combo_l = a * el + (1.0 - a) * ek

    est_k = (_mean_quad(ek, cov_k), _mean_quad(combo_k, cov_k))  # a_l = 0, 1
    est_l = (_mean_quad(el, cov_l), _mean_quad(combo_l, cov_l))  # a_k = 0, 1
    c = params.comm_cost
    payoff_k = np.array([[est_k[al] + nv_k + ak * c for al in (0, 1)] for ak in (0, 1)])
    payoff_l = np.array([[est_l[ak] + nv_l + al * c for al in (0, 1)] for ak in (0, 1)])
    return StageGame(payoff_k=payoff_k, payoff_l=payoff_l,
                     benefit_k=est_k[0] - est_k[1], benefit_l=est_l[0] - est_l[1],
                     cost_k=c, cost_l=c)


@dataclass(frozen=True)
class ParetoVerdict:
    """Comparison of mutual sharing (1,1) against the Nash profile (0,0)."""

    label: str              # 'share_dominates' | 'nash_dominates' | 'mixed'
    gain_k: float           # J_k(0,0) - J_k(1,1) = b_k - c_k
    gain_l: float
    gamma_k: float          # benefit-to-cost ratio b_k / c_k
    gamma_l: float


def pareto_classify(game: StageGame) -> ParetoVerdict:
    gain_k = float(game.payoff_k[0, 0] - game.payoff_k[1, 1])
    gain_l = float(game.payoff_l[0, 0] - game.payoff_l[1, 1])
    with np.errstate(divide="ignore", invalid="ignore"):
        gamma_k = float(np.float64(game.benefit_k) / np.float64(game.cost_k))
        gamma_l = float(np.float64(game.benefit_l) / np.float64(game.cost_l))
    if gain_k > 0 and gain_l > 0:
        label = "share_dominates"
    elif gain_k < 0 and gain_l < 0:
        label = "nash_dominates"
    else:
        label = "mixed"
    return ParetoVerdict(label=label, gain_k=gain_k, gain_l=gain_l,
                         gamma_k=gamma_k, gamma_l=gamma_l)


@dataclass(frozen=True)
class ThresholdVerdict:
    share: bool
    margin: float      # value of the truncated series; share iff margin < 0
    boundary: bool     # |margin| within truncation tolerance of zero


def series_threshold_oracle(benefit: float, comm_cost: float, delta: float,
                              r: float, theta_lk: float, theta_kl: float,
                              horizon: int | None = None,
                              tol: float = 1e-12) -> ThresholdVerdict:
    """Far-sighted sharing condition evaluated by direct series summation.

    Compares the discounted stream of future costs against the discounted
    reputation-weighted benefit stream; agrees with the closed-form rule
    benefit * theta_lk / comm_cost > chi(delta, r) away from the boundary.
    theta_kl is accepted for signature completeness (it cancels from the
    difference of the two continuation payoffs).
    """
    del theta_kl
    if not 0.0 < delta < 1.0 or not 0.0 < r < 1.0:
        raise ValueError("delta and r must lie in (0, 1)")
    if horizon is None:
        horizon = int(math.ceil(math.log(tol) / math.log(delta)))
    if delta ** horizon >= tol:
        raise ValueError(f"horizon {horizon} too small for tolerance {tol}")
    s = np.arange(1, horizon + 1, dtype=np.float64)
    disc = delta ** s
    margin = comm_cost * (1.0 + disc.sum()) \
        - float((disc * (1.0 - r ** s)).sum()) * theta_lk * benefit
    scale = (comm_cost + theta_lk * abs(benefit)) / (1.0 - delta)
    return ThresholdVerdict(share=bool(margin < 0.0), margin=float(margin),
                            boundary=bool(abs(margin) <= 2.0 * tol * scale))


def closed_form_share(benefit: float, comm_cost: float, delta: float, r: float,
                      theta_lk: float) -> bool:
    """Closed form of the same sharing condition (strict comparison)."""
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = float(np.float64(benefit) / np.float64(comm_cost))
        threshold = float(np.float64(chi(delta, r)) / np.float64(theta_lk))
    return bool(ratio > threshold)
