"""Mean-square stability constants, regime classification and cost bounds.

From the per-agent covariances the error recursion yields the constants

    rho_max = max_k lambda_max(I - mu R_k)       rho_min = min_k lambda_min(I - mu R_k)
    kappa   = max_k Tr(R_k^2) sigma2_k           beta    = min_k lambda_min(R_k)

with the step-size limit mu_max = 2 / max_k lambda_max(R_k) and steady-state
weighted-error bound mu^2 kappa / (1 - rho_max^2).  The sandwich

    rho_min^2 ||w_err||^2_R  <=  benefit_oracle  <=  rho_max^2 ||w_err||^2_R

classifies operating regimes: agents whose weighted error exceeds
c chi / (rho_min^2 eps) must share (far field); agents below c chi / rho_max^2
never share (near field).  The cooperation-rate bound and the public-cost
comparison follow the Markov-inequality argument with eta the steady
weighted-error-to-mu ratio.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .diffusion import IterationRecord, steady_mean
from .model import AgentParams, DataModel
from .pairing import PairingStats


@dataclass(frozen=True)
class StabilityBounds:
    mu: float
    rho_max: float
    rho_min: float
    kappa: float
    beta: float
    mu_max: float
    steady_bound: float   # limsup E||w_err||^2_R <= mu^2 kappa / (1 - rho_max^2)


def compute_bounds(model: DataModel, mu: float) -> StabilityBounds:
    if mu <= 0:
        raise ValueError("mu must be positive")
    lo = np.empty(model.n_agents)
    hi = np.empty(model.n_agents)
    tr2 = np.empty(model.n_agents)
    for k in range(model.n_agents):
        eig = np.linalg.eigvalsh(model.ru[k])
        lo[k], hi[k] = eig[0], eig[-1]
        tr2[k] = float((eig ** 2).sum())
    rho_max = float(np.max(1.0 - mu * lo))
    rho_min = float(np.min(1.0 - mu * hi))
    kappa = float(np.max(tr2 * model.noise_var))
    beta = float(np.min(lo))
    mu_max = float(2.0 / np.max(hi))
    steady = mu * mu * kappa / (1.0 - rho_max ** 2) if rho_max ** 2 < 1.0 else np.inf
    return StabilityBounds(mu=mu, rho_max=rho_max, rho_min=rho_min, kappa=kappa,
                           beta=beta, mu_max=mu_max, steady_bound=float(steady))


@dataclass(frozen=True)
class RegimeVerdict:
    regime: str          # 'far' | 'near' | 'indeterminate'
    p_far: float         # empirical Prob{ werr > c chi / (rho_min^2 eps) }
    p_near: float        # empirical Prob{ werr < c chi / rho_max^2 }
    far_threshold: float
    near_threshold: float
    phi: float


def classify_regime(samples, comm_cost: float, chi_value: float,
                    bounds: StabilityBounds, epsilon: float,
                    phi: float = 0.9) -> RegimeVerdict:
    """Classify an agent from sampled weighted errors.

    Far field: sharing is the best response at any reputation >= epsilon.
    Near field: withholding is the best response even at full reputation.
    """
    samples = np.asarray(samples, dtype=np.float64)
    if samples.size == 0:
        raise ValueError("need at least one sample")
    if not 0.5 <= phi <= 1.0:
        raise ValueError("phi must lie in [0.5, 1]")
    with np.errstate(divide="ignore"):
        far_thr = comm_cost * chi_value / (bounds.rho_min ** 2 * epsilon) \
            if bounds.rho_min != 0.0 else np.inf
        near_thr = comm_cost * chi_value / bounds.rho_max ** 2 \
            if bounds.rho_max != 0.0 else np.inf
    p_far = float(np.mean(samples > far_thr))
    p_near = float(np.mean(samples < near_thr))
    if p_far > phi:
        regime = "far"
    elif p_near > phi:
        regime = "near"
    else:
        regime = "indeterminate"
    return RegimeVerdict(regime=regime, p_far=p_far, p_near=p_near,
                         far_threshold=float(far_thr),
                         near_threshold=float(near_thr), phi=phi)


@dataclass(frozen=True)
class CoopRateBound:
    eta: float           # max_k steady mean weighted error / mu
    c_o: float           # critical cost eta mu rho_max^2 / chi
    chi_value: float
    mu: float

    def rate_bound(self, comm_cost: float) -> float:
        """Upper bound min{c_o / c, 1} on any agent's cooperation rate."""
        if comm_cost <= 0.0:
            return 1.0
        return float(min(self.c_o / comm_cost, 1.0))


def coop_bound_from_eta(eta: float, bounds: StabilityBounds,
                        chi_value: float) -> CoopRateBound:
    c_o = eta * bounds.mu * bounds.rho_max ** 2 / chi_value
    return CoopRateBound(eta=float(eta), c_o=float(c_o), chi_value=chi_value,
                         mu=bounds.mu)


def cooperation_bound(records: Sequence[IterationRecord], bounds: StabilityBounds,
                      chi_value: float, window_frac: float = 0.2) -> CoopRateBound:
    """Estimate eta from a run's trailing window and form the critical cost.

    Valid for any record set whose steady weighted errors dominate those of
    the run being bounded (cooperation only lowers steady error, so a
    never-share companion run gives a uniform eta).
    """
    steady_err = steady_mean(records, "werr", window_frac)
    eta = float(np.max(steady_err) / bounds.mu)
    return coop_bound_from_eta(eta, bounds, chi_value)


@dataclass(frozen=True)
class PublicCostReport:
    measured_rep: float        # steady J_pub of the reputation run
    measured_coop: float       # steady J_pub of the always-share run
    bound_rep_upper: float     # N eta mu + sum sigma2 + c_o sum(1 - p_kk)
    bound_coop_lower: float    # N beta MSD_coop + sum sigma2 + c sum(1 - p_kk)
    crossover_cost: float      # cost above which the upper bound undercuts the lower
    comm_cost: float
    eta: float
    msd_coop: float
    sum_one_minus_pkk: float


def public_cost_bounds(records_rep: Sequence[IterationRecord],
                       records_coop: Sequence[IterationRecord],
                       model: DataModel, bounds: StabilityBounds,
                       params: AgentParams, pairing_stats: PairingStats,
                       coop_bound: CoopRateBound,
                       window_frac: float = 0.2) -> PublicCostReport:
    """Steady public-cost comparison of reputation vs unconditional sharing."""
    if not records_rep or not records_coop:
        raise ValueError("missing companion run: need reputation and always_share records")
    n = model.n_agents
    sig = float(model.noise_var.sum())
    spk = float(np.sum(1.0 - pairing_stats.self_prob()))
    eta = coop_bound.eta
    msd_coop = float(steady_mean(records_coop, "msd", window_frac))
    measured_rep = float(steady_mean(records_rep, "jpub", window_frac))
    measured_coop = float(steady_mean(records_coop, "jpub", window_frac))
    upper = n * eta * bounds.mu + sig + coop_bound.c_o * spk
    lower = n * bounds.beta * msd_coop + sig + params.comm_cost * spk
    crossover = coop_bound.c_o + n * (eta * bounds.mu - bounds.beta * msd_coop) / spk \
        if spk > 0 else np.inf
    return PublicCostReport(measured_rep=measured_rep, measured_coop=measured_coop,
                            bound_rep_upper=float(upper), bound_coop_lower=float(lower),
                            crossover_cost=float(crossover),
                            comm_cost=params.comm_cost, eta=eta, msd_coop=msd_coop,
                            sum_one_minus_pkk=spk)
