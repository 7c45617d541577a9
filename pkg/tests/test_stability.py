"""Stability constants, the benefit sandwich, regimes and cost bounds."""
import numpy as np
import pytest

import selfnet as sn

from conftest import diag_model, tiny_model


def bounds_example():
    # R_1 = I_2, R_2 = diag(1, 3), sigma2 = (0.1, 0.2), mu = 0.1:
    # rho_max = 1 - .1*1 = .9, rho_min = 1 - .1*3 = .7, kappa = max(2*.1, 10*.2)=2,
    # beta = 1, mu_max = 2/3, steady = .01*2/(1-.81) = 2/19
    model = diag_model([0.0, 0.0], [[1.0, 1.0], [1.0, 3.0]], [0.1, 0.2])
    return model, sn.compute_bounds(model, 0.1)


def test_compute_bounds_frozen_example():
    _, b = bounds_example()
    assert b.rho_max == pytest.approx(0.9, rel=1e-14)
    assert b.rho_min == pytest.approx(0.7, rel=1e-14)
    assert b.kappa == pytest.approx(2.0, rel=1e-14)
    assert b.beta == pytest.approx(1.0, rel=1e-14)
    assert b.mu_max == pytest.approx(2.0 / 3.0, rel=1e-14)
    assert b.steady_bound == pytest.approx(2.0 / 19.0, rel=1e-12)


def test_compute_bounds_unstable_step_size():
    model = diag_model([0.0], [[25.0]], 0.1)
    b = sn.compute_bounds(model, 0.1)   # rho_max = 1 - .1*25 = -1.5
    assert b.steady_bound == np.inf
    with pytest.raises(ValueError):
        sn.compute_bounds(model, 0.0)


def test_compute_bounds_handles_correlated_covariances():
    c = np.array([[2.0, 0.5], [0.5, 1.0]])
    eig = np.linalg.eigvalsh(c)
    model = sn.DataModel(wo=np.zeros(2), ru=c, noise_var=0.3)
    b = sn.compute_bounds(model, 0.05)
    assert b.beta == pytest.approx(eig[0], rel=1e-12)
    assert b.mu_max == pytest.approx(2.0 / eig[-1], rel=1e-12)
    assert b.kappa == pytest.approx(0.3 * (eig ** 2).sum(), rel=1e-12)


def test_benefit_sandwich_sampled():
    # rho_min^2 werr <= oracle <= rho_max^2 werr whenever I - mu R > 0
    rng = np.random.default_rng(3)
    for _ in range(300):
        m = int(rng.integers(1, 6))
        a = rng.standard_normal((m, m)) * 0.5
        cov = a @ a.T + np.diag(rng.uniform(0.2, 1.0, m))
        lam = np.linalg.eigvalsh(cov)
        mu = float(rng.uniform(0.0, 0.9 / lam[-1]))
        if mu == 0.0:
            continue
        model = sn.DataModel(wo=np.zeros(m), ru=cov, noise_var=0.1)
        b = sn.compute_bounds(model, mu)
        w_err = rng.standard_normal(m) * rng.uniform(0.1, 3.0)
        werr = float(w_err @ cov @ w_err)
        oracle = sn.benefit_oracle(w_err, cov, mu)
        assert b.rho_min ** 2 * werr <= oracle * (1 + 1e-12)
        assert oracle <= b.rho_max ** 2 * werr * (1 + 1e-12)


# ------------------------------------------------------------------- regimes

def test_classify_regime_trivial_cases():
    _, b = bounds_example()
    chi_v = sn.chi(0.99, 0.95)
    far = sn.classify_regime(np.full(100, 1e9), 0.01, chi_v, b, 0.1)
    assert far.regime == "far" and far.p_far == 1.0
    near = sn.classify_regime(np.full(100, 1e-12), 0.01, chi_v, b, 0.1)
    assert near.regime == "near" and near.p_near == 1.0
    assert near.near_threshold < near.far_threshold
    # straddling samples are indeterminate
    mid = np.full(100, (near.near_threshold + near.far_threshold) / 2)
    assert sn.classify_regime(mid, 0.01, chi_v, b, 0.1).regime == "indeterminate"


def test_classify_regime_validation():
    _, b = bounds_example()
    with pytest.raises(ValueError):
        sn.classify_regime(np.array([]), 0.01, 1.2, b, 0.1)
    with pytest.raises(ValueError):
        sn.classify_regime(np.ones(5), 0.01, 1.2, b, 0.1, phi=0.3)


def test_far_field_samples_force_sharing():
    # any weighted error above the far threshold clears the decision rule at
    # every admissible reputation
    rng = np.random.default_rng(6)
    chi_v = sn.chi(0.99, 0.95)
    eps, c = 0.1, 0.05
    for _ in range(50):
        m = int(rng.integers(1, 5))
        a = rng.standard_normal((m, m)) * 0.3
        cov = a @ a.T + np.eye(m)
        lam = np.linalg.eigvalsh(cov)
        mu = float(rng.uniform(0.01, 0.5 / lam[-1]))
        model = sn.DataModel(wo=np.zeros(m), ru=cov, noise_var=0.1)
        b = sn.compute_bounds(model, mu)
        far_thr = c * chi_v / (b.rho_min ** 2 * eps)
        v = rng.standard_normal(m)
        t = np.sqrt(far_thr * 1.01 / (v @ cov @ v))
        w_err = t * v   # werr = 1.01 * far_thr
        theta = float(rng.uniform(eps, 1.0))
        assert sn.decide_action(sn.benefit_oracle(w_err, cov, mu), c, chi_v,
                                theta).share


def test_near_field_samples_forbid_sharing():
    rng = np.random.default_rng(7)
    chi_v = sn.chi(0.99, 0.95)
    c = 0.05
    for _ in range(50):
        m = int(rng.integers(1, 5))
        a = rng.standard_normal((m, m)) * 0.3
        cov = a @ a.T + np.eye(m)
        lam = np.linalg.eigvalsh(cov)
        mu = float(rng.uniform(0.01, 0.5 / lam[-1]))
        model = sn.DataModel(wo=np.zeros(m), ru=cov, noise_var=0.1)
        b = sn.compute_bounds(model, mu)
        near_thr = c * chi_v / b.rho_max ** 2
        v = rng.standard_normal(m)
        t = np.sqrt(near_thr * 0.99 / (v @ cov @ v))
        w_err = t * v   # werr = 0.99 * near_thr
        theta = float(rng.uniform(0.05, 1.0))
        assert not sn.decide_action(sn.benefit_oracle(w_err, cov, mu), c, chi_v,
                                    theta).share


# ---------------------------------------------------------- cooperation rate

def test_rate_bound_shape():
    _, b = bounds_example()
    cb = sn.coop_bound_from_eta(eta=2.0, bounds=b, chi_value=1.2)
    assert cb.c_o == pytest.approx(2.0 * 0.1 * 0.81 / 1.2, rel=1e-12)
    assert cb.rate_bound(cb.c_o / 2) == 1.0          # cheap: bound saturates
    assert cb.rate_bound(2 * cb.c_o) == pytest.approx(0.5, rel=1e-12)
    assert cb.rate_bound(4 * cb.c_o) == pytest.approx(0.25, rel=1e-12)
    assert cb.rate_bound(0.0) == 1.0


def test_cooperation_bound_from_records():
    model = tiny_model(n=4, dim=3, seed=2)
    topo = sn.Topology.ring(4)
    params = sn.AgentParams(mu=0.02)
    records = sn.run(model, topo, params, mode="never_share", n_iters=600,
                     n_monte_carlo=16, seed=5)
    b = sn.compute_bounds(model, params.mu)
    cb = sn.cooperation_bound(records, b, sn.chi(params.delta, params.r))
    assert cb.eta == pytest.approx(
        np.max(sn.steady_mean(records, "werr")) / params.mu, rel=1e-12)
    assert cb.c_o > 0


# ------------------------------------------------------------- public cost

@pytest.fixture(scope="module")
def cost_comparison():
    model = tiny_model(n=6, dim=3, seed=9, noise=0.1)
    topo = sn.Topology.ring_with_chords(6, 4, np.random.default_rng(3))
    params = sn.AgentParams(mu=0.02, comm_cost=0.05)
    base = dict(n_iters=1500, n_monte_carlo=32, seed=21)
    rep = sn.run(model, topo, params, mode="reputation", **base)
    coop = sn.run(model, topo, params, mode="always_share", **base)
    never = sn.run(model, topo, params, mode="never_share", **base)
    bounds = sn.compute_bounds(model, params.mu)
    chi_v = sn.chi(params.delta, params.r)
    cb = sn.cooperation_bound(never, bounds, chi_v)
    stats = sn.estimate_pairing_probs(sn.DistributedPairing(topo), 100_000,
                                      np.random.default_rng(17))
    report = sn.public_cost_bounds(rep, coop, model, bounds, params, stats, cb)
    return report, params, cb


def test_public_cost_bounds_hold(cost_comparison):
    report, params, cb = cost_comparison
    assert report.measured_rep <= report.bound_rep_upper
    assert report.measured_coop >= report.bound_coop_lower
    assert report.eta == cb.eta
    assert 0.0 < report.sum_one_minus_pkk <= 6.0


def test_crossover_cost_separates_the_bounds(cost_comparison):
    report, params, _ = cost_comparison
    # upper bound is cost-independent, lower bound grows linearly: past the
    # crossover the guaranteed-coop cost exceeds the reputation ceiling
    spk = report.sum_one_minus_pkk
    def lower(c):
        return report.bound_coop_lower + (c - report.comm_cost) * spk
    assert lower(report.crossover_cost) == pytest.approx(report.bound_rep_upper,
                                                         rel=1e-9)
    assert lower(report.crossover_cost * 1.5) > report.bound_rep_upper


def test_public_cost_requires_companion_runs(cost_comparison):
    report, params, cb = cost_comparison
    model = tiny_model(n=6, dim=3, seed=9, noise=0.1)
    bounds = sn.compute_bounds(model, params.mu)
    stats = sn.PairingStats(counts=np.eye(6, dtype=np.int64), trials=1)
    with pytest.raises(ValueError, match="companion"):
        sn.public_cost_bounds([], [], model, bounds, params, stats, cb)
