"""Anatomy of one sharing interaction: payoffs, dominance, thresholds.

Three exhibits on a single realized pair:

  1. the 2x2 expected-payoff tables, showing withholding strictly dominant
     yet mutual sharing Pareto-superior when both benefit-cost ratios pass 1;
  2. the repeated-game threshold chi/theta that rescues cooperation, and how
     it moves with patience delta, reputation inertia r, and the partner's
     current score theta;
  3. the truncated-series evaluation of the far-sighted condition agreeing
     with the closed-form rule away from the knife edge.

Usage: python3 demos/03_stage_game.py
"""
import numpy as np

import selfnet as sn

rng = np.random.default_rng(42)
m = 4
a = rng.standard_normal((m, m)) * 0.4
cov = a @ a.T + np.eye(m)
params = sn.AgentParams(mu=0.01, alpha=0.5, comm_cost=0.05)

# agent k is far from the optimum, agent l is close: k has little to gain
werr_k = rng.standard_normal(m) * 2.0
werr_l = rng.standard_normal(m) * 0.2

game = sn.stage_game(werr_k, werr_l, ((cov, 0.1), (cov, 0.1)),
                     params, n_samples=200_000, rng=rng)


def table(p):
    print("            partner a_l=0   partner a_l=1")
    for ak in (0, 1):
        print(f"  own a_k={ak} {p[ak, 0]:14.4f} {p[ak, 1]:15.4f}")


print(f"pair with ||werr_k|| = {np.linalg.norm(werr_k):.2f}, "
      f"||werr_l|| = {np.linalg.norm(werr_l):.2f}, c = {params.comm_cost}\n")
print("expected one-shot cost of agent k:")
table(game.payoff_k)
print("expected one-shot cost of agent l:")
table(game.payoff_l)
print(f"\nwithholding strictly dominant for both: {game.withholding_dominant()}")
print(f"one-shot Nash equilibrium: {game.nash_equilibrium()}")

verdict = sn.pareto_classify(game)
print(f"benefits b_k = {game.benefit_k:.4f}, b_l = {game.benefit_l:.4f}")
print(f"gamma_k = {verdict.gamma_k:.2f}, gamma_l = {verdict.gamma_l:.2f} "
      f"-> {verdict.label}")
print("(the dilemma: both gain from mutual sharing, neither shares once)\n")

# --- exhibit 2: the repeated-game threshold ---------------------------------
print("threshold chi = (1 - delta r)/(delta (1 - r)); share iff b/c > chi/theta")
print(f"{'delta':>8s} {'r':>6s} {'chi':>8s}")
for delta, r in ((0.90, 0.95), (0.99, 0.95), (0.999, 0.95), (0.99, 0.80), (0.99, 0.99)):
    print(f"{delta:8.3f} {r:6.2f} {sn.chi(delta, r):8.3f}")

chi_val = sn.chi(0.99, 0.95)
ben = sn.benefit_oracle(werr_l, cov, params.mu)  # l's own far-sighted signal
print(f"\nagent l's oracle benefit {ben:.4f} against cost {params.comm_cost}:")
for theta in (1.0, 0.5, 0.2, 0.1):
    d = sn.decide_action(ben, params.comm_cost, chi_val, theta)
    print(f"  partner score theta={theta:4.2f}: ratio {d.ratio:8.2f} vs "
          f"threshold {d.threshold:8.2f} -> {'share' if d.share else 'withhold'}")
print("(a decayed reputation raises the bar until cooperation stops paying)\n")

# --- exhibit 3: series evaluation vs closed form ----------------------------
print("far-sighted condition, series summation vs closed form:")
c = 0.05
for ben in (0.02, 0.055, 0.0596, 0.0602, 0.07, 0.3):
    v = sn.series_threshold_oracle(ben, c, 0.99, 0.95, theta_lk=1.0, theta_kl=1.0)
    cf = sn.closed_form_share(ben, c, 0.99, 0.95, 1.0)
    tag = " (boundary)" if v.boundary else ""
    print(f"  b={ben:7.4f}: margin {v.margin:+.3e} -> "
          f"{'share' if v.share else 'withhold':8s} closed-form "
          f"{'share' if cf else 'withhold':8s}{tag}")
print(f"(threshold at b = c*chi = {c * chi_val:.6f})")
