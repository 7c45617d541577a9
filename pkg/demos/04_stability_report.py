"""Stability bounds, operating regimes and the cooperation-rate ceiling.

Produces the three companion runs (adaptive / always / never) that the report
generator needs, prints the report, and then shows the min{c_o/c, 1} ceiling
against measured cooperation rates on a small cost ladder.

Usage: python3 demos/04_stability_report.py
"""
from pathlib import Path

import numpy as np

import selfnet as sn

try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

OUT = Path(__file__).parent / "out"

ladder = [0.002, 0.02, 0.2]
cfg = sn.make_config({
    "name": "stability_demo",
    "n_agents": 8, "dim": 4,
    "mu": 0.02, "seed": 11,
    "noise_profile": {"kind": "uniform", "low": 0.05, "high": 0.15},
    "ru_profile": {"kind": "diag_uniform", "low": 2.0, "high": 4.0},
    "topology": {"kind": "ring_chords", "extra_edges": 6},
    "n_iters": 2000, "n_monte_carlo": 24,
    "sweep": ladder,
    "sweep_modes": ["reputation", "always_share", "never_share"],
})

run_dir = OUT / "stability_runs"
res = sn.run_sweep(cfg, out_dir=run_dir)

model = sn.build_model(cfg)
bounds = sn.compute_bounds(model, cfg.mu)
print(f"step-size bound mu_max = {bounds.mu_max:.4f} (running at mu = {cfg.mu})")
print(f"contraction factors rho_min = {bounds.rho_min:.4f}, "
      f"rho_max = {bounds.rho_max:.4f}\n")

print(sn.emit_report(run_dir, pairing_trials=20000))

# measured cooperation against the theoretical ceiling
chi_val = sn.chi(cfg.delta, cfg.r)
never = sn.records_from_npz(res.point(ladder[0], "never_share").npz_path)
cb = sn.cooperation_bound(never, bounds, chi_val)
cs = np.logspace(-3, 0, 40)
print(f"cooperation ceiling: c_o = {cb.c_o:.4f}; any agent's steady share "
      "rate must stay below min(c_o/c, 1)")

if plt is not None:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogx(cs, [cb.rate_bound(c) for c in cs], "k-", label="bound min($c_o$/c, 1)")
    for c in ladder:
        rates = res.point(c, "reputation").steady["coop_rate"]
        ax.semilogx([c] * len(rates), rates, "C2.", ms=8,
                    label="measured per agent" if c == ladder[0] else None)
    ax.set_xlabel("communication cost c")
    ax.set_ylabel("steady cooperation rate")
    ax.set_ylim(-0.05, 1.1)
    ax.legend()
    ax.set_title("threshold protocol obeys the rate ceiling")
    fig.tight_layout()
    fig.savefig(OUT / "rate_bound.png", dpi=120)
    print(f"\nfigure -> {OUT / 'rate_bound.png'}")
else:
    print("\nmatplotlib not installed; skipping the figure")
