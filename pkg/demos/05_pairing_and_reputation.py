"""Random pairing statistics and the life of a reputation score.

First exhibit: empirical pairing probabilities for the two matching schemes —
global matching on a complete graph (everyone always paired) versus the
distributed scheme on a sparse graph, where an agent is sometimes left
self-paired and partner frequencies follow the local degrees.

Second exhibit: a reputation score under the exponential scoreboard
theta <- max(r theta + (1-r) a, epsilon): decay while the partner withholds,
recovery once it resumes, and the moment the threshold rule writes the
partner off.

Usage: python3 demos/05_pairing_and_reputation.py
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
rng = np.random.default_rng(7)

n = 12
sparse = sn.Topology.ring_with_chords(n, 6, rng)
stats = {}
for label, topo, scheme in (("full graph / global matching", sn.Topology.full(n), "full"),
                            ("sparse graph / distributed", sparse, "distributed")):
    engine = sn.make_pairing_engine(scheme, topo)
    st = sn.estimate_pairing_probs(engine, 40_000, np.random.default_rng(17))
    stats[scheme] = st
    probs = st.prob()
    print(f"{label}: mean self-pair prob = {st.self_prob().mean():.4f}")
    with np.printoptions(precision=3, suppress=True, linewidth=160):
        print(probs, "\n")

print("degrees on the sparse graph:",
      [sparse.degree(k) for k in range(n)])
print("(higher-degree agents are left unpaired less often)\n")

# --- reputation dynamics ----------------------------------------------------
params = sn.AgentParams()
theta0, r, eps = 1.0, params.r, params.epsilon
withhold = [theta0]
for _ in range(80):
    withhold.append(sn.reputation_update(withhold[-1], action=False,
                                         paired=True, r=r, epsilon=eps))
recover = [withhold[-1]]
for _ in range(80):
    recover.append(sn.reputation_update(recover[-1], action=True,
                                        paired=True, r=r, epsilon=eps))

closed = [max(r ** m * theta0, eps) for m in range(81)]
assert np.allclose(withhold, closed)  # geometric decay down to the floor

chi_val = sn.chi(params.delta, params.r)
ratio = 5.0  # benefit-to-cost ratio of a would-be cooperator (below chi/eps)
cutoff = next(m for m, th in enumerate(withhold)
              if not sn.decide_action(ratio, 1.0, chi_val, th).share)
print(f"score after 80 withheld exchanges: {withhold[-1]:.4f} (floor eps={eps})")
print(f"a partner with b/c = {ratio:g} stops reciprocating after "
      f"{cutoff} consecutive withholds (threshold chi/theta crosses {ratio:g})")
print(f"recovery back above theta=0.9 takes "
      f"{next(m for m, th in enumerate(recover) if th > 0.9)} shared exchanges")

if plt is not None:
    OUT.mkdir(exist_ok=True)
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4))
    im = ax1.imshow(stats["distributed"].prob(), cmap="viridis")
    ax1.set_title("distributed pairing probabilities")
    ax1.set_xlabel("partner (last column: self)")
    ax1.set_ylabel("agent")
    fig.colorbar(im, ax=ax1, shrink=0.8)
    steps = np.arange(len(withhold))
    ax2.plot(steps, withhold, "C3", label="partner withholds")
    ax2.plot(steps[-1] + np.arange(len(recover)), recover, "C2",
             label="partner shares again")
    ax2.axhline(eps, color="k", ls=":", lw=1, label=r"floor $\epsilon$")
    ax2.axvline(cutoff, color="C3", ls="--", lw=1)
    ax2.set_xlabel("paired exchanges")
    ax2.set_ylabel(r"reputation $\theta$")
    ax2.legend(fontsize=8)
    ax2.set_title("scoreboard decay and recovery")
    fig.tight_layout()
    fig.savefig(OUT / "pairing_reputation.png", dpi=120)
    print(f"\nfigure -> {OUT / 'pairing_reputation.png'}")
else:
    print("\nmatplotlib not installed; skipping the figure")
