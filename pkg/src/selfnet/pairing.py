"""Random pairing of agents for one-shot exchanges.

Two engines are provided.  `FullPairing` draws a uniform perfect matching of
an even-sized, fully connected network, so every agent is paired at every
iteration with marginal pair probability 1/(N-1).  `DistributedPairing`
implements the decentralized greedy scheme: every agent draws an independent
U[0,1] value, the unpaired agent holding the smallest value grabs its
unpaired neighbor with the smallest value, and the process repeats until no
more pairs can form; leftover agents are self-paired for that iteration.
Ties are broken toward the lower agent index.

Both engines expose `draw_batch(B, rng)` consuming exactly one (B, N) uniform
block from the generator, so single draws and batched ensemble draws share
the same stream layout.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Topology


@dataclass(frozen=True)
class PairingOutcome:
    """Partner map for one iteration; partner[k] == k means self-paired."""

    partner: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.partner, dtype=np.int64)
        if p.ndim != 1:
            raise ValueError("partner must be a 1-D index array")
        if not np.array_equal(p[p], np.arange(p.shape[0])):
            raise ValueError("partner map must be an involution")
        object.__setattr__(self, "partner", p)

    @property
    def n_agents(self) -> int:
        return self.partner.shape[0]

    def is_self_paired(self, k: int) -> bool:
        return int(self.partner[k]) == int(k)

    def pairs(self) -> list[tuple[int, int]]:
        return [(k, int(l)) for k, l in enumerate(self.partner) if k < l]


class FullPairing:
    """Uniform perfect matching of an even, fully connected network."""

    def __init__(self, n_agents: int):
        if n_agents < 2 or n_agents % 2:
            raise ValueError("full pairing needs an even number of agents >= 2")
        self.n_agents = n_agents

    def draw_batch(self, batch: int, rng: np.random.Generator) -> np.ndarray:
        n = self.n_agents
        keys = rng.random((batch, n))
        perm = np.argsort(keys, axis=1, kind="stable")
        partner = np.empty((batch, n), dtype=np.int64)
        left, right = perm[:, 0::2], perm[:, 1::2]
        np.put_along_axis(partner, left, right, axis=1)
        np.put_along_axis(partner, right, left, axis=1)
        return partner

    def draw(self, rng: np.random.Generator) -> PairingOutcome:
        return PairingOutcome(self.draw_batch(1, rng)[0])


class DistributedPairing:
    """Greedy value-ordered pairing restricted to a communication graph."""

    def __init__(self, topology: Topology):
        self.topology = topology
        self.n_agents = topology.n_agents
        self._nbrs = [list(row) for row in topology.neighbors]

    def draw_batch(self, batch: int, rng: np.random.Generator) -> np.ndarray:
        n = self.n_agents
        values = rng.random((batch, n))
        order = np.argsort(values, axis=1, kind="stable")
        out = np.empty((batch, n), dtype=np.int64)
        nbrs = self._nbrs
        for b in range(batch):
            vals = values[b].tolist()
            partner = list(range(n))
            done = [False] * n
            for k in order[b].tolist():
                if done[k]:
                    continue
                best = -1
                best_val = 2.0
                for l in nbrs[k]:
                    if not done[l] and vals[l] < best_val:
                        best_val = vals[l]
                        best = l
                done[k] = True
                if best >= 0:
                    partner[k] = best
                    partner[best] = k
                    done[best] = True
            out[b] = partner
        return out

    def draw(self, rng: np.random.Generator) -> PairingOutcome:
        return PairingOutcome(self.draw_batch(1, rng)[0])


def pair_fully(n_agents: int, rng: np.random.Generator) -> PairingOutcome:
    return FullPairing(n_agents).draw(rng)


def pair_distributed(topology: Topology, rng: np.random.Generator) -> PairingOutcome:
    return DistributedPairing(topology).draw(rng)


@dataclass(frozen=True)
class PairingStats:
    """Empirical pairing counts; counts[k, l] over trials, diagonal = self-pairs."""

    counts: np.ndarray
    trials: int

    def prob(self) -> np.ndarray:
        return self.counts / float(self.trials)

    def self_prob(self) -> np.ndarray:
        return np.diag(self.counts) / float(self.trials)


def estimate_pairing_probs(engine, trials: int, rng: np.random.Generator,
                           batch: int = 4096) -> PairingStats:
    """Monte Carlo estimate of the pairing probability matrix."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    n = engine.n_agents
    counts = np.zeros(n * n, dtype=np.int64)
    idx = np.arange(n, dtype=np.int64) * n
    left = trials
    while left > 0:
        b = min(batch, left)
        partner = engine.draw_batch(b, rng)
        counts += np.bincount((idx[None, :] + partner).ravel(), minlength=n * n)
        left -= b
    return PairingStats(counts=counts.reshape(n, n), trials=trials)
