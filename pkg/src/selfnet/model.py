"""Linear data model, network topology and per-agent containers.

Each agent k observes streaming scalar measurements

    d_k(i) = u_k(i) . w_o + v_k(i)

with a zero-mean Gaussian regressor u_k(i) of covariance R_{u,k}, zero-mean
Gaussian noise v_k(i) of variance sigma2_{v,k}, and a network-wide parameter
vector w_o.  All quantities are real valued.  The instantaneous quality of an
estimate w is the weighted squared error plus the noise floor,

    J_k(w) = (w_o - w)' R_{u,k} (w_o - w) + sigma2_{v,k}.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

Array = np.ndarray


def _as_float_array(x, name: str) -> Array:
    a = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} must be finite")
    return a


@dataclass(frozen=True)
class DataModel:
    """Second-order statistics of the network data.

    Parameters
    ----------
    wo : (M,) array
        Common parameter vector.
    ru : (N, M, M) array
        Per-agent regressor covariances (symmetric positive definite).
        A single (M, M) matrix is broadcast to all agents.
    noise_var : (N,) array
        Per-agent measurement-noise variances (non-negative).  A scalar is
        broadcast to all agents.
    """

    wo: Array
    ru: Array
    noise_var: Array
    # derived, filled in __post_init__
    chol: Array = field(init=False, repr=False, compare=False)
    ru_diag: Array | None = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        wo = _as_float_array(self.wo, "wo")
        if wo.ndim != 1:
            raise ValueError("wo must be a 1-D vector")
        m = wo.shape[0]

        ru = _as_float_array(self.ru, "ru")
        if ru.ndim == 2:
            ru = ru[None, :, :]
        if ru.ndim != 3 or ru.shape[1:] != (m, m):
            raise ValueError(f"ru must have shape (N, {m}, {m})")

        nv = _as_float_array(self.noise_var, "noise_var")
        if nv.ndim == 0:
            nv = np.full(ru.shape[0] if ru.shape[0] > 1 else 1, float(nv))
        if nv.ndim != 1:
            raise ValueError("noise_var must be a scalar or 1-D")
        n = max(ru.shape[0], nv.shape[0])
        if ru.shape[0] == 1:
            ru = np.broadcast_to(ru, (n, m, m)).copy()
        if nv.shape[0] == 1:
            nv = np.full(n, nv[0])
        if ru.shape[0] != n or nv.shape[0] != n:
            raise ValueError("ru and noise_var disagree on the number of agents")
        if np.any(nv < 0):
            raise ValueError("noise_var entries must be non-negative")
        if not np.allclose(ru, np.swapaxes(ru, 1, 2), atol=1e-12):
            raise ValueError("ru matrices must be symmetric")
        try:
            chol = np.linalg.cholesky(ru)
        except np.linalg.LinAlgError as exc:
            raise ValueError("ru matrices must be positive definite") from exc

        diag = np.zeros((n, m))
        is_diag = True
        for k in range(n):
            off = ru[k] - np.diag(np.diag(ru[k]))
            if np.any(off != 0.0):
                is_diag = False
                break
            diag[k] = np.diag(ru[k])

        for name, val in (("wo", wo), ("ru", ru), ("noise_var", nv),
                          ("chol", chol), ("ru_diag", diag if is_diag else None)):
            object.__setattr__(self, name, val)

    @property
    def n_agents(self) -> int:
        return self.ru.shape[0]

    @property
    def dim(self) -> int:
        return self.wo.shape[0]


@dataclass(frozen=True)
class Topology:
    """Undirected, connected communication graph without self-loops."""

    n_agents: int
    neighbors: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        n = self.n_agents
        if n < 2:
            raise ValueError("topology needs at least two agents")
        if len(self.neighbors) != n:
            raise ValueError("neighbor list length must equal n_agents")
        nbrs = tuple(tuple(sorted(set(int(j) for j in row))) for row in self.neighbors)
        for k, row in enumerate(nbrs):
            for j in row:
                if j == k:
                    raise ValueError(f"agent {k} lists itself as a neighbor")
                if not 0 <= j < n:
                    raise ValueError(f"agent {k} lists out-of-range neighbor {j}")
                if k not in nbrs[j]:
                    raise ValueError(f"edge ({k},{j}) is not symmetric")
        # connectivity via BFS
        seen = {0}
        stack = [0]
        while stack:
            cur = stack.pop()
            for j in nbrs[cur]:
                if j not in seen:
                    seen.add(j)
                    stack.append(j)
        if len(seen) != n:
            raise ValueError("topology must be connected")
        object.__setattr__(self, "neighbors", nbrs)

    # -- constructors ------------------------------------------------------
    @staticmethod
    def full(n: int) -> "Topology":
        return Topology(n, tuple(tuple(j for j in range(n) if j != k) for k in range(n)))

    @staticmethod
    def ring(n: int) -> "Topology":
        return Topology(n, tuple(((k - 1) % n, (k + 1) % n) for k in range(n)))

    @staticmethod
    def from_edges(n: int, edges: Iterable[Sequence[int]]) -> "Topology":
        rows: list[set[int]] = [set() for _ in range(n)]
        for e in edges:
            i, j = int(e[0]), int(e[1])
            rows[i].add(j)
            rows[j].add(i)
        return Topology(n, tuple(tuple(sorted(r)) for r in rows))

    @staticmethod
    def ring_with_chords(n: int, extra_edges: int, rng: np.random.Generator) -> "Topology":
        """Ring plus `extra_edges` distinct random chords (always connected)."""
        edges = {(k, (k + 1) % n) if k < (k + 1) % n else ((k + 1) % n, k) for k in range(n)}
        candidates = [(i, j) for i in range(n) for j in range(i + 1, n) if (i, j) not in edges]
        extra = min(extra_edges, len(candidates))
        if extra > 0:
            pick = rng.choice(len(candidates), size=extra, replace=False)
            edges.update(candidates[int(p)] for p in pick)
        return Topology.from_edges(n, sorted(edges))

    @property
    def is_complete(self) -> bool:
        return all(len(row) == self.n_agents - 1 for row in self.neighbors)

    def edges(self) -> list[tuple[int, int]]:
        return [(k, j) for k in range(self.n_agents) for j in self.neighbors[k] if k < j]

    def degree(self, k: int) -> int:
        return len(self.neighbors[k])


@dataclass(frozen=True)
class AgentParams:
    """Algorithm parameters, shared by all agents.

    mu        adaptation step-size, > 0
    alpha     self-combination weight in [0, 1]
    comm_cost per-transmission cost c >= 0
    delta     future-payoff discount in (0, 1)
    r         reputation smoothing factor in (0, 1)
    epsilon   reputation floor in (0, 1)
    nu        learning rate of the objective-estimate EWMA, in (0, 1]
    """

    mu: float = 0.01
    alpha: float = 0.5
    comm_cost: float = 0.01
    delta: float = 0.99
    r: float = 0.95
    epsilon: float = 0.1
    nu: float = 0.01

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError("mu must be positive")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if self.comm_cost < 0:
            raise ValueError("comm_cost must be non-negative")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        if not 0.0 < self.r < 1.0:
            raise ValueError("r must lie in (0, 1)")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must lie in (0, 1)")
        if not 0.0 < self.nu <= 1.0:
            raise ValueError("nu must lie in (0, 1]")


@dataclass
class AgentState:
    """Mutable per-agent state between iterations.

    w           current combined estimate
    psi         latest intermediate (post-adapt) estimate
    wo_hat      EWMA estimate of w_o used by the realtime benefit proxy
    reputations theta_{l k}: agent k's score of each neighbor l, in [eps, 1]
    """

    w: Array
    psi: Array
    wo_hat: Array
    reputations: dict[int, float]


def init_agent_state(dim: int, neighbors: Iterable[int]) -> AgentState:
    z = np.zeros(dim)
    return AgentState(w=z.copy(), psi=z.copy(), wo_hat=z.copy(),
                      reputations={int(l): 1.0 for l in neighbors})


@dataclass(frozen=True)
class DataSample:
    """One scalar observation d = u . w_o + v together with its regressor."""

    u: Array
    d: float


def generate_sample(model: DataModel, agent: int, rng: np.random.Generator) -> DataSample:
    """Draw one (u, d) pair for `agent` from the model statistics."""
    z = rng.standard_normal(model.dim)
    u = z @ model.chol[agent].T
    v = rng.standard_normal() * np.sqrt(model.noise_var[agent])
    return DataSample(u=u, d=float(u @ model.wo + v))


def weighted_sq_error(model: DataModel, agent: int, w: Array) -> float:
    """(w_o - w)' R_{u,k} (w_o - w)."""
    e = model.wo - np.asarray(w, dtype=np.float64)
    return float(e @ model.ru[agent] @ e)


def estimation_cost(model: DataModel, agent: int, w: Array) -> float:
    """Weighted squared error plus the irreducible noise floor."""
    return weighted_sq_error(model, agent, w) + float(model.noise_var[agent])
