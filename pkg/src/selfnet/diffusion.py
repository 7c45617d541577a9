"""Gated adapt-then-combine diffusion with self-interested agents.

One iteration, for every agent k (Algorithm: pair, adapt, act, update
reputations, combine):

    psi_k = w_k + mu u_k' (d_k - u_k w_k)                    (adapt)
    a_{kl} in {0,1} via the threshold rule on the benefit signal
    theta-scoreboard update for the realized pair
    w_k = a_{lk} [alpha psi_k + (1-alpha) psi_l] + (1-a_{lk}) psi_k   (combine)

Self-paired agents keep w_k = psi_k.  Four modes: 'reputation' (oracle
benefit), 'reputation_realtime' (data-driven benefit proxy), 'always_share'
(plain paired diffusion), 'never_share' (isolated LMS).

`run` simulates an ensemble of independent realizations, vectorized over a
leading batch axis and partitioned into fixed-size chunks; each chunk owns a
`SeedSequence`-spawned generator, so results are reproducible bit-for-bit for
a given (seed, n_monte_carlo, mc_chunk) regardless of how chunks are
scheduled.  Per iteration each chunk consumes exactly three RNG blocks in
fixed order: pairing keys (B,N), regressors (B,N,M), noise (B,N).  Actions
and reputations consume no randomness, so runs with matched seeds see
identical data and pairings in every mode and at every communication cost.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import AgentParams, AgentState, Array, DataModel, Topology
from .pairing import DistributedPairing, FullPairing, PairingOutcome
from .protocol import chi

MODES = ("reputation", "reputation_realtime", "always_share", "never_share")
DEFAULT_MC_CHUNK = 32


def adapt(w: Array, u: Array, d: float, mu: float) -> Array:
    """LMS half-step psi = w + mu u'(d - u.w)."""
    w = np.asarray(w, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    return w + mu * u * (d - u @ w)


def combine(psi_self: Array, psi_partner: Array, alpha: float, received: bool) -> Array:
    """Gated convex combination; returns psi_self unchanged when nothing arrived."""
    psi_self = np.asarray(psi_self, dtype=np.float64)
    if not received:
        return psi_self.copy()
    return alpha * psi_self + (1.0 - alpha) * np.asarray(psi_partner, dtype=np.float64)


@dataclass
class NetworkState:
    """Array-backed joint state: w/psi/wo_hat are (N, M), theta is (N, N).

    theta[k, l] is the score agent k holds about agent l; the diagonal and
    non-neighbor entries are never read.
    """

    w: Array
    psi: Array
    wo_hat: Array
    theta: Array

    def agent_view(self, k: int, topology: Topology) -> AgentState:
        return AgentState(
            w=self.w[k].copy(), psi=self.psi[k].copy(), wo_hat=self.wo_hat[k].copy(),
            reputations={l: float(self.theta[k, l]) for l in topology.neighbors[k]},
        )


def init_network_state(n_agents: int, dim: int) -> NetworkState:
    z = np.zeros((n_agents, dim))
    return NetworkState(w=z.copy(), psi=z.copy(), wo_hat=z.copy(),
                        theta=np.ones((n_agents, n_agents)))


@dataclass(frozen=True)
class StepTrace:
    """What happened during one network step."""

    pairing: PairingOutcome
    actions: dict[tuple[int, int], bool]  # (sender, receiver) -> shared?
    benefits: Array                       # (N,) decision signal per agent
    comm_paid: Array                      # (N,) cost actually paid


@dataclass(frozen=True)
class IterationRecord:
    """Ensemble-averaged metrics for one recorded iteration.

    jpub is the public cost sum_k (werr_k + sigma2_k + comm_k); msd the
    plain squared error averaged over agents; bnet the network-average
    decision signal; mean_coop_rate = shared events / paired events.
    """

    iter: int
    werr: Array
    comm: Array
    action_rate: Array
    paired_rate: Array
    jpub: float
    msd: float
    bnet: float
    mean_coop_rate: float


def make_pairing_engine(pairing, topology: Topology):
    if not isinstance(pairing, str):
        return pairing
    if pairing == "full":
        if not topology.is_complete:
            raise ValueError("pairing 'full' requires a complete topology")
        return FullPairing(topology.n_agents)
    if pairing == "distributed":
        return DistributedPairing(topology)
    raise ValueError(f"unknown pairing scheme {pairing!r}")


class _Engine:
    """Batched single-iteration kernel shared by `run` and `network_step`."""

    def __init__(self, model: DataModel, topology: Topology, params: AgentParams,
                 mode: str, pairing_engine):
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}")
        if model.n_agents != topology.n_agents:
            raise ValueError("model and topology disagree on the number of agents")
        self.model = model
        self.params = params
        self.mode = mode
        self.pairing = pairing_engine
        self.n = model.n_agents
        self.m = model.dim
        self.chi = chi(params.delta, params.r)
        self.sigma = np.sqrt(model.noise_var)
        self.arange = np.arange(self.n)
        if model.ru_diag is not None:
            self.rd = model.ru_diag                       # (N, M)
            self.diag_sqrt = np.sqrt(model.ru_diag)
            self.one_minus_mu_rd = 1.0 - params.mu * self.rd
            self.cholT = None
        else:
            self.rd = None
            self.cholT = model.chol.transpose(0, 2, 1).copy()  # u = z @ L.T

    def init_arrays(self, batch: int) -> dict[str, Array]:
        z = np.zeros((batch, self.n, self.m))
        return {"w": z.copy(), "psi": z.copy(), "wo_hat": z.copy(),
                "theta": np.ones((batch, self.n, self.n))}

    def _weighted_sq(self, e: Array) -> Array:
        # e: (B, N, M) -> (B, N) with per-agent metric R_{u,k}
        if self.rd is not None:
            return np.einsum("bnm,bnm->bn", e * self.rd[None], e)
        re = np.einsum("nmp,bnp->bnm", self.model.ru, e)
        return np.einsum("bnm,bnm->bn", e, re)

    def step(self, S: dict[str, Array], rng: np.random.Generator) -> dict[str, Array]:
        p = self.params
        wo = self.model.wo
        W = S["w"]
        batch = W.shape[0]

        partner = self.pairing.draw_batch(batch, rng)           # (B, N)
        z = rng.standard_normal((batch, self.n, self.m))
        if self.rd is not None:
            u = z * self.diag_sqrt[None]
        else:
            u = np.einsum("bnm,nmp->bnp", z, self.cholT)
        v = rng.standard_normal((batch, self.n)) * self.sigma[None]
        d = u @ wo + v

        pred_err = d - np.einsum("bnm,bnm->bn", u, W)
        psi = W + p.mu * u * pred_err[:, :, None]
        what = (1.0 - p.nu) * S["wo_hat"] + p.nu * psi
        S["wo_hat"] = what

        paired = partner != self.arange[None, :]

        if self.mode == "reputation_realtime":
            perceived = what - W
            s = np.einsum("bnm,bnm->bn", u, perceived)
            unorm2 = np.einsum("bnm,bnm->bn", u, u)
            ben = np.maximum((1.0 - p.mu * unorm2) ** 2 * s * s, 0.0)
        else:
            wt = wo[None, None, :] - W
            if self.rd is not None:
                y = wt * self.one_minus_mu_rd[None]
            else:
                y = wt - p.mu * np.einsum("nmp,bnp->bnm", self.model.ru, wt)
            ben = self._weighted_sq(y)

        theta_opp = np.take_along_axis(S["theta"], partner[:, :, None], axis=2)[:, :, 0]
        if self.mode == "always_share":
            share = paired.copy()
        elif self.mode == "never_share":
            share = np.zeros_like(paired)
        else:
            with np.errstate(divide="ignore", invalid="ignore"):
                share = ((ben / p.comm_cost) > (self.chi / theta_opp)) & paired

        a_opp = np.take_along_axis(share, partner, axis=1)
        if self.mode in ("reputation", "reputation_realtime"):
            upd = np.maximum(p.r * theta_opp + (1.0 - p.r) * a_opp, p.epsilon)
            newv = np.where(paired, upd, theta_opp)
            np.put_along_axis(S["theta"], partner[:, :, None], newv[:, :, None], axis=2)

        psi_p = np.take_along_axis(psi, partner[:, :, None], axis=1)
        w_new = np.where(a_opp[:, :, None], p.alpha * psi + (1.0 - p.alpha) * psi_p, psi)
        S["w"] = w_new
        S["psi"] = psi

        comm = np.where(share, p.comm_cost, 0.0)
        err_post = wo[None, None, :] - w_new
        werr = self._weighted_sq(err_post)
        sqerr = np.einsum("bnm,bnm->bn", err_post, err_post)
        return {"partner": partner, "paired": paired, "share": share,
                "benefit": ben, "comm": comm, "werr": werr, "sqerr": sqerr}


def network_step(state: NetworkState, model: DataModel, topology: Topology,
                 params: AgentParams, rng: np.random.Generator, *,
                 mode: str = "reputation",
                 pairing="distributed") -> tuple[NetworkState, StepTrace]:
    """Advance one iteration for a single realization; returns the new state.

    Consumes the generator exactly like one batch-1 `run` chunk.
    """
    engine = _Engine(model, topology, params, mode, make_pairing_engine(pairing, topology))
    S = {"w": state.w[None].copy(), "psi": state.psi[None].copy(),
         "wo_hat": state.wo_hat[None].copy(), "theta": state.theta[None].copy()}
    out = engine.step(S, rng)
    new_state = NetworkState(w=S["w"][0], psi=S["psi"][0],
                             wo_hat=S["wo_hat"][0], theta=S["theta"][0])
    partner = out["partner"][0]
    share = out["share"][0]
    actions = {(k, int(partner[k])): bool(share[k])
               for k in range(topology.n_agents) if partner[k] != k}
    trace = StepTrace(pairing=PairingOutcome(partner.copy()), actions=actions,
                      benefits=out["benefit"][0].copy(), comm_paid=out["comm"][0].copy())
    return new_state, trace


def run(model: DataModel, topology: Topology, params: AgentParams, *,
        mode: str = "reputation", pairing="distributed", n_iters: int,
        n_monte_carlo: int = 1, seed=0, mc_chunk: int = DEFAULT_MC_CHUNK,
        record_every: int = 1) -> list[IterationRecord]:
    """Simulate an ensemble and return per-iteration ensemble-mean records.

    `seed` may be an int or a ``numpy.random.SeedSequence``; one child stream
    is spawned per Monte-Carlo chunk.  When ``record_every`` > 1 only every
    record_every-th iteration is kept (n_iters must be divisible by it).
    """
    if n_iters <= 0 or n_monte_carlo <= 0:
        raise ValueError("n_iters and n_monte_carlo must be positive")
    if mc_chunk <= 0:
        raise ValueError("mc_chunk must be positive")
    if record_every <= 0 or n_iters % record_every:
        raise ValueError("record_every must be positive and divide n_iters")

    engine = _Engine(model, topology, params, mode, make_pairing_engine(pairing, topology))
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    sizes = [mc_chunk] * (n_monte_carlo // mc_chunk)
    if n_monte_carlo % mc_chunk:
        sizes.append(n_monte_carlo % mc_chunk)
    children = ss.spawn(len(sizes))

    n = model.n_agents
    n_rec = n_iters // record_every
    acc_werr = np.zeros((n_rec, n))
    acc_comm = np.zeros((n_rec, n))
    acc_share = np.zeros((n_rec, n))
    acc_paired = np.zeros((n_rec, n))
    acc_ben = np.zeros(n_rec)
    acc_sq = np.zeros(n_rec)

    for child, batch in zip(children, sizes):
        rng = np.random.default_rng(child)
        S = engine.init_arrays(batch)
        ri = 0
        for i in range(n_iters):
            out = engine.step(S, rng)
            if i % record_every == record_every - 1:
                acc_werr[ri] += out["werr"].sum(axis=0)
                acc_comm[ri] += out["comm"].sum(axis=0)
                acc_share[ri] += out["share"].sum(axis=0)
                acc_paired[ri] += out["paired"].sum(axis=0)
                acc_ben[ri] += out["benefit"].sum()
                acc_sq[ri] += out["sqerr"].sum()
                ri += 1

    nm = float(n_monte_carlo)
    noise_sum = float(model.noise_var.sum())
    records = []
    for t in range(n_rec):
        werr = acc_werr[t] / nm
        comm = acc_comm[t] / nm
        paired_events = acc_paired[t].sum()
        coop = acc_share[t].sum() / paired_events if paired_events > 0 else 0.0
        records.append(IterationRecord(
            iter=(t + 1) * record_every - 1,
            werr=werr,
            comm=comm,
            action_rate=acc_share[t] / nm,
            paired_rate=acc_paired[t] / nm,
            jpub=float(werr.sum() + noise_sum + comm.sum()),
            msd=float(acc_sq[t] / (nm * n)),
            bnet=float(acc_ben[t] / (nm * n)),
            mean_coop_rate=float(coop),
        ))
    return records


def records_to_arrays(records: Sequence[IterationRecord]) -> dict[str, Array]:
    """Stack a record list into named arrays (used by the CSV/NPZ writers)."""
    return {
        "iter": np.array([rec.iter for rec in records], dtype=np.int64),
        "werr": np.array([rec.werr for rec in records]),
        "comm": np.array([rec.comm for rec in records]),
        "action_rate": np.array([rec.action_rate for rec in records]),
        "paired_rate": np.array([rec.paired_rate for rec in records]),
        "jpub": np.array([rec.jpub for rec in records]),
        "msd": np.array([rec.msd for rec in records]),
        "bnet": np.array([rec.bnet for rec in records]),
        "mean_coop_rate": np.array([rec.mean_coop_rate for rec in records]),
    }


def steady_mean(records: Sequence[IterationRecord], field: str,
                window_frac: float = 0.2):
    """Mean of a record field over the trailing `window_frac` of iterations."""
    if not records:
        raise ValueError("no records")
    start = int(len(records) * (1.0 - window_frac))
    start = min(max(start, 0), len(records) - 1)
    vals = np.array([getattr(rec, field) for rec in records[start:]])
    return vals.mean(axis=0)
