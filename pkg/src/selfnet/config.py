"""Experiment configuration: YAML/JSON loading, validation, model realization.

All randomness is derived from the single `seed` via a fixed SeedSequence
layout: spawn(4) = [model draw, topology draw, simulation chunks, analysis].
The realized model (noise variances, covariance spectrum, target vector) is
therefore identical across modes and across sweep points, and is echoed into
the run metadata so every default is recorded explicitly.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np
import yaml

from .diffusion import DEFAULT_MC_CHUNK, MODES
from .model import AgentParams, DataModel, Topology
from .protocol import chi


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration."""


_ALLOWED_KEYS = {
    "name", "n_agents", "dim", "mu", "alpha", "comm_cost", "delta", "r",
    "epsilon", "nu", "seed", "noise_profile", "ru_profile", "wo_profile",
    "topology", "pairing", "mode", "n_iters", "n_monte_carlo", "sweep",
    "sweep_modes", "out_dir", "record_every",
}


@dataclass(frozen=True)
class ExperimentConfig:
    name: str = "run"
    n_agents: int = 20
    dim: int = 10
    mu: float = 0.01
    alpha: float = 0.5
    comm_cost: float = 0.01
    delta: float = 0.99
    r: float = 0.95
    epsilon: float = 0.1
    nu: float = 0.01
    seed: int = 0
    noise_profile: dict = field(default_factory=lambda: {"kind": "uniform", "low": 0.05, "high": 0.15})
    ru_profile: dict = field(default_factory=lambda: {"kind": "diag_uniform", "low": 8.0, "high": 12.0, "shared": True})
    wo_profile: dict = field(default_factory=lambda: {"kind": "gaussian", "scale": 1.0})
    topology: object = "full"
    pairing: str = "distributed"
    mode: str = "reputation"
    n_iters: int = 3000
    n_monte_carlo: int = 100
    sweep: tuple | None = None
    sweep_modes: tuple = MODES
    out_dir: str = "runs"
    record_every: int = 1

    def params(self) -> AgentParams:
        return AgentParams(mu=self.mu, alpha=self.alpha, comm_cost=self.comm_cost,
                           delta=self.delta, r=self.r, epsilon=self.epsilon, nu=self.nu)


def _norm_profile(raw, key: str, default_kind: str) -> dict:
    if isinstance(raw, (int, float)):
        return {"kind": "fixed", "value": float(raw)}
    if isinstance(raw, (list, tuple)):
        return {"kind": "values", "values": [float(x) for x in raw]}
    if isinstance(raw, dict):
        out = dict(raw)
        out.setdefault("kind", default_kind)
        return out
    raise ConfigError(f"{key}: expected scalar, list or mapping, got {type(raw).__name__}")


def make_config(raw: dict) -> ExperimentConfig:
    """Validate a raw mapping and return a frozen config."""
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a mapping")
    unknown = set(raw) - _ALLOWED_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    cfg = dict(raw)
    for key in ("noise_profile", "ru_profile", "wo_profile"):
        if key in cfg:
            cfg[key] = _norm_profile(cfg[key], key, {"noise_profile": "uniform",
                                                     "ru_profile": "diag_uniform",
                                                     "wo_profile": "gaussian"}[key])
    if "sweep" in cfg and cfg["sweep"] is not None:
        sweep = tuple(float(c) for c in cfg["sweep"])
        if any(c <= 0 for c in sweep):
            raise ConfigError("sweep: all cost values must be strictly positive")
        if list(sweep) != sorted(sweep) or len(set(sweep)) != len(sweep):
            raise ConfigError("sweep: cost values must be strictly increasing")
        cfg["sweep"] = sweep
    if "sweep_modes" in cfg:
        cfg["sweep_modes"] = tuple(cfg["sweep_modes"])
    if "topology" in cfg and isinstance(cfg["topology"], list):
        cfg["topology"] = {"kind": "edges", "edges": [list(map(int, e)) for e in cfg["topology"]]}

    try:
        config = ExperimentConfig(**cfg)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc

    # field-level validation with the offending key in the message
    def check(cond: bool, key: str, msg: str):
        if not cond:
            raise ConfigError(f"{key}: {msg}")

    check(isinstance(config.n_agents, int) and config.n_agents >= 2, "n_agents", "need an integer >= 2")
    check(isinstance(config.dim, int) and config.dim >= 1, "dim", "need a positive integer")
    check(config.mu > 0, "mu", "must be positive")
    check(0.0 <= config.alpha <= 1.0, "alpha", "must lie in [0, 1]")
    check(config.comm_cost >= 0, "comm_cost", "must be non-negative")
    check(0.0 < config.delta < 1.0, "delta", "must lie in (0, 1)")
    check(0.0 < config.r < 1.0, "r", "must lie in (0, 1)")
    check(0.0 < config.epsilon < 1.0, "epsilon", "must lie in (0, 1)")
    check(0.0 < config.nu <= 1.0, "nu", "must lie in (0, 1]")
    check(isinstance(config.seed, int), "seed", "must be an integer")
    check(config.mode in MODES, "mode", f"must be one of {MODES}")
    check(all(m in MODES for m in config.sweep_modes), "sweep_modes", f"entries must be in {MODES}")
    check(config.pairing in ("full", "distributed"), "pairing", "must be 'full' or 'distributed'")
    check(config.n_iters >= 1, "n_iters", "must be positive")
    check(config.n_monte_carlo >= 1, "n_monte_carlo", "must be positive")
    check(config.record_every >= 1 and config.n_iters % config.record_every == 0,
          "record_every", "must be positive and divide n_iters")
    if config.pairing == "full":
        check(config.n_agents % 2 == 0, "pairing", "'full' needs an even number of agents")
        check(config.topology == "full", "pairing", "'full' pairing requires topology: full")
    return config


def load_config(path) -> ExperimentConfig:
    """Load a YAML (or JSON) config file; raises ConfigError with the bad key."""
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    try:
        raw = yaml.safe_load(p.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {p}: {exc}") from exc
    if raw is None:
        raw = {}
    return make_config(raw)


def streams(config: ExperimentConfig) -> dict[str, np.random.SeedSequence]:
    """Fixed stream layout derived from the config seed."""
    model_ss, topo_ss, sim_ss, analysis_ss = np.random.SeedSequence(config.seed).spawn(4)
    return {"model": model_ss, "topology": topo_ss, "sim": sim_ss, "analysis": analysis_ss}


def _realize_noise(profile: dict, n: int, rng) -> np.ndarray:
    kind = profile.get("kind")
    if kind == "uniform":
        return rng.uniform(profile["low"], profile["high"], size=n)
    if kind == "fixed":
        return np.full(n, float(profile["value"]))
    if kind == "values":
        vals = np.asarray(profile["values"], dtype=np.float64)
        if vals.shape != (n,):
            raise ConfigError(f"noise_profile: need {n} values, got {vals.shape}")
        return vals
    raise ConfigError(f"noise_profile: unknown kind {kind!r}")


def _realize_ru(profile: dict, n: int, m: int, rng) -> np.ndarray:
    kind = profile.get("kind")
    if kind == "diag_uniform":
        shared = bool(profile.get("shared", True))
        if shared:
            diag = rng.uniform(profile["low"], profile["high"], size=m)
            return np.broadcast_to(np.diag(diag), (n, m, m)).copy()
        out = np.zeros((n, m, m))
        for k in range(n):
            out[k] = np.diag(rng.uniform(profile["low"], profile["high"], size=m))
        return out
    if kind == "identity":
        scale = float(profile.get("scale", 1.0))
        return np.broadcast_to(scale * np.eye(m), (n, m, m)).copy()
    if kind == "values":
        diag = np.asarray(profile["values"], dtype=np.float64)
        if diag.shape != (m,):
            raise ConfigError(f"ru_profile: need {m} diagonal values, got {diag.shape}")
        return np.broadcast_to(np.diag(diag), (n, m, m)).copy()
    raise ConfigError(f"ru_profile: unknown kind {kind!r}")


def _realize_wo(profile: dict, m: int, rng) -> np.ndarray:
    kind = profile.get("kind")
    if kind == "gaussian":
        return rng.standard_normal(m) * float(profile.get("scale", 1.0))
    if kind == "values":
        wo = np.asarray(profile["values"], dtype=np.float64)
        if wo.shape != (m,):
            raise ConfigError(f"wo_profile: need {m} values, got {wo.shape}")
        return wo
    raise ConfigError(f"wo_profile: unknown kind {kind!r}")


def build_model(config: ExperimentConfig) -> DataModel:
    """Realize the data model from the config's model stream (order: noise, ru, wo)."""
    rng = np.random.default_rng(streams(config)["model"])
    noise = _realize_noise(config.noise_profile, config.n_agents, rng)
    ru = _realize_ru(config.ru_profile, config.n_agents, config.dim, rng)
    wo = _realize_wo(config.wo_profile, config.dim, rng)
    return DataModel(wo=wo, ru=ru, noise_var=noise)


def build_topology(config: ExperimentConfig) -> Topology:
    spec = config.topology
    n = config.n_agents
    if spec == "full":
        return Topology.full(n)
    if isinstance(spec, dict):
        kind = spec.get("kind")
        if kind == "edges":
            return Topology.from_edges(n, spec["edges"])
        if kind == "ring":
            return Topology.ring(n)
        if kind == "ring_chords":
            rng = np.random.default_rng(streams(config)["topology"])
            return Topology.ring_with_chords(n, int(spec.get("extra_edges", n)), rng)
        raise ConfigError(f"topology: unknown kind {kind!r}")
    raise ConfigError("topology: expected 'full', an edge list, or a mapping")


def config_echo(config: ExperimentConfig, model: DataModel,
                topology: Topology) -> dict:
    """Full record of the resolved experiment: every default made explicit."""
    cfg = asdict(config)
    cfg["sweep"] = list(config.sweep) if config.sweep else None
    cfg["sweep_modes"] = list(config.sweep_modes)
    return {
        "config": cfg,
        "derived": {
            "chi": chi(config.delta, config.r),
            "noise_var": model.noise_var.tolist(),
            "wo": model.wo.tolist(),
            "ru_diag": model.ru_diag.tolist() if model.ru_diag is not None else None,
            "edges": topology.edges(),
        },
    }


def dump_json(obj: dict, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def replace_config(config: ExperimentConfig, **kw) -> ExperimentConfig:
    return replace(config, **kw)
