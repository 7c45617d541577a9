"""Experiment runner: single runs, cost sweeps, reports, file emission.

Each run emits three artifacts under the output directory:

    <name>.csv        time series, schema: iter,jpub,msd,mean_coop_rate,bnet,werr_1..werr_N
    <name>.meta.json  resolved config echo, realized model, steady summary
    <name>.npz        per-agent arrays (werr, comm, action/paired rates, ...)

Floats in CSV/JSON are serialized with repr() round-tripping, so identical
configurations and seeds produce byte-identical text artifacts; a sweep's
summary is assembled in fixed grid order after all points finish, which keeps
the output independent of worker scheduling.
"""
from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .config import (ExperimentConfig, build_model, build_topology, config_echo, make_config,
                     dump_json, replace_config, streams)
from .diffusion import (IterationRecord, make_pairing_engine, records_to_arrays,
                        run, steady_mean)
from .model import DataModel, Topology
from .pairing import estimate_pairing_probs
from .protocol import chi
from .stability import (classify_regime, compute_bounds, cooperation_bound,
                        public_cost_bounds)

SWEEP_SUMMARY = "sweep_summary.csv"


def _fmt(x) -> str:
    return repr(float(x))


def write_csv(records: Sequence[IterationRecord], path) -> None:
    n = records[0].werr.shape[0]
    header = "iter,jpub,msd,mean_coop_rate,bnet," + ",".join(f"werr_{k + 1}" for k in range(n))
    lines = [header]
    for rec in records:
        front = [str(rec.iter), _fmt(rec.jpub), _fmt(rec.msd),
                 _fmt(rec.mean_coop_rate), _fmt(rec.bnet)]
        lines.append(",".join(front + [_fmt(w) for w in rec.werr]))
    Path(path).write_text("\n".join(lines) + "\n")


def _steady_summary(records: Sequence[IterationRecord], window_frac: float = 0.2) -> dict:
    per_agent_paired = steady_mean(records, "paired_rate", window_frac)
    per_agent_share = steady_mean(records, "action_rate", window_frac)
    with np.errstate(invalid="ignore"):
        coop_rate = np.where(per_agent_paired > 0, per_agent_share / per_agent_paired, 0.0)
    return {
        "window_frac": window_frac,
        "jpub": float(steady_mean(records, "jpub", window_frac)),
        "msd": float(steady_mean(records, "msd", window_frac)),
        "bnet": float(steady_mean(records, "bnet", window_frac)),
        "mean_coop_rate": float(steady_mean(records, "mean_coop_rate", window_frac)),
        "werr": steady_mean(records, "werr", window_frac).tolist(),
        "action_rate": per_agent_share.tolist(),
        "paired_rate": per_agent_paired.tolist(),
        "coop_rate": coop_rate.tolist(),
    }


@dataclass(frozen=True)
class RunResult:
    config: ExperimentConfig
    records: list[IterationRecord]
    steady: dict
    csv_path: Path
    meta_path: Path
    npz_path: Path


def run_experiment(config: ExperimentConfig, out_dir=None) -> RunResult:
    """Execute one configuration and write csv/meta/npz artifacts."""
    model = build_model(config)
    topology = build_topology(config)
    records = run(model, topology, config.params(), mode=config.mode,
                  pairing=config.pairing, n_iters=config.n_iters,
                  n_monte_carlo=config.n_monte_carlo, seed=streams(config)["sim"],
                  record_every=config.record_every)
    out = Path(out_dir if out_dir is not None else config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{config.name}.csv"
    meta_path = out / f"{config.name}.meta.json"
    npz_path = out / f"{config.name}.npz"

    write_csv(records, csv_path)
    steady = _steady_summary(records)
    meta = config_echo(config, model, topology)
    meta["steady"] = steady
    meta["artifacts"] = {"csv": csv_path.name, "npz": npz_path.name}
    dump_json(meta, meta_path)
    np.savez_compressed(npz_path, **records_to_arrays(records))
    return RunResult(config=config, records=records, steady=steady,
                     csv_path=csv_path, meta_path=meta_path, npz_path=npz_path)


@dataclass(frozen=True)
class SweepPoint:
    comm_cost: float
    mode: str
    name: str
    steady: dict
    csv_path: Path
    meta_path: Path
    npz_path: Path


def _point_config(config: ExperimentConfig, idx: int, comm_cost: float,
                  mode: str) -> ExperimentConfig:
    return replace_config(config, comm_cost=comm_cost, mode=mode, sweep=None,
                          name=f"{mode}_c{idx:02d}")


def _run_point(args) -> SweepPoint:
    config, out_dir = args
    res = run_experiment(config, out_dir)
    return SweepPoint(comm_cost=config.comm_cost, mode=config.mode,
                      name=config.name, steady=res.steady, csv_path=res.csv_path,
                      meta_path=res.meta_path, npz_path=res.npz_path)


@dataclass(frozen=True)
class SweepResult:
    config: ExperimentConfig
    points: list[SweepPoint]
    summary_path: Path

    def point(self, comm_cost: float, mode: str) -> SweepPoint:
        for pt in self.points:
            if pt.mode == mode and np.isclose(pt.comm_cost, comm_cost, rtol=1e-12):
                return pt
        raise KeyError(f"no sweep point (c={comm_cost}, mode={mode})")


def run_sweep(config: ExperimentConfig, out_dir=None, workers: int = 1) -> SweepResult:
    """Run the (cost grid x modes) sweep; summary rows in fixed grid order."""
    if not config.sweep:
        raise ValueError("config has no sweep grid")
    out = Path(out_dir if out_dir is not None else config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    jobs = [(_point_config(config, i, c, mode), out)
            for i, c in enumerate(config.sweep) for mode in config.sweep_modes]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(_run_point, jobs))
    else:
        points = [_run_point(job) for job in jobs]

    header = "c,mode,jpub,msd,bnet,mean_coop_rate"
    lines = [header]
    for pt in points:
        lines.append(",".join([_fmt(pt.comm_cost), pt.mode, _fmt(pt.steady["jpub"]),
                               _fmt(pt.steady["msd"]), _fmt(pt.steady["bnet"]),
                               _fmt(pt.steady["mean_coop_rate"])]))
    summary_path = out / SWEEP_SUMMARY
    summary_path.write_text("\n".join(lines) + "\n")
    meta = config_echo(config, build_model(config), build_topology(config))
    meta["sweep"] = {"grid": list(config.sweep), "modes": list(config.sweep_modes)}
    dump_json(meta, out / "sweep.meta.json")
    return SweepResult(config=config, points=points, summary_path=summary_path)


# ---------------------------------------------------------------------------
# loading artifacts back and composing the stability report


def records_from_npz(path) -> list[IterationRecord]:
    # NpzFile decompresses on every key access, so pull each column exactly
    # once; the records then hold views into five shared base arrays.
    with np.load(path) as data:
        cols = {key: data[key] for key in
                ("iter", "werr", "comm", "action_rate", "paired_rate",
                 "jpub", "msd", "bnet", "mean_coop_rate")}
    out = []
    for t in range(cols["iter"].shape[0]):
        out.append(IterationRecord(
            iter=int(cols["iter"][t]), werr=cols["werr"][t], comm=cols["comm"][t],
            action_rate=cols["action_rate"][t], paired_rate=cols["paired_rate"][t],
            jpub=float(cols["jpub"][t]), msd=float(cols["msd"][t]),
            bnet=float(cols["bnet"][t]), mean_coop_rate=float(cols["mean_coop_rate"][t])))
    return out


def _load_run_dir(run_dir: Path) -> list[dict]:
    metas = sorted(run_dir.glob("*.meta.json"))
    points = []
    for mp in metas:
        meta = json.loads(mp.read_text())
        if "config" not in meta:
            continue
        if meta["config"].get("sweep"):
            continue  # sweep-level meta, not a point
        points.append({"meta": meta, "dir": run_dir,
                       "npz": run_dir / (mp.name.replace(".meta.json", ".npz"))})
    return points


def emit_report(run_dir, window_frac: float = 0.2, pairing_trials: int = 20000) -> str:
    """Stability/cooperation report over the runs found in a directory.

    Needs, for at least one communication cost, a reputation-mode run plus
    always_share and never_share companions produced with the same seed.
    """
    run_dir = Path(run_dir)
    points = _load_run_dir(run_dir)
    if not points:
        raise ValueError(f"no run artifacts found in {run_dir}")

    by_cost: dict[float, dict[str, dict]] = {}
    for pt in points:
        cfg = pt["meta"]["config"]
        by_cost.setdefault(cfg["comm_cost"], {})[cfg["mode"]] = pt

    base_cfg_raw = points[0]["meta"]["config"]
    base_cfg = make_config({k: (tuple(v) if isinstance(v, list) and k in ("sweep", "sweep_modes")
                                else v) for k, v in base_cfg_raw.items()})
    model = build_model(base_cfg)
    topology = build_topology(base_cfg)
    params = base_cfg.params()
    bounds = compute_bounds(model, params.mu)
    chi_value = chi(params.delta, params.r)
    engine = make_pairing_engine(base_cfg.pairing, topology)
    stats = estimate_pairing_probs(engine, pairing_trials,
                                   np.random.default_rng(streams(base_cfg)["analysis"]))

    lines = [
        f"stability report for {run_dir}",
        f"agents={model.n_agents} dim={model.dim} mu={params.mu} chi={chi_value:.6f}",
        (f"bounds: rho_max={bounds.rho_max:.6f} rho_min={bounds.rho_min:.6f} "
         f"kappa={bounds.kappa:.4f} beta={bounds.beta:.4f} mu_max={bounds.mu_max:.4f} "
         f"steady_bound={bounds.steady_bound:.6g}"),
        f"pairing: mean self-pair prob={stats.self_prob().mean():.4f} over {stats.trials} trials",
        "",
    ]

    reported = 0
    for cost in sorted(by_cost):
        group = by_cost[cost]
        rep_mode = "reputation" if "reputation" in group else (
            "reputation_realtime" if "reputation_realtime" in group else None)
        if rep_mode is None:
            continue
        missing = [m for m in ("always_share", "never_share") if m not in group]
        if missing:
            raise ValueError(
                f"missing companion run(s) {missing} for c={cost}; "
                "the report needs always_share and never_share at the same cost")
        rep_recs = records_from_npz(group[rep_mode]["npz"])
        coop_recs = records_from_npz(group["always_share"]["npz"])
        never_recs = records_from_npz(group["never_share"]["npz"])
        cparams = replace_config(base_cfg, comm_cost=cost).params()

        cb = cooperation_bound(never_recs, bounds, chi_value, window_frac)
        pub = public_cost_bounds(rep_recs, coop_recs, model, bounds, cparams,
                                 stats, cb, window_frac)
        lines.append(f"--- c = {cost:g} ({rep_mode}) ---")
        lines.append(f"eta={cb.eta:.6g} critical cost c_o={cb.c_o:.6g} "
                     f"rate bound={cb.rate_bound(cost):.4f}")
        start = int(len(rep_recs) * (1.0 - window_frac))
        werr_window = np.array([rec.werr for rec in rep_recs[start:]])
        share_w = steady_mean(rep_recs, "action_rate", window_frac)
        paired_w = steady_mean(rep_recs, "paired_rate", window_frac)
        for k in range(model.n_agents):
            verdict = classify_regime(werr_window[:, k], cost, chi_value, bounds,
                                      params.epsilon)
            rate = share_w[k] / paired_w[k] if paired_w[k] > 0 else 0.0
            flag = " VIOLATION" if rate > cb.rate_bound(cost) + 1e-12 else ""
            lines.append(f"agent {k:2d}: regime={verdict.regime:13s} "
                         f"coop_rate={rate:.4f} bound={cb.rate_bound(cost):.4f}{flag}")
        lines.append(f"J_pub measured: reputation={pub.measured_rep:.6g} "
                     f"always_share={pub.measured_coop:.6g}")
        lines.append(f"J_pub bounds: reputation upper={pub.bound_rep_upper:.6g} "
                     f"always lower={pub.bound_coop_lower:.6g} "
                     f"crossover c>={pub.crossover_cost:.6g}")
        lines.append("")
        reported += 1
    if reported == 0:
        raise ValueError("no cost level with a reputation-mode run found")
    return "\n".join(lines)
