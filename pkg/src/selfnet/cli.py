"""Command-line interface.

    selfnet run <config.yaml> [--seed S] [--out DIR] [--mode M]
    selfnet sweep <config.yaml> [--seed S] [--out DIR] [--workers K]
    selfnet analyze stability <run-dir> [--report FILE]
    selfnet analyze stage-game --err-k E --err-l E [options]
    selfnet pairing-stats <config.yaml> [--trials T] [--out FILE]

Exit codes: 0 success, 1 validation error (bad config/arguments/inputs),
2 runtime failure.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, load_config, replace_config
from .diffusion import make_pairing_engine
from .config import build_topology
from .game import pareto_classify, stage_game
from .model import AgentParams
from .pairing import estimate_pairing_probs
from .runner import emit_report, run_experiment, run_sweep


def _apply_overrides(cfg, args):
    kw = {}
    if getattr(args, "seed", None) is not None:
        kw["seed"] = args.seed
    if getattr(args, "mode", None) is not None:
        kw["mode"] = args.mode
    return replace_config(cfg, **kw) if kw else cfg


def _cmd_run(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    res = run_experiment(cfg, out_dir=args.out)
    print(f"wrote {res.csv_path}")
    print(f"steady jpub={res.steady['jpub']:.6g} msd={res.steady['msd']:.6g} "
          f"coop_rate={res.steady['mean_coop_rate']:.4f}")
    return 0


def _cmd_sweep(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    if not cfg.sweep:
        raise ConfigError("sweep: config must provide a list of cost values")
    res = run_sweep(cfg, out_dir=args.out, workers=args.workers)
    print(f"wrote {res.summary_path} ({len(res.points)} points)")
    return 0


def _cmd_analyze_stability(args) -> int:
    text = emit_report(args.run_dir)
    if args.report:
        Path(args.report).write_text(text + "\n")
        print(f"wrote {args.report}")
    else:
        print(text)
    return 0


def _err_vector(arg_value: float | None, file_arg: str | None, dim: int,
                name: str) -> np.ndarray:
    if (arg_value is None) == (file_arg is None):
        raise ConfigError(f"stage-game: give exactly one of --{name} or --{name.replace('err', 'werr-file')}")
    if file_arg is not None:
        vec = np.loadtxt(file_arg, ndmin=1, delimiter=None)
        return np.asarray(vec, dtype=np.float64)
    # synthetic vector with the requested euclidean norm, spread evenly
    return float(arg_value) * np.ones(dim) / np.sqrt(dim)


def _cmd_stage_game(args) -> int:
    vk = _err_vector(args.err_k, args.werr_file_k, args.dim, "err-k")
    vl = _err_vector(args.err_l, args.werr_file_l, args.dim, "err-l")
    if vk.shape != vl.shape:
        raise ConfigError("stage-game: error vectors must have equal length")
    m = vk.shape[0]
    cov = np.load(args.cov_file) if args.cov_file else np.eye(m)
    params = AgentParams(mu=args.mu, alpha=args.alpha, comm_cost=args.cost)
    rng = np.random.default_rng(args.seed)
    game = stage_game(vk, vl, ((cov, args.noise_k), (cov, args.noise_l)),
                      params, args.samples, rng)
    verdict = pareto_classify(game)
    print("expected payoffs J_k[a_k, a_l] (row: own action, col: partner):")
    for ak in (0, 1):
        print("  " + "  ".join(f"{game.payoff_k[ak, al]:12.6g}" for al in (0, 1)))
    print("expected payoffs J_l[a_k, a_l]:")
    for ak in (0, 1):
        print("  " + "  ".join(f"{game.payoff_l[ak, al]:12.6g}" for al in (0, 1)))
    print(f"benefits: b_k={game.benefit_k:.6g} b_l={game.benefit_l:.6g} cost={game.cost_k:g}")
    print(f"one-shot Nash: (0, 0); withholding dominant: {game.withholding_dominant()}")
    print(f"pareto: {verdict.label} (gain_k={verdict.gain_k:.6g}, gain_l={verdict.gain_l:.6g}, "
          f"gamma_k={verdict.gamma_k:.4g}, gamma_l={verdict.gamma_l:.4g})")
    return 0


def _cmd_pairing_stats(args) -> int:
    cfg = load_config(args.config)
    topology = build_topology(cfg)
    engine = make_pairing_engine(cfg.pairing, topology)
    rng = np.random.default_rng(cfg.seed if args.seed is None else args.seed)
    stats = estimate_pairing_probs(engine, args.trials, rng)
    probs = stats.prob()
    print(f"pairing probabilities over {stats.trials} trials ({cfg.pairing}):")
    with np.printoptions(precision=4, suppress=True, linewidth=200):
        print(probs)
    print("self-pair probabilities per agent:")
    with np.printoptions(precision=4, suppress=True, linewidth=200):
        print(stats.self_prob())
    if args.out:
        np.savez(args.out, counts=stats.counts, trials=stats.trials, prob=probs)
        print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="selfnet",
                                 description="diffusion adaptation with self-interested agents")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="execute one experiment config")
    p.add_argument("config")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--mode", default=None)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("sweep", help="run the communication-cost sweep")
    p.add_argument("config")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_sweep)

    pa = sub.add_parser("analyze", help="post-run analysis")
    asub = pa.add_subparsers(dest="analysis", required=True)

    p = asub.add_parser("stability", help="bounds/regime/cooperation report for a run directory")
    p.add_argument("run_dir")
    p.add_argument("--report", default=None)
    p.set_defaults(func=_cmd_analyze_stability)

    p = asub.add_parser("stage-game", help="expected one-shot payoff table for a pair")
    p.add_argument("--err-k", type=float, default=None, help="euclidean norm of agent k's error")
    p.add_argument("--err-l", type=float, default=None)
    p.add_argument("--werr-file-k", default=None, help="text file with agent k's error vector")
    p.add_argument("--werr-file-l", default=None)
    p.add_argument("--dim", type=int, default=5)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--mu", type=float, default=0.01)
    p.add_argument("--cost", type=float, default=0.01)
    p.add_argument("--noise-k", type=float, default=0.1)
    p.add_argument("--noise-l", type=float, default=0.1)
    p.add_argument("--cov-file", default=None, help=".npy covariance, defaults to identity")
    p.add_argument("--samples", type=int, default=100000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_stage_game)

    p = sub.add_parser("pairing-stats", help="empirical pairing probability matrix")
    p.add_argument("config")
    p.add_argument("--trials", type=int, default=20000)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_pairing_stats)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError, KeyError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
