"""Diffusion LMS over networks of self-interested agents.

Seedable simulator for distributed mean-square-error estimation where paired
agents decide, via an adaptive reputation protocol, whether to exchange
intermediate estimates; plus game-theoretic and mean-square stability
analysis utilities.
"""
from .model import (AgentParams, AgentState, DataModel, DataSample, Topology,
                    estimation_cost, generate_sample, init_agent_state,
                    weighted_sq_error)
from .pairing import (DistributedPairing, FullPairing, PairingOutcome,
                      PairingStats, estimate_pairing_probs, pair_distributed,
                      pair_fully)
from .protocol import (ActionDecision, belief, benefit_oracle, benefit_realtime,
                       chi, decide_action, reputation_update)
from .diffusion import (MODES, IterationRecord, NetworkState, StepTrace, adapt,
                        combine, init_network_state, make_pairing_engine,
                        network_step, records_to_arrays, run, steady_mean)
from .game import (ParetoVerdict, StageGame, ThresholdVerdict,
                   series_threshold_oracle, closed_form_share, exact_benefit,
                   pareto_classify, stage_game)
from .stability import (CoopRateBound, PublicCostReport, RegimeVerdict,
                        StabilityBounds, classify_regime, compute_bounds,
                        coop_bound_from_eta, cooperation_bound,
                        public_cost_bounds)
from .config import (ConfigError, ExperimentConfig, build_model, build_topology,
                     config_echo, load_config, make_config, replace_config,
                     streams)
from .runner import (RunResult, SweepPoint, SweepResult, emit_report,
                     records_from_npz, run_experiment, run_sweep, write_csv)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
