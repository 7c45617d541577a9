"""Config handling, artifact emission, sweeps, reports and the CLI."""
import json
import subprocess
import sys

import numpy as np
import pytest
import yaml

import selfnet as sn
from selfnet.cli import main

from conftest import DATA_DIR

GOLDEN_CFG = {
    "name": "golden",
    "n_agents": 4,
    "dim": 2,
    "mu": 0.05,
    "alpha": 0.5,
    "comm_cost": 0.01,
    "seed": 5,
    "noise_profile": 0.1,
    "ru_profile": {"kind": "values", "values": [1.0, 2.0]},
    "wo_profile": {"kind": "values", "values": [1.0, -1.0]},
    "topology": {"kind": "ring"},
    "pairing": "distributed",
    "mode": "reputation",
    "n_iters": 200,
    "n_monte_carlo": 4,
}


def golden_config(**kw):
    return sn.make_config({**GOLDEN_CFG, **kw})


def sweep_config(**kw):
    base = dict(GOLDEN_CFG, name="mini", n_iters=60, comm_cost=0.001,
                sweep=(0.001, 0.1), sweep_modes=("reputation", "always_share"))
    base.update(kw)
    return sn.make_config(base)


# -------------------------------------------------------------------- config

def test_config_defaults():
    cfg = sn.make_config({})
    assert cfg.name == "run" and cfg.n_agents == 20 and cfg.dim == 10
    assert cfg.mode == "reputation" and cfg.pairing == "distributed"
    assert cfg.sweep is None and cfg.record_every == 1
    assert cfg.params() == sn.AgentParams(mu=0.01, alpha=0.5, comm_cost=0.01,
                                          delta=0.99, r=0.95, epsilon=0.1, nu=0.01)


@pytest.mark.parametrize("patch,key", [
    ({"mu": -1.0}, "mu"),
    ({"alpha": 2.0}, "alpha"),
    ({"comm_cost": -0.1}, "comm_cost"),
    ({"delta": 1.5}, "delta"),
    ({"nu": 0.0}, "nu"),
    ({"n_agents": 1}, "n_agents"),
    ({"mode": "osmosis"}, "mode"),
    ({"pairing": "psychic"}, "pairing"),
    ({"sweep": [0.1, 0.1]}, "sweep"),
    ({"sweep": [0.1, -0.2]}, "sweep"),
    ({"sweep": [0.2, 0.1]}, "sweep"),
    ({"n_iters": 100, "record_every": 7}, "record_every"),
    ({"sweep_modes": ["reputation", "wizardry"]}, "sweep_modes"),
    ({"pairing": "full", "n_agents": 5, "topology": "full"}, "pairing"),
    ({"pairing": "full", "n_agents": 4, "topology": {"kind": "ring"}}, "pairing"),
])
def test_config_rejects_bad_values_naming_the_key(patch, key):
    raw = dict(GOLDEN_CFG)
    raw.pop("topology", None)
    raw.update(patch)
    raw.setdefault("topology", "full")
    with pytest.raises(sn.ConfigError, match=key):
        sn.make_config(raw)


def test_config_rejects_unknown_keys():
    with pytest.raises(sn.ConfigError, match="step_size"):
        sn.make_config({"step_size": 0.1})


def test_profile_shorthands():
    cfg = sn.make_config({"noise_profile": 0.2, "wo_profile": [1.0] * 10})
    assert cfg.noise_profile == {"kind": "fixed", "value": 0.2}
    assert cfg.wo_profile["kind"] == "values"


def test_load_config_yaml_roundtrip(tmp_path):
    p = tmp_path / "c.yaml"
    p.write_text(yaml.safe_dump(GOLDEN_CFG))
    cfg = sn.load_config(p)
    assert cfg == golden_config()
    with pytest.raises(sn.ConfigError, match="not found"):
        sn.load_config(tmp_path / "missing.yaml")


def test_streams_layout_is_reproducible():
    cfg = golden_config()
    a = sn.streams(cfg)
    b = sn.streams(cfg)
    assert set(a) == {"model", "topology", "sim", "analysis"}
    for key in a:
        x = np.random.default_rng(a[key]).random(4)
        y = np.random.default_rng(b[key]).random(4)
        assert np.array_equal(x, y)


def test_build_model_from_value_profiles_is_exact():
    model = sn.build_model(golden_config())
    assert np.array_equal(model.wo, [1.0, -1.0])
    assert np.array_equal(model.ru_diag, np.tile([1.0, 2.0], (4, 1)))
    assert np.array_equal(model.noise_var, np.full(4, 0.1))


def test_build_model_random_profiles_stay_in_range():
    cfg = sn.make_config({"n_agents": 6, "dim": 3, "seed": 9,
                          "noise_profile": {"kind": "uniform", "low": 0.2, "high": 0.4},
                          "ru_profile": {"kind": "diag_uniform", "low": 1.0,
                                         "high": 2.0, "shared": False}})
    model = sn.build_model(cfg)
    assert np.all((model.noise_var >= 0.2) & (model.noise_var <= 0.4))
    assert np.all((model.ru_diag >= 1.0) & (model.ru_diag <= 2.0))
    # unshared profile: agents see different spectra
    assert not np.allclose(model.ru_diag[0], model.ru_diag[1])
    # identical seed -> identical realization
    again = sn.build_model(cfg)
    assert np.array_equal(model.wo, again.wo)
    assert np.array_equal(model.ru, again.ru)


def test_build_model_validates_profiles():
    with pytest.raises(sn.ConfigError, match="ru_profile"):
        sn.build_model(sn.make_config({"dim": 3, "ru_profile": {"kind": "values",
                                                                "values": [1.0]}}))
    with pytest.raises(sn.ConfigError, match="wo_profile"):
        sn.build_model(sn.make_config({"dim": 3, "wo_profile": {"kind": "sparse"}}))
    with pytest.raises(sn.ConfigError, match="noise_profile"):
        sn.build_model(sn.make_config({"noise_profile": {"kind": "cauchy"}}))


def test_build_topology_variants():
    assert sn.build_topology(sn.make_config({"n_agents": 4})).is_complete
    ring = sn.build_topology(golden_config())
    assert all(len(row) == 2 for row in ring.neighbors)
    chords = sn.build_topology(sn.make_config(
        {"n_agents": 8, "topology": {"kind": "ring_chords", "extra_edges": 2}}))
    assert len(chords.edges()) == 10
    edges = sn.build_topology(sn.make_config(
        {"n_agents": 3, "topology": [[0, 1], [1, 2]]}))
    assert edges.neighbors[1] == (0, 2)
    with pytest.raises(sn.ConfigError, match="topology"):
        sn.build_topology(sn.make_config({"topology": {"kind": "torus"}}))


def test_config_echo_records_everything():
    cfg = golden_config()
    echo = sn.config_echo(cfg, sn.build_model(cfg), sn.build_topology(cfg))
    assert echo["config"]["record_every"] == 1          # defaults made explicit
    assert echo["config"]["out_dir"] == "runs"
    assert echo["derived"]["chi"] == pytest.approx(sn.chi(0.99, 0.95))
    assert len(echo["derived"]["edges"]) == 4
    assert echo["derived"]["wo"] == [1.0, -1.0]


# ----------------------------------------------------------------- artifacts

def test_run_experiment_writes_golden_csv(tmp_path):
    res = sn.run_experiment(golden_config(), out_dir=tmp_path)
    golden = (DATA_DIR / "golden_run.csv").read_bytes()
    assert res.csv_path.read_bytes() == golden


def test_csv_schema_and_float_roundtrip(tmp_path):
    res = sn.run_experiment(golden_config(), out_dir=tmp_path)
    lines = res.csv_path.read_text().splitlines()
    assert lines[0] == "iter,jpub,msd,mean_coop_rate,bnet,werr_1,werr_2,werr_3,werr_4"
    assert len(lines) == 1 + 200
    cells = lines[1].split(",")
    rec = res.records[0]
    assert int(cells[0]) == rec.iter
    assert float(cells[1]) == rec.jpub            # repr() round-trips exactly
    assert [float(c) for c in cells[5:]] == list(rec.werr)


def test_run_artifacts_are_deterministic(tmp_path):
    a = sn.run_experiment(golden_config(), out_dir=tmp_path / "a")
    b = sn.run_experiment(golden_config(), out_dir=tmp_path / "b")
    assert a.csv_path.read_bytes() == b.csv_path.read_bytes()
    assert a.meta_path.read_bytes() == b.meta_path.read_bytes()


def test_meta_echoes_config_and_steady_summary(tmp_path):
    res = sn.run_experiment(golden_config(), out_dir=tmp_path)
    meta = json.loads(res.meta_path.read_text())
    assert meta["config"]["name"] == "golden"
    assert meta["config"]["n_monte_carlo"] == 4
    assert meta["derived"]["noise_var"] == [0.1] * 4
    assert meta["steady"]["jpub"] == pytest.approx(res.steady["jpub"])
    assert 0 < len(meta["steady"]["coop_rate"]) == 4


def test_npz_roundtrip(tmp_path):
    res = sn.run_experiment(golden_config(), out_dir=tmp_path)
    loaded = sn.records_from_npz(res.npz_path)
    assert len(loaded) == len(res.records)
    for a, b in zip(loaded, res.records):
        assert a.iter == b.iter and a.jpub == b.jpub
        assert np.array_equal(a.werr, b.werr)
        assert np.array_equal(a.paired_rate, b.paired_rate)


# -------------------------------------------------------------------- sweeps

def test_sweep_points_match_standalone_runs(tmp_path):
    cfg = sweep_config()
    res = sn.run_sweep(cfg, out_dir=tmp_path / "sweep")
    assert len(res.points) == 4
    # fixed grid order: costs ascending, modes in listed order
    assert [(p.comm_cost, p.mode) for p in res.points] == [
        (0.001, "reputation"), (0.001, "always_share"),
        (0.1, "reputation"), (0.1, "always_share")]
    # a sweep point is byte-identical to the equivalent standalone run
    direct = sn.run_experiment(
        sn.replace_config(cfg, comm_cost=0.1, mode="always_share", sweep=None,
                          name="always_share_c01"),
        out_dir=tmp_path / "direct")
    pt = res.point(0.1, "always_share")
    assert pt.csv_path.read_bytes() == direct.csv_path.read_bytes()
    with pytest.raises(KeyError):
        res.point(0.5, "always_share")


def test_sweep_summary_layout(tmp_path):
    res = sn.run_sweep(sweep_config(), out_dir=tmp_path)
    lines = res.summary_path.read_text().splitlines()
    assert lines[0] == "c,mode,jpub,msd,bnet,mean_coop_rate"
    assert len(lines) == 5
    assert lines[1].startswith("0.001,reputation,")
    meta = json.loads((tmp_path / "sweep.meta.json").read_text())
    assert meta["sweep"]["grid"] == [0.001, 0.1]


def test_parallel_sweep_is_byte_identical(tmp_path):
    serial = sn.run_sweep(sweep_config(), out_dir=tmp_path / "s1", workers=1)
    parallel = sn.run_sweep(sweep_config(), out_dir=tmp_path / "s2", workers=2)
    assert serial.summary_path.read_bytes() == parallel.summary_path.read_bytes()
    for a, b in zip(serial.points, parallel.points):
        assert a.name == b.name
        assert a.csv_path.read_bytes() == b.csv_path.read_bytes()
        assert a.meta_path.read_bytes() == b.meta_path.read_bytes()


def test_run_sweep_requires_grid(tmp_path):
    with pytest.raises(ValueError, match="sweep"):
        sn.run_sweep(golden_config(), out_dir=tmp_path)


# ------------------------------------------------------------------- reports

@pytest.fixture(scope="module")
def report_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("report")
    cfg = sweep_config(n_iters=200, n_monte_carlo=8, sweep=(0.01,),
                       sweep_modes=("reputation", "always_share", "never_share"))
    sn.run_sweep(cfg, out_dir=out)
    return out


def test_emit_report_contents(report_dir):
    text = sn.emit_report(report_dir, pairing_trials=5000)
    assert "bounds:" in text
    assert "regime=" in text
    assert "eta=" in text
    assert "J_pub measured" in text
    assert text.count("agent") >= 4


def test_emit_report_requires_companions(tmp_path):
    cfg = sweep_config(n_iters=40, sweep=(0.01,), sweep_modes=("reputation",))
    sn.run_sweep(cfg, out_dir=tmp_path)
    with pytest.raises(ValueError, match="companion"):
        sn.emit_report(tmp_path)


def test_emit_report_empty_dir(tmp_path):
    with pytest.raises(ValueError, match="no run artifacts"):
        sn.emit_report(tmp_path)


# ----------------------------------------------------------------------- cli

@pytest.fixture()
def cfg_file(tmp_path):
    p = tmp_path / "exp.yaml"
    p.write_text(yaml.safe_dump(GOLDEN_CFG))
    return p


def test_cli_run(cfg_file, tmp_path, capsys):
    rc = main(["run", str(cfg_file), "--out", str(tmp_path / "out")])
    assert rc == 0
    assert (tmp_path / "out" / "golden.csv").exists()
    assert "steady jpub=" in capsys.readouterr().out


def test_cli_run_mode_and_seed_overrides(cfg_file, tmp_path):
    assert main(["run", str(cfg_file), "--out", str(tmp_path / "a"),
                 "--mode", "never_share"]) == 0
    meta = json.loads((tmp_path / "a" / "golden.meta.json").read_text())
    assert meta["config"]["mode"] == "never_share"
    assert main(["run", str(cfg_file), "--out", str(tmp_path / "b"),
                 "--seed", "123"]) == 0
    a = (tmp_path / "a" / "golden.csv").read_bytes()
    b = (tmp_path / "b" / "golden.csv").read_bytes()
    assert a != b


def test_cli_exit_codes(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text(yaml.safe_dump({"warp_factor": 9}))
    assert main(["run", str(bad)]) == 1
    assert main(["run", str(tmp_path / "nope.yaml")]) == 1
    assert main(["analyze", "stability", str(tmp_path)]) == 1


def test_cli_sweep_and_stability_report(tmp_path, capsys):
    cfg = dict(GOLDEN_CFG, n_iters=200, n_monte_carlo=8, sweep=[0.01],
               sweep_modes=["reputation", "always_share", "never_share"])
    p = tmp_path / "sweep.yaml"
    p.write_text(yaml.safe_dump(cfg))
    out = tmp_path / "runs"
    assert main(["sweep", str(p), "--out", str(out)]) == 0
    assert (out / "sweep_summary.csv").exists()
    report = tmp_path / "report.txt"
    assert main(["analyze", "stability", str(out), "--report", str(report)]) == 0
    assert "regime=" in report.read_text()
    capsys.readouterr()


def test_cli_stage_game(capsys):
    rc = main(["analyze", "stage-game", "--err-k", "1.0", "--err-l", "0.8",
               "--dim", "3", "--samples", "2000", "--cost", "0.05"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "pareto:" in out and "withholding dominant: True" in out


def test_cli_stage_game_input_validation(tmp_path):
    vec = tmp_path / "v.txt"
    vec.write_text("1.0 0.5\n")
    # both norm and file given for k
    assert main(["analyze", "stage-game", "--err-k", "1.0",
                 "--werr-file-k", str(vec), "--err-l", "1.0"]) == 1
    # mismatched lengths
    assert main(["analyze", "stage-game", "--werr-file-k", str(vec),
                 "--err-l", "1.0", "--dim", "5"]) == 1


def test_cli_pairing_stats(cfg_file, tmp_path, capsys):
    out = tmp_path / "stats.npz"
    rc = main(["pairing-stats", str(cfg_file), "--trials", "2000",
               "--out", str(out)])
    assert rc == 0
    data = np.load(out)
    assert data["counts"].sum() == 4 * 2000
    assert "pairing probabilities" in capsys.readouterr().out


def test_console_entry_point_installed():
    proc = subprocess.run([sys.executable, "-m", "selfnet.cli", "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "selfnet" in proc.stdout
