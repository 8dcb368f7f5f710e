import json
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, strategies as st

from soldercreep import cli
from soldercreep import config as cfgmod
from soldercreep.config import ExperimentConfig, derive_seed
from soldercreep.exceptions import ConfigError
from soldercreep.neuralnet.model import TrainedModel

SMALL = """\
# tiny run for tests
seed = 7
profile.n_half_cycles = 150
mlp.neurons_per_layer = 16
mlp.max_epochs = 20
mlp.early_stop_patience = 5
mlp.restarts = 1
lstm.epochs = 2
lstm.restarts = 1
lstm.sequence_length_min = 60
dataset.fractions = 0.5, 1.0
sweep.seq_lengths = 10, 60
"""


@pytest.fixture
def small_cfg(tmp_path):
    path = tmp_path / "small.txt"
    path.write_text(SMALL)
    return path, tmp_path / "run"


def _run(path, out, *args):
    return cli.main([*args, "--config", str(path), "--out", str(out)])


def test_default_roundtrip():
    cfg = ExperimentConfig()
    assert cfgmod.loads(cfgmod.dumps(cfg)) == cfg


@given(st.integers(0, 2**31), st.integers(1, 5000), st.floats(0.1, 5.0), st.integers(1, 4096),
       st.lists(st.floats(0.01, 1.0), min_size=1, max_size=6))
def test_roundtrip_property(seed, n, sd, batch, fractions):
    cfg = ExperimentConfig(seed=seed)
    cfg = replace(cfg, profile=replace(cfg.profile, n_half_cycles=n, gradient_sd=sd),
                  mlp=replace(cfg.mlp, batch_size=batch),
                  dataset=replace(cfg.dataset, fractions=tuple(sorted(fractions))))
    assert cfgmod.loads(cfgmod.dumps(cfg)) == cfg


def test_comments_and_defaults():
    cfg = cfgmod.loads("# only a comment\n\nmlp.batch_size = 64  # trailing\n")
    assert cfg.mlp.batch_size == 64
    assert cfg.lstm == ExperimentConfig().lstm


@pytest.mark.parametrize("text", [
    "nonsense.key = 1",
    "mlp.bogus = 1",
    "mlp.batch_size = many",
    "no equals sign",
    "config_version = 99",
    "dataset.fractions = 0.5, 0.25",
    "dataset.fractions = 0.0, 1.0",
    "mlp.dropout_rate = 1.5",
    "mlp.seed = 3",
])
def test_invalid_config(text):
    with pytest.raises(ConfigError):
        cfgmod.loads(text)


def test_seed_derivation_independent():
    assert derive_seed(0, "a") == derive_seed(0, "a")
    assert derive_seed(0, "a") != derive_seed(0, "b")
    assert derive_seed(0, "a") != derive_seed(1, "a")
    cfg = ExperimentConfig(seed=4)
    assert cfg.model_config("mlp", "x").seed == derive_seed(4, "mlp:x")
    with pytest.raises(ConfigError):
        cfg.model_config("svm", "x")


def test_pipeline_end_to_end(small_cfg):
    path, out = small_cfg
    for step in ("generate", "simulate", "dataset"):
        assert _run(path, out, step) == 0
    summary = json.loads((out / "profile" / "summary.json").read_text())
    assert summary["n_half_cycles"] == 150
    creep = json.loads((out / "creep" / "summary.json").read_text())
    assert creep["n_records"] == 150
    assert _run(path, out, "train", "--model", "mlp") == 0
    assert _run(path, out, "train", "--model", "lstm", "--fraction", "0.5") == 0
    model = TrainedModel.from_json((out / "models" / "mlp_f1.json").read_text())
    log = (out / "models" / "mlp_f1_log.csv").read_text().splitlines()
    assert log[0] == "epoch,train_loss,val_loss"
    assert len(log) - 1 == len(model.history["val_loss"]) <= 20
    assert _run(path, out, "evaluate", "--model", "mlp") == 0
    assert _run(path, out, "evaluate", "--model", "lstm", "--fraction", "0.5") == 0
    report = json.loads((out / "reports" / "lstm_f0.5.json").read_text())
    assert report["r2"] <= 1 and report["f_rel_ave"] >= 0
    series = (out / "reports" / "lstm_f0.5_series.csv").read_text().splitlines()
    assert series[0] == "index,true_accum,pred_accum,rel_err,time_min"


@pytest.mark.parametrize("kind", ["mlp", "lstm"])
def test_perfect_oracle_closure(small_cfg, kind):
    path, out = small_cfg
    for step in ("generate", "simulate", "dataset"):
        _run(path, out, step)
    assert _run(path, out, "evaluate", "--model", kind, "--perfect") == 0
    report = json.loads((out / "reports" / f"{kind}_perfect.json").read_text())
    assert report["r2"] == pytest.approx(1.0, abs=1e-12)
    assert report["f_rel_ave"] < 1e-9


def test_generate_is_byte_identical(small_cfg, tmp_path):
    path, out = small_cfg
    other = tmp_path / "again"
    for target in (out, other):
        assert _run(path, target, "generate") == 0
        assert _run(path, target, "simulate") == 0
    for rel in ("profile/half_cycles.csv", "profile/trace.csv", "profile/summary.json",
                "creep/records.csv", "creep/summary.json"):
        assert (out / rel).read_bytes() == (other / rel).read_bytes()


def test_seed_flag_changes_profile(small_cfg, tmp_path):
    path, out = small_cfg
    _run(path, out, "generate")
    cli.main(["generate", "--config", str(path), "--out", str(tmp_path / "s2"), "--seed", "8"])
    assert (out / "profile" / "trace.csv").read_bytes() != (tmp_path / "s2" / "profile" / "trace.csv").read_bytes()


def test_single_cycle_generate(tmp_path):
    path = tmp_path / "one.txt"
    path.write_text("profile.n_half_cycles = 1\n")
    assert cli.main(["generate", "--config", str(path), "--out", str(tmp_path / "o")]) == 0
    lines = (tmp_path / "o" / "profile" / "half_cycles.csv").read_text().splitlines()
    assert len(lines) == 2


def test_exit_codes(small_cfg, tmp_path):
    path, out = small_cfg
    assert _run(path, out, "simulate") == 3
    assert _run(path, out, "evaluate", "--model", "mlp") == 3
    assert _run(path, out, "train", "--model", "bogus") == 2
    assert cli.main([]) == 2
    bad = tmp_path / "bad.txt"
    bad.write_text("mlp.nope = 1\n")
    assert cli.main(["generate", "--config", str(bad), "--out", str(out)]) == 2
    _run(path, out, "generate")
    _run(path, out, "simulate")
    _run(path, out, "dataset")
    assert _run(path, out, "train", "--model", "mlp", "--fraction", "0.01") == 2


def test_numeric_failure_exit(small_cfg, tmp_path):
    path, out = small_cfg
    diverge = tmp_path / "diverge.txt"
    diverge.write_text(SMALL + "mlp.learning_rate = 1e12\nmlp.dropout_rate = 0.0\n")
    for step in ("generate", "simulate", "dataset"):
        _run(diverge, out, step)
    assert _run(diverge, out, "train", "--model", "mlp") in (0, 4)
    stiff = tmp_path / "stiff.txt"
    stiff.write_text(SMALL + "material.c1 = 1e9\nmaterial.c4 = -500\nsimulation.dt_s = 30\n")
    assert _run(stiff, out, "generate") == 0
    assert _run(stiff, out, "simulate") == 4


def test_seqlen_below_sample_period(small_cfg):
    path, out = small_cfg
    for step in ("generate", "simulate"):
        _run(path, out, step)
    assert _run(path, out, "sweep-seqlen", "--lengths", "0.5") == 2


def test_sweeps(small_cfg):
    path, out = small_cfg
    for step in ("generate", "simulate", "dataset"):
        _run(path, out, step)
    assert _run(path, out, "sweep-fraction") == 0
    rows = (out / "sweeps" / "fraction.csv").read_text().splitlines()
    assert rows[0] == "fraction,hours,model,f_rel_ave,r2"
    assert len(rows) == 1 + 2 * 2
    summary = json.loads((out / "sweeps" / "fraction_summary.json").read_text())
    assert set(summary["models"]) == {"mlp", "lstm"}
    first = (out / "sweeps" / "fraction.csv").read_bytes()
    assert _run(path, out, "sweep-fraction") == 0
    assert (out / "sweeps" / "fraction.csv").read_bytes() == first
    assert _run(path, out, "sweep-seqlen") == 0
    rows = (out / "sweeps" / "seqlen.csv").read_text().splitlines()
    assert rows[0] == "seq_len,f_rel_ave,r2" and len(rows) == 3


def test_trend_summary():
    rows = [{"fraction": f, "model": "mlp", "f_rel_ave": e, "r2": 0.5, "hours": 1.0}
            for f, e in ((0.125, 0.30), (0.5, 0.2), (1.0, 0.21))]
    s = cli.trend_summary(rows)["models"]["mlp"]
    assert s["full_not_worse_than_smallest"] and s["monotone_within_band"]
    assert s["best_fraction"] == 0.5 and s["worst_fraction"] == 0.125
