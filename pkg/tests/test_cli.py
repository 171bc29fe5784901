"""End-to-end CLI exercises on a small configuration."""

import json
import os

import pytest

from gmmcombine.cli import main
from gmmcombine.datasets import PlayDataset


@pytest.fixture()
def config_path(tmp_path):
    cfg = {
        "trials": 2,
        "train_size": 30,
        "test_size": 30,
        "master_seed": 11,
        "rl": {"iterations": 5, "plays_per_iteration": 8},
        "fit": {"max_iterations": 300},
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return str(path)


def test_simulate(tmp_path, config_path, capsys):
    out = tmp_path / "sim"
    assert main(["simulate", "--config", config_path, "--out", str(out)]) == 0
    train = PlayDataset.load_csv(out / "train.csv")
    test = PlayDataset.load_csv(out / "test.csv")
    assert len(train) == 30 and len(test) == 30
    assert (out / "game.json").exists() and (out / "policy.json").exists()
    assert "simulate: wrote" in capsys.readouterr().out


def test_fit_combine_evaluate(tmp_path, config_path, capsys):
    sim = tmp_path / "sim"
    main(["simulate", "--config", config_path, "--out", str(sim)])

    fit_out = tmp_path / "fit"
    assert main([
        "fit", "--config", config_path, "--data", str(sim / "train.csv"),
        "--out", str(fit_out),
    ]) == 0
    model_path = fit_out / "fitted_model.json"
    assert model_path.exists()

    for method in ("direct", "pool", "mix"):
        comb_out = tmp_path / f"comb_{method}"
        assert main([
            "combine", "--method", method, "--config", config_path,
            "--data", str(sim / "train.csv"), "--out", str(comb_out),
        ]) == 0
        assert (comb_out / f"{method}_model.json").exists()

    assert main([
        "evaluate", "--model", str(model_path), "--data", str(sim / "test.csv"),
    ]) == 0
    assert main([
        "evaluate", "--model", str(tmp_path / "comb_mix" / "mix_model.json"),
        "--data", str(sim / "test.csv"), "--base", str(model_path),
    ]) == 0
    out = capsys.readouterr().out
    assert "score ratio R" in out


def test_experiment_suite_and_determinism(tmp_path, config_path):
    out_a = tmp_path / "exp_a"
    out_b = tmp_path / "exp_b"
    for out in (out_a, out_b):
        assert main([
            "experiment", "--suite", "baseline", "--config", config_path,
            "--out", str(out),
        ]) == 0
    for name in ("trials.csv", "summary.csv", "manifest.json"):
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes()


def test_error_exit_code(tmp_path, capsys):
    missing = str(tmp_path / "nope.csv")
    rc = main(["evaluate", "--model", missing, "--data", missing])
    assert rc == 1
    assert "error" in capsys.readouterr().err
