import json
import os

import numpy as np
import pytest

from reversym.cli import main


def run(argv):
    return main(argv)


@pytest.fixture(scope="module")
def tiny_dataset(tmp_path_factory):
    out = str(tmp_path_factory.mktemp("cli") / "run")
    code = run(["simulate", "--system", "simple-spring", "--n-agents", "3",
                "--n-train", "8", "--n-test", "4", "--seed", "7",
                "--stride", "100", "--out", out])
    assert code == 0
    return os.path.join(out, "dataset")


def test_simulate_deterministic(tmp_path):
    a = str(tmp_path / "a")
    b = str(tmp_path / "b")
    for out in (a, b):
        assert run(["simulate", "--system", "simple-spring", "--n-agents", "2",
                    "--n-train", "3", "--n-test", "1", "--seed", "5",
                    "--out", out]) == 0
    for name in ("meta", "trajectories", "adjacency"):
        pa = os.path.join(a, "dataset", name)
        pb = os.path.join(b, "dataset", name)
        assert open(pa, "rb").read() == open(pb, "rb").read()


def test_simulate_refuses_overwrite(tmp_path):
    out = str(tmp_path / "x")
    args = ["simulate", "--system", "simple-spring", "--n-agents", "2",
            "--n-train", "2", "--n-test", "1", "--seed", "5", "--out", out]
    assert run(args) == 0
    assert run(args) == 2
    assert run(args + ["--force"]) == 0


def test_unknown_system_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        run(["simulate", "--system", "tesseract"])
    assert exc.value.code == 2


def test_unknown_experiment_exits_2():
    with pytest.raises(SystemExit) as exc:
        run(["analyze", "warp-drive"])
    assert exc.value.code == 2


def test_pendulum_default_dt(tmp_path):
    out = str(tmp_path / "p")
    assert run(["simulate", "--system", "pendulum", "--n-train", "2",
                "--n-test", "1", "--seed", "3", "--stride", "100",
                "--out", out]) == 0
    meta = open(os.path.join(out, "dataset", "meta")).read()
    assert "dt 0.0001" in meta


def test_train_eval_pipeline(tiny_dataset, tmp_path):
    train_out = str(tmp_path / "t")
    code = run(["train", "--dataset", tiny_dataset, "--alpha", "1", "--epochs", "2",
                "--batch", "4", "--seed", "11", "--lr", "0.001", "--out", train_out])
    assert code == 0
    ckpt = os.path.join(train_out, "checkpoint.ckpt")
    assert os.path.exists(ckpt)
    losses = open(os.path.join(train_out, "losses.csv")).read().splitlines()
    assert losses[0] == "epoch,l_pred,l_reverse,total"
    assert len(losses) == 3
    manifest = json.load(open(os.path.join(train_out, "manifest.json")))
    assert manifest["completed"] is True
    assert manifest["config"]["alpha"] == 1.0

    eval_out = str(tmp_path / "e")
    code = run(["eval", "--checkpoint", ckpt, "--dataset", tiny_dataset,
                "--out", eval_out, "--energy-curves", "1"])
    assert code == 0
    metrics = open(os.path.join(eval_out, "metrics.csv")).read().splitlines()
    assert metrics[0] == "metric,mse"
    assert metrics[1].startswith("overall,")
    assert os.path.exists(os.path.join(eval_out, "energy.csv"))


def test_train_config_file_with_flag_precedence(tiny_dataset, tmp_path):
    cfg = str(tmp_path / "train.cfg")
    with open(cfg, "w") as fh:
        fh.write(f"dataset {tiny_dataset}\nalpha 0.5\nepochs 1\nbatch 4\nseed 2\nlr 0.001\n")
    out = str(tmp_path / "run")
    assert run(["train", "--config", cfg, "--alpha", "0", "--out", out]) == 0
    manifest = json.load(open(os.path.join(out, "manifest.json")))
    assert manifest["config"]["alpha"] == 0.0       # flag wins
    assert manifest["config"]["batch"] == 4          # file value kept


def test_train_variant_flag(tiny_dataset, tmp_path):
    out = str(tmp_path / "gr")
    assert run(["train", "--dataset", tiny_dataset, "--alpha", "0.5",
                "--variant", "gt-rev", "--epochs", "1", "--batch", "4",
                "--seed", "1", "--out", out]) == 0
    manifest = json.load(open(os.path.join(out, "manifest.json")))
    assert manifest["config"]["variant"] == "gt-rev"


def test_train_determinism_same_checkpoint(tiny_dataset, tmp_path):
    outs = [str(tmp_path / "r1"), str(tmp_path / "r2")]
    for out in outs:
        assert run(["train", "--dataset", tiny_dataset, "--alpha", "1",
                    "--epochs", "1", "--batch", "4", "--seed", "9",
                    "--lr", "0.001", "--out", out]) == 0
    c1 = open(os.path.join(outs[0], "checkpoint.ckpt"), "rb").read()
    c2 = open(os.path.join(outs[1], "checkpoint.ckpt"), "rb").read()
    assert c1 == c2


def test_eval_dimension_mismatch(tiny_dataset, tmp_path):
    from reversym.model import ModelConfig, init_params, save_checkpoint

    bad = str(tmp_path / "bad.ckpt")
    save_checkpoint(bad, init_params(ModelConfig(feature_dim=2), seed=0))
    code = run(["eval", "--checkpoint", bad, "--dataset", tiny_dataset,
                "--out", str(tmp_path / "o")])
    assert code == 2


def test_analyze_solver_order(tmp_path):
    out = str(tmp_path / "so")
    assert run(["analyze", "solver-order", "--integrator", "rk4", "--out", out]) == 0
    summary = open(os.path.join(out, "summary.txt")).read()
    assert "dt_slope_closure" in summary
    slope = float([l for l in summary.splitlines()
                   if l.startswith("dt_slope_closure")][0].split()[1])
    assert abs(slope - 8.0) <= 1.0
    csv = open(os.path.join(out, "solver_order.csv")).read().splitlines()
    assert csv[0] == "dt,horizon,reconstruction_sq,closure_sq"


def test_analyze_maxerror_small(tmp_path):
    out = str(tmp_path / "mx")
    assert run(["analyze", "maxerror", "--scenarios", "5", "--seed", "3",
                "--out", out]) == 0
    lines = open(os.path.join(out, "maxerror.csv")).read().splitlines()
    assert lines[0] == "kind,a,b,maxerr_impl1,maxerr_impl2"
    assert sum(1 for l in lines if l.startswith("sampled")) == 5


def test_analyze_reversal_track(tiny_dataset, tmp_path):
    out = str(tmp_path / "rt")
    assert run(["analyze", "reversal-track", "--dataset", tiny_dataset,
                "--alpha", "0", "--epochs", "1", "--batch", "4",
                "--seed", "2", "--out", out]) == 0
    lines = open(os.path.join(out, "reversal_track.csv")).read().splitlines()
    assert lines[0] == "epoch,l_pred,l_reverse,total"
    summary = open(os.path.join(out, "summary.txt")).read()
    assert "never backpropagated" in summary


def test_analyze_alpha_sweep_requires_zero(tiny_dataset, tmp_path):
    out = str(tmp_path / "as")
    code = run(["analyze", "alpha-sweep", "--dataset", tiny_dataset,
                "--alphas", "0.5", "1.0", "--epochs", "1", "--out", out])
    assert code == 2


def test_analyze_sweeps_smoke(tiny_dataset, tmp_path):
    out = str(tmp_path / "sw")
    assert run(["analyze", "alpha-sweep", "--dataset", tiny_dataset,
                "--alphas", "0", "1", "--epochs", "1", "--batch", "4",
                "--seed", "4", "--out", out]) == 0
    lines = open(os.path.join(out, "alpha_sweep.csv")).read().splitlines()
    assert lines[0] == "alpha,final_l_pred,final_l_reverse,test_mse,diverged"
    assert len(lines) == 3
    out2 = str(tmp_path / "hw")
    assert run(["analyze", "horizon-sweep", "--dataset", tiny_dataset,
                "--lengths", "10", "30", "60", "--epochs", "1", "--batch", "4",
                "--out", out2]) == 0
    out3 = str(tmp_path / "rw")
    assert run(["analyze", "ratio-sweep", "--dataset", tiny_dataset,
                "--ratios", "1.0", "0.4", "--epochs", "1", "--batch", "4",
                "--out", out3]) == 0
    lines = open(os.path.join(out3, "ratio_sweep.csv")).read().splitlines()
    assert lines[1].startswith("1,") or lines[1].startswith("1.0,")
