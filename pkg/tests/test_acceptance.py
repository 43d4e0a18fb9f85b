"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

The training-smoke fixtures are shared across criteria: one seeded
200-trajectory simple-spring dataset, and (seed, alpha) training runs at
30 epochs reused by the smoke, trend, and loss-identity checks.
"""

import time

import numpy as np
import pytest

from reversym.analysis import (
    constructed_worst_cases,
    maxerror_comparison,
    solver_order_experiment,
)
from reversym.analysis.solver_order import errors_monotone_in_dt
from reversym.dataio import generate_dataset
from reversym.dataio.generate import default_sampling
from reversym.dataio.records import split_condition_predict
from reversym.diffcore import TensorNode, grad_check
from reversym.model import Model, ModelConfig, assemble_batch, init_params
from reversym.physics import (
    PhaseState,
    SpringSpec,
    energy_series,
    reversibility_residual,
    rk4_integrate,
    spring_derivative,
)
from reversym.training import LossConfig, evaluate, loss_gt_rev, loss_pred, loss_rev2, loss_reverse, train

SEEDS = (11, 12, 13)


def report(number: int, ok: bool, title: str, detail: str, t0: float) -> None:
    status = "PASS" if ok else "FAIL"
    print(f"\nACCEPTANCE {number:02d} {status} [{time.perf_counter() - t0:6.1f}s] "
          f"{title}: {detail}")


@pytest.fixture(scope="module")
def smoke_dataset():
    sampling = default_sampling("simple-spring", seed=7)
    meta, records, _ = generate_dataset("simple-spring", 3, sampling, 200, 50)
    return meta, records


@pytest.fixture(scope="module")
def smoke_runs(smoke_dataset):
    meta, records = smoke_dataset
    train_recs = records[:meta.n_train]
    test_recs = records[meta.n_train:]
    runs = {}
    for seed in SEEDS:
        for alpha in (1.0, 0.0):
            cfg = ModelConfig(feature_dim=meta.feature_dim)
            model = Model(cfg, init_params(cfg, seed=seed))
            result = train(model, train_recs, meta.sampling, LossConfig(alpha=alpha),
                           epochs=30, seed=seed, lr=1e-4, batch_size=32)
            ev = evaluate(model, test_recs, meta.sampling, mode="test")
            runs[(seed, alpha)] = {"reports": result.reports, "mse": ev["mse"],
                                   "final_l_pred": result.final_l_pred,
                                   "final_l_reverse": result.final_l_reverse}
    return runs


def _ring_spec(n=4, variant="simple"):
    adj = np.zeros((n, n))
    for i in range(n):
        adj[i, (i + 1) % n] = adj[(i + 1) % n, i] = 1.0
    return SpringSpec(n, adj, variant=variant)


def test_criterion_1_gradient_correctness(micro_cfg):
    t0 = time.perf_counter()
    from test_diffcore import _op_cases

    worst_op = 0.0
    for seed in range(12):
        rng = np.random.default_rng(9000 + seed)
        cases = _op_cases(rng)
        name, f, point = cases[seed % len(cases)]
        worst_op = max(worst_op, grad_check(f, point, fd_step=1e-5))

    from conftest import micro_sampling, random_record

    sampling = micro_sampling(seed=1, frames=6, ext=6)
    rec = random_record(np.random.default_rng(1), n_agents=2, sampling=sampling)
    cfg = ModelConfig(feature_dim=4, d_model=4, n_layers=1, enc_out=2, latent_aug=2,
                      ode_hidden=4)
    cond, tgt = split_condition_predict(rec, "train", sampling)
    batch = assemble_batch([cond], [tgt], sampling, "train", cfg.d_model)
    assert batch.n_frames == 3
    params = init_params(cfg, seed=2)
    rng = np.random.default_rng(3)
    params["edge_w2"].data[...] = 0.3 * rng.standard_normal(params["edge_w2"].shape)
    params["node_w2"].data[...] = 0.3 * rng.standard_normal(params["node_w2"].shape)
    names = params.names
    from reversym.training.loop import _batch_losses
    from reversym.training.losses import combine

    def full_objective(nodes):
        lookup = dict(zip(names, nodes))
        probe = Model(cfg, params)
        probe.params = type("S", (), {"__getitem__": lambda s, k: lookup[k],
                                      "nodes": lambda s: nodes})()
        out, l_pred, l_rev = _batch_losses(probe, batch, LossConfig(alpha=1.0))
        return combine(l_pred, l_rev, 1.0)

    full_err = grad_check(full_objective, [params[n].data.copy() for n in names],
                          fd_step=1e-5)
    ok = worst_op < 1e-4 and full_err < 1e-3
    report(1, ok, "gradient correctness",
           f"per-op max rel err {worst_op:.3g} (<1e-4), "
           f"full objective {full_err:.3g} (<1e-3)", t0)
    assert ok


def test_criterion_2_simulator_fidelity():
    t0 = time.perf_counter()
    rng = np.random.default_rng(42)
    q = rng.normal(size=(4, 2))
    p = rng.normal(size=(4, 2))

    spec = _ring_spec()
    traj = rk4_integrate(lambda s: spring_derivative(s, spec),
                         PhaseState(q, p), 1e-4, 10_000)
    series = energy_series(traj, spec)
    simple_drift = float(np.max(np.abs(series.total - series.total[0]))
                         / abs(series.total[0]))

    damped = _ring_spec(variant="damped")
    traj_d = rk4_integrate(lambda s: spring_derivative(s, damped),
                           PhaseState(q.copy(), p.copy()), 1e-4, 5_000)
    series_d = energy_series(traj_d, damped)
    damped_monotone = bool(np.all(np.diff(series_d.conservative) <= 1e-12))

    forced = _ring_spec(variant="forced")
    n_period = int(np.ceil(2 * np.pi / forced.omega / 1e-3))
    traj_f = rk4_integrate(lambda s: spring_derivative(s, forced),
                           PhaseState(q.copy(), p.copy()), 1e-3, n_period)
    series_f = energy_series(traj_f, forced)
    h = series_f.conservative
    forced_variation = float((h.max() - h.min()) / max(abs(h[0]), 1e-12))

    ok = simple_drift < 1e-6 and damped_monotone and forced_variation > 1e-3
    report(2, ok, "simulator fidelity",
           f"simple drift {simple_drift:.3g} (<1e-6), damped monotone "
           f"{damped_monotone}, forced variation {forced_variation:.3g} (>1e-3)", t0)
    assert ok


def test_criterion_3_time_reversal_of_exact_dynamics():
    t0 = time.perf_counter()
    rng = np.random.default_rng(19)
    q = rng.normal(size=(4, 2))
    p = rng.normal(size=(4, 2))
    simple = reversibility_residual(_ring_spec(), PhaseState(q, p), 1e-4, 1000)
    damped = reversibility_residual(_ring_spec(variant="damped"),
                                    PhaseState(q.copy(), p.copy()), 1e-4, 1000)
    ok = simple < 1e-6 and damped >= 1e3 * max(simple, 1e-300)
    report(3, ok, "time reversal of exact dynamics",
           f"simple residual {simple:.3g} (<1e-6), damped/simple ratio "
           f"{damped / max(simple, 1e-300):.3g} (>=1e3)", t0)
    assert ok


def test_criterion_4_solver_orders():
    t0 = time.perf_counter()
    euler = solver_order_experiment("exponential", "euler")
    euler_s = solver_order_experiment("linear-spring", "euler")
    rk4 = solver_order_experiment("exponential", "rk4")
    rk4_s = solver_order_experiment("linear-spring", "rk4")
    slopes_e = (euler.dt_slope_recon, euler_s.dt_slope_recon)
    slopes_c = (rk4.dt_slope_closure, rk4_s.dt_slope_closure)
    monotone = all(errors_monotone_in_dt(r) for r in (euler, euler_s, rk4, rk4_s))
    ok = (all(abs(s - 2.0) <= 0.4 for s in slopes_e)
          and all(abs(s - 8.0) <= 1.0 for s in slopes_c)
          and monotone)
    report(4, ok, "solver orders",
           f"euler recon slopes {[f'{s:.2f}' for s in slopes_e]} (2+-0.4), rk4 closure "
           f"slopes {[f'{s:.2f}' for s in slopes_c]} (8+-1), monotone {monotone}", t0)
    assert ok


def test_criterion_5_reversal_loss_comparison():
    t0 = time.perf_counter()
    constructed = constructed_worst_cases()
    exact = all(m1 == max(a, b) and m2 == a + b
                for a, b, m1, m2 in constructed.cases)
    sampled = maxerror_comparison(n_scenarios=100, seed=0)
    fraction = sampled.fraction_impl1_no_worse()
    ok = exact and fraction >= 0.9
    report(5, ok, "reversal-loss implementation comparison",
           f"constructed bounds exact {exact}, impl-1 no worse in "
           f"{100 * fraction:.0f}% of 100 scenarios (>=90%)", t0)
    assert ok


def test_criterion_6_training_smoke(smoke_runs):
    t0 = time.perf_counter()
    run1 = smoke_runs[(SEEDS[0], 1.0)]
    run0 = smoke_runs[(SEEDS[0], 0.0)]
    epoch1_pred = run1["reports"][0].l_pred
    final_pred = run1["final_l_pred"]
    epoch1_rev = run1["reports"][0].l_reverse
    final_rev = run1["final_l_reverse"]
    pred_halved = final_pred <= 0.5 * epoch1_pred
    rev_reduced = final_rev < epoch1_rev
    alpha0_no_better = run0["final_l_reverse"] >= final_rev
    ok = pred_halved and rev_reduced and alpha0_no_better
    report(6, ok, "training smoke",
           f"L_pred {epoch1_pred:.4g}->{final_pred:.4g} (<=50%), "
           f"L_reverse {epoch1_rev:.4g}->{final_rev:.4g} (decreasing), "
           f"alpha0 tracked reversal {run0['final_l_reverse']:.4g} >= "
           f"alpha1 final {final_rev:.4g}", t0)
    assert ok


def test_criterion_7_trend_vs_reference(smoke_runs):
    t0 = time.perf_counter()
    mse1 = sorted(smoke_runs[(s, 1.0)]["mse"] for s in SEEDS)
    mse0 = sorted(smoke_runs[(s, 0.0)]["mse"] for s in SEEDS)
    median1, median0 = mse1[1], mse0[1]
    ok = median1 <= median0
    report(7, ok, "trend vs reference",
           f"median held-out MSE alpha=1 {median1:.5g} <= alpha=0 {median0:.5g} "
           f"(all alpha1 {[f'{m:.4g}' for m in mse1]}, "
           f"alpha0 {[f'{m:.4g}' for m in mse0]})", t0)
    assert ok


def test_criterion_8_pipeline_determinism(tmp_path):
    t0 = time.perf_counter()
    from reversym.cli import main

    blobs = []
    for run in ("a", "b"):
        base = tmp_path / run
        sim = str(base / "sim")
        assert main(["simulate", "--system", "simple-spring", "--n-agents", "3",
                     "--n-train", "10", "--n-test", "4", "--seed", "21",
                     "--out", sim]) == 0
        tr = str(base / "train")
        assert main(["train", "--dataset", f"{sim}/dataset", "--alpha", "1",
                     "--epochs", "2", "--batch", "5", "--seed", "21",
                     "--lr", "0.001", "--out", tr]) == 0
        ev = str(base / "eval")
        assert main(["eval", "--checkpoint", f"{tr}/checkpoint.ckpt",
                     "--dataset", f"{sim}/dataset", "--out", ev]) == 0
        blob = b""
        for name in ("sim/dataset/meta", "sim/dataset/trajectories",
                     "sim/dataset/adjacency", "train/checkpoint.ckpt",
                     "eval/metrics.csv"):
            blob += open(base / name, "rb").read()
        blobs.append(blob)
    ok = blobs[0] == blobs[1]
    report(8, ok, "pipeline determinism",
           f"byte-identical dataset, checkpoint, metrics across reruns: {ok}", t0)
    assert ok


def test_criterion_9_loss_identities(smoke_runs):
    t0 = time.perf_counter()
    worst = 0.0
    for (seed, alpha), run in smoke_runs.items():
        for rep in run["reports"]:
            for lp, lr_, tot in zip(rep.batch_l_pred, rep.batch_l_reverse,
                                    rep.batch_total):
                expected = lp + alpha * lr_ if alpha > 0 else lp
                worst = max(worst, abs(tot - expected))
    rng = np.random.default_rng(77)
    y = rng.normal(size=(12, 4))
    node = TensorNode(y.copy())
    mask = np.ones_like(y)
    zeros_on_coincide = (loss_pred(node, y).item() == 0.0
                         and loss_reverse(node, TensorNode(y.copy())).item() == 0.0
                         and loss_gt_rev(y, mask, TensorNode(y.copy())).item() == 0.0
                         and loss_rev2(node, TensorNode(y.copy())).item() == 0.0)
    a = TensorNode(rng.normal(size=(6, 3)))
    b = TensorNode(rng.normal(size=(6, 3)))
    symmetric = abs(loss_reverse(a, b).item() - loss_reverse(b, a).item()) < 1e-12
    ok = worst < 1e-12 and zeros_on_coincide and symmetric
    report(9, ok, "loss identities",
           f"max |total - (pred + alpha*rev)| {worst:.3g} (<1e-12), zero on "
           f"coinciding inputs {zeros_on_coincide}, reverse symmetric {symmetric}", t0)
    assert ok


def test_criterion_10_equivariance():
    t0 = time.perf_counter()
    from conftest import micro_sampling, random_record
    from reversym.dataio.records import TrajectoryRecord

    cfg = ModelConfig(feature_dim=4)  # full-size architecture
    failures = 0
    for seed in range(100):
        rng = np.random.default_rng(5000 + seed)
        sampling = micro_sampling(seed=seed)
        rec = random_record(rng, n_agents=4, sampling=sampling, traj_id=0)
        cond, tgt = split_condition_predict(rec, "train", sampling)
        params = init_params(cfg, seed=seed)
        for name in ("edge_w2", "node_w2"):
            params[name].data[...] = 0.05 * rng.standard_normal(params[name].shape)
        model = Model(cfg, params)
        batch = assemble_batch([cond], [tgt], sampling, "train", cfg.d_model)
        base = model.predictions(model.run(batch), batch)
        perm = rng.permutation(4)

        def permute(r):
            return TrajectoryRecord(r.traj_id, [r.times[a] for a in perm],
                                    [r.features[a] for a in perm],
                                    r.adjacency[np.ix_(perm, perm)])

        batch_p = assemble_batch([permute(cond)], [permute(tgt)], sampling,
                                 "train", cfg.d_model)
        permuted = model.predictions(model.run(batch_p), batch_p)
        if base[:, perm, :].tobytes() != permuted.tobytes():
            failures += 1
    ok = failures == 0
    report(10, ok, "agent-permutation equivariance",
           f"exact (bitwise) on 100 random 4-agent inputs, {failures} failures", t0)
    assert ok
