"""Sweep-style studies: regularizer weight, prediction length, observation
ratio, reversal-loss tracking, and energy-curve export.

Every sweep cell derives its seed deterministically from (base seed, cell
index), so cells may run in any order or in parallel without changing the
numbers.  The REVERSYM_THREADS environment variable caps worker processes;
the default is serial execution.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from ..dataio import read_dataset
from ..dataio.generate import regenerate_fine_trajectory
from ..dataio.records import split_condition_predict
from ..model import Model, ModelConfig, assemble_batch, init_params
from ..physics import PhaseState, SpringSpec, energy
from ..seeding import derive_seed
from ..training import LossConfig, evaluate, train


def worker_cap() -> int:
    value = os.environ.get("REVERSYM_THREADS", "1")
    try:
        return max(1, int(value))
    except ValueError:
        return 1


def run_cells(fn, cells: list) -> list:
    """Apply fn to each cell argument tuple, optionally in processes."""
    workers = worker_cap()
    if workers <= 1 or len(cells) <= 1:
        return [fn(*cell) for cell in cells]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_CellCall(fn), cells))


class _CellCall:
    def __init__(self, fn):
        self.fn = fn

    def __call__(self, cell):
        return self.fn(*cell)


def _train_once(dataset_dir: str, alpha: float, variant: str, epochs: int,
                seed: int, lr: float, batch: int, substeps: int = 1,
                clip: float | None = None):
    meta, records = read_dataset(dataset_dir)
    train_records = records[:meta.n_train]
    test_records = records[meta.n_train:]
    cfg = ModelConfig(feature_dim=meta.feature_dim)
    model = Model(cfg, init_params(cfg, seed=seed), substeps=substeps)
    result = train(model, train_records, meta.sampling,
                   LossConfig(alpha=alpha, variant=variant),
                   epochs=epochs, seed=seed, lr=lr, batch_size=batch, clip=clip)
    return model, meta, test_records, result


def alpha_sweep(dataset_dir: str, alphas: list, epochs: int, seed: int,
                lr: float = 1e-4, batch: int = 32, variant: str = "tango") -> list:
    """One trained model per alpha with a shared seed; held-out MSE each.

    Returns rows (alpha, final_l_pred, final_l_reverse, test_mse, diverged).
    """
    if 0.0 not in [float(a) for a in alphas]:
        raise ValueError("the alpha grid must include 0 (the prediction-only baseline)")

    def cell(alpha):
        from ..training.loop import TrainingDiverged

        try:
            model, meta, test_records, result = _train_once(
                dataset_dir, alpha, variant, epochs, seed, lr, batch)
            ev = evaluate(model, test_records, meta.sampling, mode="test")
            return (float(alpha), result.final_l_pred, result.final_l_reverse,
                    ev["mse"], 0)
        except TrainingDiverged:
            return (float(alpha), float("nan"), float("nan"), float("nan"), 1)

    return run_cells(cell, [(a,) for a in alphas])


def horizon_sweep(dataset_dir: str, lengths: list, epochs: int, seed: int,
                  alpha: float = 1.0, lr: float = 1e-4, batch: int = 32) -> list:
    """Fixed training, evaluation truncated to each prediction length."""
    model, meta, test_records, _ = _train_once(dataset_dir, alpha, "tango",
                                               epochs, seed, lr, batch)
    ev = evaluate(model, test_records, meta.sampling, mode="test", lengths=lengths)
    return [(int(length), ev["per_length"][length]) for length in lengths]


def ratio_sweep(dataset_dir: str, ratios: list, epochs: int, seed: int,
                alpha: float = 1.0, lr: float = 1e-4, batch: int = 32) -> list:
    """Fixed training, conditioning observations masked to each ratio."""
    for r in ratios:
        if not 0.0 < r <= 1.0:
            raise ValueError(f"ratios must lie in (0, 1], got {r}")
    model, meta, test_records, _ = _train_once(dataset_dir, alpha, "tango",
                                               epochs, seed, lr, batch)
    rows = []
    for ratio in ratios:
        ev = evaluate(model, test_records, meta.sampling, mode="test",
                      mask_ratio=None if ratio == 1.0 else ratio,
                      mask_seed=derive_seed(seed, "ratio", ratio))
        rows.append((float(ratio), ev["mse"]))
    return rows


def reversal_track(dataset_dir: str, alpha: float, epochs: int, seed: int,
                   lr: float = 1e-4, batch: int = 32) -> list:
    """Per-epoch prediction and reversal losses; with alpha = 0 the reversal
    column is evaluation-only and never backpropagated."""
    model, meta, test_records, result = _train_once(dataset_dir, alpha, "tango",
                                                    epochs, seed, lr, batch)
    return [(rep.epoch, rep.l_pred, rep.l_reverse, rep.total)
            for rep in result.reports]


def energy_curves(dataset_dir: str, model: Model, traj_ids: list,
                  mode: str = "test") -> list:
    """Per-frame energy of decoded predictions next to the ground truth.

    Rows: (traj_id, frame, time, predicted_total, true_total).  Spring
    systems only; the true energy comes from the regenerated fine
    trajectory at the matching steps.
    """
    meta, records = read_dataset(dataset_dir)
    if meta.system == "pendulum":
        raise ValueError("energy curves are exported for spring systems only")
    sampling = meta.sampling
    pred_start = sampling.train_frames if mode == "test" else sampling.train_frames // 2
    rows = []
    for traj_id in traj_ids:
        record = records[traj_id]
        cond, tgt = split_condition_predict(record, mode, sampling)
        batch = assemble_batch([cond], [tgt], sampling, mode, model.config.d_model)
        out = model.run(batch)
        preds = model.predictions(out, batch)  # (frames, agents, D)
        fine, adj = regenerate_fine_trajectory(meta, traj_id)
        spec = SpringSpec(meta.n_agents, adj, m=meta.physics["m"], k=meta.physics["k"],
                          variant={"simple-spring": "simple", "forced-spring": "forced",
                                   "damped-spring": "damped"}[meta.system])
        scale = meta.norm_max_abs
        for j in range(batch.n_frames):
            frame = pred_start + j
            t = frame * sampling.frame_dt
            feats = preds[j] * scale
            pred_state = PhaseState(feats[:, :2], feats[:, 2:], t=t)
            true_feats = fine[frame]
            true_state = PhaseState(true_feats[:, :2], true_feats[:, 2:], t=t)
            rows.append((traj_id, frame, t,
                         energy(pred_state, spec).total,
                         energy(true_state, spec).total))
    return rows
