"""Training loop and evaluation over windowed trajectory records."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..dataio.records import SamplingConfig, TrajectoryRecord, mask_observations, split_condition_predict
from ..diffcore import Tape, backward, constant
from ..model.batching import Batch, assemble_batch
from ..model.network import Model
from ..model.odefunc import integrate_latent
from ..seeding import rng_for
from .losses import LossConfig, LossReport, combine, loss_gt_rev, loss_pred, loss_rev2, loss_reverse
from .optim import AdamW, clip_gradients


class TrainingDiverged(RuntimeError):
    """Loss became non-finite; parameters were rolled back one batch."""

    def __init__(self, epoch: int, batch: int):
        super().__init__(f"non-finite loss at epoch {epoch}, batch {batch}; "
                         "parameters rolled back to the last finite state")
        self.epoch = epoch
        self.batch = batch


def _batch_losses(model: Model, batch: Batch, loss_cfg: LossConfig):
    """Taped (l_pred, l_variant) for one batch, normalized per record."""
    need_reverse = loss_cfg.alpha > 0 and loss_cfg.variant in ("tango", "gt-rev")
    need_rev2 = loss_cfg.alpha > 0 and loss_cfg.variant == "rev2"
    out = model.run(batch, need_reverse=need_reverse, need_rev2=need_rev2)
    scale = 1.0 / batch.n_records
    from ..diffcore import scalar_mul

    l_pred = scalar_mul(scale, loss_pred(out.y_fwd, batch.y_true, batch.mask))
    l_rev = None
    if need_reverse and loss_cfg.variant == "tango":
        l_rev = scalar_mul(scale, loss_reverse(out.y_fwd, out.y_rev))
    elif need_reverse:
        l_rev = scalar_mul(scale, loss_gt_rev(batch.y_true, batch.mask, out.y_rev))
    elif need_rev2:
        l_rev = scalar_mul(scale, loss_rev2(out.y_fwd, out.y_rev2))
    return out, l_pred, l_rev


def tracked_reversal(model: Model, batch: Batch, out) -> float:
    """Tango-style reversal loss computed off-tape (never backpropagated),
    per record."""
    from ..diffcore import concat

    zT = constant(out.z_fwd[-1].data)
    z_rev = integrate_latent(zT, batch.n_frames, -batch.frame_step,
                             batch.ode_src, batch.ode_dst, model.params,
                             substeps=model.substeps)
    y_rev = model.decode(concat(list(reversed(z_rev)), axis=0))
    y_fwd = constant(out.y_fwd.data)
    return loss_reverse(y_fwd, y_rev).item() / batch.n_records


@dataclass
class TrainResult:
    reports: list
    final_l_pred: float
    final_l_reverse: float


def make_training_batches(records: list, sampling: SamplingConfig, batch_size: int,
                          d_model: int, epoch_rng: np.random.Generator,
                          graph_cache: dict | None = None) -> list:
    order = epoch_rng.permutation(len(records))
    batches = []
    for start in range(0, len(records), batch_size):
        chosen = [records[i] for i in order[start:start + batch_size]]
        key = tuple(r.traj_id for r in chosen)
        if graph_cache is not None and key in graph_cache:
            batches.append(graph_cache[key])
            continue
        cond, tgt = zip(*(split_condition_predict(r, "train", sampling) for r in chosen))
        batch = assemble_batch(list(cond), list(tgt), sampling, "train", d_model)
        if graph_cache is not None:
            graph_cache[key] = batch
        batches.append(batch)
    return batches


def train(model: Model, records: list, sampling: SamplingConfig,
          loss_cfg: LossConfig, epochs: int, seed: int,
          lr: float = 1e-4, batch_size: int = 32, clip: float | None = None,
          weight_decay: float = 1e-4, track_reversal: bool = True,
          log=None) -> TrainResult:
    """Optimize the model in place; fully deterministic given the seed.

    The reversal loss is tracked every batch even when the configured alpha
    is zero; in that case it is evaluated off-tape and never contributes a
    gradient.
    """
    if epochs < 1:
        raise ValueError(f"epochs must be >= 1, got {epochs}")
    if not records:
        raise ValueError("training needs a non-empty dataset")
    params = model.params.nodes()
    opt = AdamW(params, lr=lr, weight_decay=weight_decay)
    reports: list[LossReport] = []
    graph_cache: dict = {}
    last_good = model.params.copy()
    for epoch in range(epochs):
        rng = rng_for(seed, "order", epoch)
        batches = make_training_batches(records, sampling, batch_size,
                                        model.config.d_model, rng, graph_cache)
        report = LossReport(epoch=epoch, l_pred=0.0, l_reverse=0.0, total=0.0)
        for b_idx, batch in enumerate(batches):
            try:
                with Tape() as tape, np.errstate(over="ignore", invalid="ignore"):
                    out, l_pred_node, l_rev_node = _batch_losses(model, batch, loss_cfg)
                    total_node = combine(l_pred_node, l_rev_node, loss_cfg.alpha)
                total = total_node.item()
            except FloatingPointError:
                model.params.load_values(last_good)
                raise TrainingDiverged(epoch, b_idx) from None
            if not np.isfinite(total):
                model.params.load_values(last_good)
                raise TrainingDiverged(epoch, b_idx)
            backward(tape, total_node, parameters=params)
            if clip is not None:
                clip_gradients(params, clip)
            last_good = model.params.copy()
            opt.step()
            opt.zero_grads()
            l_pred = l_pred_node.item()
            if l_rev_node is not None:
                l_rev = l_rev_node.item()
            elif track_reversal:
                l_rev = tracked_reversal(model, batch, out)
            else:
                l_rev = 0.0
            report.batch_l_pred.append(l_pred)
            report.batch_l_reverse.append(l_rev)
            report.batch_total.append(total)
        n = len(report.batch_l_pred)
        report.l_pred = float(np.sum(report.batch_l_pred) / n)
        report.l_reverse = float(np.sum(report.batch_l_reverse) / n)
        report.total = float(np.sum(report.batch_total) / n)
        reports.append(report)
        if log is not None:
            log(report)
    return TrainResult(reports=reports,
                       final_l_pred=reports[-1].l_pred,
                       final_l_reverse=reports[-1].l_reverse)


def evaluate(model: Model, records: list, sampling: SamplingConfig, mode: str = "test",
             mask_ratio: float | None = None, mask_seed: int = 0,
             max_length: int | None = None, batch_size: int = 32,
             lengths: list | None = None) -> dict:
    """Held-out MSE of forward predictions at observed entries.

    Returns overall MSE plus per-prediction-length-prefix MSE; lengths
    count candidate frames from the prediction start.  ``mask_ratio`` thins
    the conditioning observations only; evaluation targets are untouched.
    """
    sq_per_frame: np.ndarray | None = None
    count_per_frame: np.ndarray | None = None
    for start in range(0, len(records), batch_size):
        chosen = records[start:start + batch_size]
        cond, tgt = zip(*(split_condition_predict(r, mode, sampling) for r in chosen))
        if mask_ratio is not None:
            cond = [mask_observations(c, mask_ratio, mask_seed) for c in cond]
        batch = assemble_batch(list(cond), list(tgt), sampling, mode, model.config.d_model)
        out = model.run(batch)
        err = (out.y_fwd.data - batch.y_true) * batch.mask
        err = err.reshape(batch.n_frames, -1)
        msk = batch.mask.reshape(batch.n_frames, -1)
        if sq_per_frame is None:
            sq_per_frame = np.zeros(batch.n_frames)
            count_per_frame = np.zeros(batch.n_frames)
        sq_per_frame += (err * err).sum(axis=1)
        count_per_frame += msk.sum(axis=1)
    n_frames = len(sq_per_frame)
    horizon = max_length if max_length is not None else n_frames
    horizon = min(horizon, n_frames)
    cum_sq = np.cumsum(sq_per_frame)
    cum_n = np.cumsum(count_per_frame)
    result = {"mse": float(cum_sq[horizon - 1] / cum_n[horizon - 1]),
              "n_values": int(cum_n[horizon - 1]), "per_length": {}}
    for length in (lengths or []):
        li = min(length, n_frames)
        result["per_length"][length] = float(cum_sq[li - 1] / max(cum_n[li - 1], 1.0))
    return result
