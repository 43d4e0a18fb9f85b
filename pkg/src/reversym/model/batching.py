"""Assemble conditioning/target windows into model-ready batches.

A batch stacks every record's observation graph (disjoint union, canonical
agent order) and lays ground truth out frame-major: row j * n_slots + s is
agent-slot s at target frame j, with a 0/1 mask marking observed entries.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..dataio.records import SamplingConfig, TrajectoryRecord
from .temporal import RecordGraph, build_record_graph, te_matrix


@dataclass
class Batch:
    n_records: int
    n_agents: int
    n_slots: int
    n_nodes: int
    node_slot: np.ndarray
    node_feat: np.ndarray
    te_nodes: np.ndarray
    counts: np.ndarray          # observations per slot
    edge_src: np.ndarray
    edge_dst: np.ndarray
    edge_dt_idx: np.ndarray
    te_table: np.ndarray        # (n_unique_dt, d_model)
    ode_src: np.ndarray
    ode_dst: np.ndarray
    n_frames: int
    frame_step: float           # normalized time between consecutive frames
    y_true: np.ndarray          # (n_frames * n_slots, D)
    mask: np.ndarray            # same shape, 0/1
    slot_unscramble: np.ndarray  # original slot -> canonical slot

    @property
    def n_observed_values(self) -> int:
        return int(self.mask.sum())


def window_frames(record: TrajectoryRecord, sampling: SamplingConfig) -> list:
    return record.frame_indices(sampling.frame_dt)


def assemble_batch(cond_records: list, target_records: list,
                   sampling: SamplingConfig, mode: str, d_model: int) -> Batch:
    """Merge (conditioning, target) record pairs into one Batch."""
    if mode not in ("train", "test"):
        raise ValueError(f"mode must be 'train' or 'test', got {mode!r}")
    if len(cond_records) != len(target_records) or not cond_records:
        raise ValueError("need matching, non-empty conditioning and target lists")
    frames_window = sampling.train_frames
    if mode == "train":
        pred_start = frames_window // 2
        n_frames = frames_window - pred_start
    else:
        pred_start = frames_window
        n_frames = sampling.extension_frames

    n_agents = cond_records[0].n_agents
    feat_dim = cond_records[0].feature_dim
    graphs: list[RecordGraph] = []
    for rec in cond_records:
        if rec.n_agents != n_agents:
            raise ValueError("all records in a batch must share the agent count")
        graphs.append(build_record_graph(
            rec.times, rec.features, window_frames(rec, sampling),
            rec.adjacency, pred_start, frames_window))

    n_slots = len(graphs) * n_agents
    node_slot, node_tau, node_feat = [], [], []
    edge_src, edge_dst, edge_dt = [], [], []
    ode_src, ode_dst, counts = [], [], []
    unscramble = np.zeros(n_slots, dtype=np.intp)
    node_offset = 0
    for b, g in enumerate(graphs):
        slot0 = b * n_agents
        node_slot.append(slot0 + g.node_agent)
        node_tau.append(g.node_tau)
        node_feat.append(g.node_feat)
        counts.append(g.counts)
        edge_src.append(node_offset + g.edge_src)
        edge_dst.append(node_offset + g.edge_dst)
        edge_dt.append(g.edge_dt)
        ode_src.append(slot0 + g.ode_src)
        ode_dst.append(slot0 + g.ode_dst)
        inverse = np.argsort(g.agent_order)
        unscramble[slot0:slot0 + n_agents] = slot0 + inverse
        node_offset += len(g.node_tau)

    node_slot = np.concatenate(node_slot)
    node_tau = np.concatenate(node_tau)
    node_feat = np.concatenate(node_feat, axis=0)
    edge_dt = np.concatenate(edge_dt)
    dt_table, edge_dt_idx = np.unique(edge_dt, return_inverse=True)
    if len(dt_table) == 0:
        dt_table = np.zeros(1)
        edge_dt_idx = np.zeros(0, dtype=np.intp)

    y_true = np.zeros((n_frames * n_slots, feat_dim))
    mask = np.zeros((n_frames * n_slots, feat_dim))
    for b, (g, rec) in enumerate(zip(graphs, target_records)):
        frames = window_frames(rec, sampling)
        for pos, agent in enumerate(g.agent_order):
            slot = b * n_agents + pos
            j = np.asarray(frames[agent], dtype=np.int64) - pred_start
            valid = (j >= 0) & (j < n_frames)
            rows = j[valid] * n_slots + slot
            y_true[rows] = rec.features[agent][valid]
            mask[rows] = 1.0

    return Batch(
        n_records=len(graphs), n_agents=n_agents, n_slots=n_slots,
        n_nodes=len(node_tau),
        node_slot=node_slot, node_feat=node_feat,
        te_nodes=te_matrix(node_tau, d_model),
        counts=np.concatenate(counts).astype(np.float64),
        edge_src=np.concatenate(edge_src), edge_dst=np.concatenate(edge_dst),
        edge_dt_idx=edge_dt_idx, te_table=te_matrix(dt_table, d_model),
        ode_src=np.concatenate(ode_src), ode_dst=np.concatenate(ode_dst),
        n_frames=n_frames, frame_step=1.0 / frames_window,
        y_true=y_true, mask=mask, slot_unscramble=unscramble,
    )
