"""Sinusoidal time encoding and temporal-graph construction.

Observations of one trajectory fuse into a graph whose nodes are
(agent, timestamp) pairs.  Temporal edges connect every ordered pair of one
agent's observations (a per-agent clique); spatial edges connect distinct
agents at shared timestamps where the interaction graph has an edge.  Each
edge carries the time offset t_src - t_dst feeding the time encoding.

Agents are re-ordered canonically (lexicographically by their observation
bytes) before any arrays are built, so relabeling the agents changes
nothing downstream bit for bit; outputs are mapped back through the
recorded inverse permutation.  This is what makes the model's
permutation equivariance exact rather than within-roundoff.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def temporal_encoding(delta_t: float, d: int) -> np.ndarray:
    """TE(dt)[2i] = sin(dt / 10000^(2i/d)); TE(dt)[2i+1] = cos(same)."""
    if d % 2 != 0:
        raise ValueError(f"time-encoding dimension must be even, got {d}")
    return te_matrix(np.array([float(delta_t)]), d)[0]


def te_matrix(delta_ts: np.ndarray, d: int) -> np.ndarray:
    if d % 2 != 0:
        raise ValueError(f"time-encoding dimension must be even, got {d}")
    half = np.arange(d // 2)
    scale = np.power(10000.0, 2.0 * half / d)
    angles = np.asarray(delta_ts, dtype=np.float64)[:, None] / scale[None, :]
    out = np.empty((len(angles), d))
    out[:, 0::2] = np.sin(angles)
    out[:, 1::2] = np.cos(angles)
    return out


def canonical_agent_order(times: list, features: list) -> np.ndarray:
    """Agent order keyed by observation data, invariant to relabeling."""
    keys = [(len(t), t.tobytes(), f.tobytes()) for t, f in zip(times, features)]
    return np.array(sorted(range(len(keys)), key=keys.__getitem__), dtype=np.intp)


@dataclass
class RecordGraph:
    """One trajectory's observation graph in canonical agent order."""

    n_agents: int
    agent_order: np.ndarray      # canonical position -> original agent
    counts: np.ndarray           # obs per canonical agent
    node_tau: np.ndarray
    node_feat: np.ndarray        # (n_nodes, D)
    node_agent: np.ndarray       # canonical agent index per node
    edge_src: np.ndarray
    edge_dst: np.ndarray
    edge_dt: np.ndarray          # tau_src - tau_dst per edge
    ode_src: np.ndarray          # directed interaction edges between agents
    ode_dst: np.ndarray


def build_record_graph(times: list, features: list, frames: list,
                       adjacency: np.ndarray, pred_start: int,
                       frames_per_window: int) -> RecordGraph:
    """Fuse one conditioning window into a RecordGraph.

    ``frames`` are integer frame indices per agent; normalized time is
    (frame - pred_start) / frames_per_window, negative inside the window.
    """
    n = len(times)
    order = canonical_agent_order(times, features)
    frames_c = [np.asarray(frames[a], dtype=np.int64) for a in order]
    feats_c = [features[a] for a in order]
    adj_c = adjacency[np.ix_(order, order)]
    counts = np.array([len(f) for f in frames_c], dtype=np.intp)
    if np.any(counts == 0):
        empty = int(np.argmin(counts))
        raise ValueError(f"agent {order[empty]} has no observations in the "
                         "conditioning window; the encoder requires at least one")
    offsets = np.concatenate(([0], np.cumsum(counts)[:-1]))
    node_frame = np.concatenate(frames_c)
    node_tau = (node_frame - pred_start) / float(frames_per_window)
    node_feat = np.concatenate(feats_c, axis=0)
    node_agent = np.repeat(np.arange(n, dtype=np.intp), counts)

    src_parts, dst_parts = [], []
    # temporal clique within each agent
    for a in range(n):
        k = counts[a]
        if k > 1:
            ids = offsets[a] + np.arange(k, dtype=np.intp)
            grid_src = np.repeat(ids, k)
            grid_dst = np.tile(ids, k)
            keep = grid_src != grid_dst
            src_parts.append(grid_src[keep])
            dst_parts.append(grid_dst[keep])
    # spatial edges between interacting agents at shared frames
    for i in range(n):
        for j in range(n):
            if i == j or adj_c[i, j] == 0:
                continue
            shared, ii, jj = np.intersect1d(frames_c[i], frames_c[j],
                                            return_indices=True)
            if len(shared):
                src_parts.append(offsets[i] + ii.astype(np.intp))
                dst_parts.append(offsets[j] + jj.astype(np.intp))
    if src_parts:
        src = np.concatenate(src_parts)
        dst = np.concatenate(dst_parts)
        order_e = np.lexsort((src, dst))
        src, dst = src[order_e], dst[order_e]
    else:
        src = dst = np.zeros(0, dtype=np.intp)
    edge_dt = node_tau[src] - node_tau[dst]

    oi, oj = np.nonzero(adj_c)
    ode_order = np.lexsort((oi, oj))
    return RecordGraph(
        n_agents=n, agent_order=order, counts=counts,
        node_tau=node_tau, node_feat=node_feat, node_agent=node_agent,
        edge_src=src, edge_dst=dst, edge_dt=edge_dt,
        ode_src=oi[ode_order].astype(np.intp), ode_dst=oj[ode_order].astype(np.intp),
    )
