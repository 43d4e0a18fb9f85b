"""Temporal-graph attention encoder producing latent initial states.

Each layer updates node representations with a residual attention sum over
graph neighbors; neighbor representations carry the time encoding of the
edge offset.  A self-attentive pool then collapses each agent's observation
sequence to one vector, which is projected and padded with zero-initialized
augmentation dimensions to form the latent initial state.
"""

from __future__ import annotations

import numpy as np

from ..diffcore import (
    TensorNode,
    add,
    affine,
    concat,
    constant,
    gather,
    gather_add,
    matmul,
    mul,
    relu,
    rowdot,
    scalar_mul,
    scale_rows,
    segment_sum,
    tanh,
)
from .batching import Batch
from .params import ModelConfig, ParameterStore


def attention_layer(h: TensorNode, batch: Batch, te_table: TensorNode,
                    wv: TensorNode, wk: TensorNode, wq: TensorNode) -> TensorNode:
    """h + relu(sum over neighbors of alpha * W_v (h_src + TE)).

    W (h_src + TE) is assembled as (W h)_src + (W TE)_dt: the projections run
    once per node and per distinct time offset instead of once per edge.
    """
    d = h.shape[1]
    hv = matmul(h, wv)
    hk = matmul(h, wk)
    hq = matmul(h, wq)
    te_v = matmul(te_table, wv)
    te_k = matmul(te_table, wk)
    hv_e = gather_add(hv, batch.edge_src, te_v, batch.edge_dt_idx)
    hk_e = gather_add(hk, batch.edge_src, te_k, batch.edge_dt_idx)
    hq_e = gather(hq, batch.edge_dst)
    alpha = scalar_mul(1.0 / np.sqrt(d), rowdot(hk_e, hq_e))
    weighted = scale_rows(hv_e, alpha)
    agg = segment_sum(weighted, batch.edge_dst, batch.n_nodes)
    return add(h, relu(agg))


def sequence_pool(h: TensorNode, batch: Batch, te_nodes: TensorNode, wa: TensorNode,
                  recip: TensorNode) -> TensorNode:
    """Per-agent pooling: score each observation against the tanh-transformed
    mean representation, scale, activate, and average."""
    hhat = add(h, te_nodes)
    mean_rep = mul(recip, segment_sum(hhat, batch.node_slot, batch.n_slots))
    a = tanh(matmul(mean_rep, wa))
    a_nodes = gather(a, batch.node_slot)
    score = rowdot(a_nodes, hhat)
    activated = relu(scale_rows(hhat, score))
    return mul(recip, segment_sum(activated, batch.node_slot, batch.n_slots))


def encode(batch: Batch, params: ParameterStore, config: ModelConfig) -> TensorNode:
    """Latent initial states (n_slots x latent); augmented dims exactly zero."""
    d = config.d_model
    te_table = constant(batch.te_table)
    te_nodes = constant(batch.te_nodes)
    recip = constant(np.repeat(1.0 / batch.counts[:, None], d, axis=1))

    x = constant(batch.node_feat)
    h = affine(x, params["emb_w"], params["emb_b"])
    for layer in range(config.n_layers):
        h = attention_layer(h, batch, te_table,
                            params[f"attn{layer}_wv"], params[f"attn{layer}_wk"],
                            params[f"attn{layer}_wq"])
    pooled = sequence_pool(h, batch, te_nodes, params["pool_wa"], recip)
    z_obs = affine(pooled, params["enc_out_w"], params["enc_out_b"])
    zeros = constant(np.zeros((batch.n_slots, config.latent_aug)))
    return concat([z_obs, zeros], axis=1)
