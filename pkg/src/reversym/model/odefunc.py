"""GNN vector field for the latent ODE and its fixed-step integration.

Messages flow along directed interaction edges: m_ij = EdgeMLP([z_i, z_j]);
each agent's derivative is NodeMLP([z_j, sum_i m_ij]).  Integration is RK4
with one step per output frame; the reverse trajectory integrates the same
field with a negated step, which is arithmetically identical to negating
the field.
"""

from __future__ import annotations

import numpy as np

from ..diffcore import TensorNode, add, affine, affine_pair, gather, relu, scalar_mul, segment_sum
from .params import ParameterStore


def ode_func(z: TensorNode, ode_src: np.ndarray, ode_dst: np.ndarray,
             n_slots: int, params: ParameterStore) -> TensorNode:
    zi = gather(z, ode_src)
    zj = gather(z, ode_dst)
    hidden = relu(affine_pair(zi, params["edge_w1a"], zj, params["edge_w1b"],
                              params["edge_b1"]))
    messages = affine(hidden, params["edge_w2"], params["edge_b2"])
    agg = segment_sum(messages, ode_dst, n_slots)
    hidden_n = relu(affine_pair(z, params["node_w1a"], agg, params["node_w1b"],
                                params["node_b1"]))
    return affine(hidden_n, params["node_w2"], params["node_b2"])


def integrate_latent(z0: TensorNode, n_frames: int, step: float,
                     ode_src: np.ndarray, ode_dst: np.ndarray,
                     params: ParameterStore, substeps: int = 1) -> list:
    """RK4 rollout; returns n_frames states starting with z0 exactly.

    ``step`` is the inter-frame time and may be negative (reverse-time
    integration of the same field); ``substeps`` breaks it into that many
    internal RK4 steps.
    """
    if substeps < 1:
        raise ValueError(f"substeps must be >= 1, got {substeps}")
    n_slots = z0.shape[0]
    h = step / substeps

    def f(z):
        return ode_func(z, ode_src, ode_dst, n_slots, params)

    frames = [z0]
    z = z0
    for _ in range(n_frames - 1):
        for _ in range(substeps):
            k1 = f(z)
            k2 = f(add(z, scalar_mul(0.5 * h, k1)))
            k3 = f(add(z, scalar_mul(0.5 * h, k2)))
            k4 = f(add(z, scalar_mul(h, k3)))
            incr = add(add(k1, scalar_mul(2.0, k2)), add(scalar_mul(2.0, k3), k4))
            z = add(z, scalar_mul(h / 6.0, incr))
        frames.append(z)
        if not np.all(np.isfinite(z.data)):
            raise FloatingPointError(
                f"latent state diverged at output frame {len(frames) - 1}")
    return frames
