"""End-to-end model: encode, integrate forward/reverse, decode."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..diffcore import TensorNode, affine, concat, relu
from .batching import Batch
from .encoder import encode
from .odefunc import integrate_latent
from .params import ModelConfig, ParameterStore


@dataclass
class ModelOutputs:
    """Taped outputs of one batch pass.

    Rows of the stacked decoded tensors are frame-major: row j*S + s is
    slot s at output frame j.  ``y_rev`` is already time-reflected, so row
    j of ``y_rev`` is the reverse trajectory at frame T - j and lines up
    with row j of ``y_fwd``.
    """

    z0: TensorNode
    z_fwd: list
    y_fwd: TensorNode
    z_rev: list = None
    y_rev: TensorNode = None
    z_rev2: list = None
    y_rev2: TensorNode = None


class Model:
    """The trainable network; parameters shared by every pass direction."""

    def __init__(self, config: ModelConfig, params: ParameterStore, substeps: int = 1):
        self.config = config
        self.params = params
        self.substeps = substeps

    def decode(self, z: TensorNode) -> TensorNode:
        p = self.params
        if self.config.dec_layers == 1:
            return affine(z, p["dec_w"], p["dec_b"])
        return affine(relu(affine(z, p["dec_w1"], p["dec_b1"])), p["dec_w2"], p["dec_b2"])

    def encode(self, batch: Batch) -> TensorNode:
        return encode(batch, self.params, self.config)

    def run(self, batch: Batch, need_reverse: bool = False,
            need_rev2: bool = False) -> ModelOutputs:
        z0 = self.encode(batch)
        z_fwd = integrate_latent(z0, batch.n_frames, batch.frame_step,
                                 batch.ode_src, batch.ode_dst, self.params,
                                 substeps=self.substeps)
        y_fwd = self.decode(concat(z_fwd, axis=0))
        out = ModelOutputs(z0=z0, z_fwd=z_fwd, y_fwd=y_fwd)
        if need_reverse:
            # same field, negated step, launched from the forward endpoint;
            # listing frames in reverse order aligns row j with frame T - j
            z_rev = integrate_latent(z_fwd[-1], batch.n_frames, -batch.frame_step,
                                     batch.ode_src, batch.ode_dst, self.params,
                                     substeps=self.substeps)
            out.z_rev = z_rev
            out.y_rev = self.decode(concat(list(reversed(z_rev)), axis=0))
        if need_rev2:
            # launched from the initial latent instead; row j pairs with the
            # forward frame j under time reflection
            z_rev2 = integrate_latent(z0, batch.n_frames, -batch.frame_step,
                                      batch.ode_src, batch.ode_dst, self.params,
                                      substeps=self.substeps)
            out.z_rev2 = z_rev2
            out.y_rev2 = self.decode(concat(z_rev2, axis=0))
        return out

    def predictions(self, outputs: ModelOutputs, batch: Batch) -> np.ndarray:
        """Decoded forward trajectory in the caller's original agent order,
        shaped (n_frames, n_slots, D)."""
        stacked = outputs.y_fwd.data.reshape(batch.n_frames, batch.n_slots, -1)
        return stacked[:, batch.slot_unscramble, :]
