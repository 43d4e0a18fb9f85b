"""Model configuration, parameter registry, and checkpoint serialization."""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from ..diffcore import TensorNode, parameter
from ..seeding import rng_for


@dataclass
class ModelConfig:
    feature_dim: int
    d_model: int = 64
    n_layers: int = 2
    enc_out: int = 16
    latent_aug: int = 64
    ode_hidden: int = 128
    dec_layers: int = 1
    dec_hidden: int = 64

    def __post_init__(self):
        if self.d_model % 2 != 0:
            raise ValueError("d_model must be even for the sinusoidal time encoding")
        if self.dec_layers not in (1, 2):
            raise ValueError("decoder depth must be 1 or 2")

    @property
    def latent(self) -> int:
        return self.enc_out + self.latent_aug

    def to_dict(self) -> dict:
        return {
            "feature_dim": self.feature_dim,
            "d_model": self.d_model,
            "n_layers": self.n_layers,
            "enc_out": self.enc_out,
            "latent_aug": self.latent_aug,
            "ode_hidden": self.ode_hidden,
            "dec_layers": self.dec_layers,
            "dec_hidden": self.dec_hidden,
        }


class ParameterStore:
    """Named, ordered registry of trainable tensors."""

    def __init__(self):
        self._order: list[str] = []
        self._by_name: dict[str, TensorNode] = {}

    def register(self, name: str, data: np.ndarray) -> TensorNode:
        if name in self._by_name:
            raise ValueError(f"duplicate parameter name {name!r}")
        node = parameter(data, name=name)
        self._order.append(name)
        self._by_name[name] = node
        return node

    def __getitem__(self, name: str) -> TensorNode:
        return self._by_name[name]

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    def __len__(self) -> int:
        return len(self._order)

    @property
    def names(self) -> list[str]:
        return list(self._order)

    def nodes(self) -> list[TensorNode]:
        return [self._by_name[n] for n in self._order]

    def n_values(self) -> int:
        return sum(self._by_name[n].size for n in self._order)

    def copy(self) -> "ParameterStore":
        out = ParameterStore()
        for name in self._order:
            out.register(name, self._by_name[name].data.copy())
        return out

    def load_values(self, other: "ParameterStore") -> None:
        if other.names != self.names:
            raise ValueError("parameter registries do not match")
        for name in self._order:
            self._by_name[name].data[...] = other[name].data


def _uniform(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int) -> np.ndarray:
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape)


def init_params(config: ModelConfig, seed: int) -> ParameterStore:
    """Fan-in uniform init; the final ODE edge/node layers start at zero so
    the initial latent flow is the identity."""
    rng = rng_for(seed, "params")
    p = ParameterStore()
    d, latent, hidden = config.d_model, config.latent, config.ode_hidden

    p.register("emb_w", _uniform(rng, (config.feature_dim, d), config.feature_dim))
    p.register("emb_b", np.zeros(d))
    for layer in range(config.n_layers):
        for name in ("wv", "wk", "wq"):
            p.register(f"attn{layer}_{name}", _uniform(rng, (d, d), d))
    p.register("pool_wa", _uniform(rng, (d, d), d))
    p.register("enc_out_w", _uniform(rng, (d, config.enc_out), d))
    p.register("enc_out_b", np.zeros(config.enc_out))

    p.register("edge_w1a", _uniform(rng, (latent, hidden), 2 * latent))
    p.register("edge_w1b", _uniform(rng, (latent, hidden), 2 * latent))
    p.register("edge_b1", np.zeros(hidden))
    p.register("edge_w2", np.zeros((hidden, hidden)))
    p.register("edge_b2", np.zeros(hidden))
    p.register("node_w1a", _uniform(rng, (latent, hidden), latent + hidden))
    p.register("node_w1b", _uniform(rng, (hidden, hidden), latent + hidden))
    p.register("node_b1", np.zeros(hidden))
    p.register("node_w2", np.zeros((hidden, latent)))
    p.register("node_b2", np.zeros(latent))

    if config.dec_layers == 1:
        p.register("dec_w", _uniform(rng, (latent, config.feature_dim), latent))
        p.register("dec_b", np.zeros(config.feature_dim))
    else:
        p.register("dec_w1", _uniform(rng, (latent, config.dec_hidden), latent))
        p.register("dec_b1", np.zeros(config.dec_hidden))
        p.register("dec_w2", _uniform(rng, (config.dec_hidden, config.feature_dim),
                                      config.dec_hidden))
        p.register("dec_b2", np.zeros(config.feature_dim))
    return p


def config_from_params(params: ParameterStore) -> ModelConfig:
    """Rebuild the architecture hyperparameters from tensor shapes."""
    feature_dim, d_model = params["emb_w"].shape
    n_layers = sum(1 for name in params.names if name.endswith("_wv"))
    enc_out = params["enc_out_w"].shape[1]
    latent = params["node_w2"].shape[1]
    ode_hidden = params["edge_b1"].shape[0]
    if "dec_w" in params:
        dec_layers, dec_hidden = 1, 64
    else:
        dec_layers, dec_hidden = 2, params["dec_w1"].shape[1]
    return ModelConfig(feature_dim=feature_dim, d_model=d_model, n_layers=n_layers,
                       enc_out=enc_out, latent_aug=latent - enc_out,
                       ode_hidden=ode_hidden, dec_layers=dec_layers,
                       dec_hidden=dec_hidden)


_MAGIC = b"REVERSYM-CKPT 1\n"


def save_checkpoint(path: str, params: ParameterStore) -> None:
    """Plain binary: ASCII header naming each tensor and its shape, then the
    values as 64-bit little-endian floats in registry order."""
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(f"{len(params)}\n".encode())
        for name in params.names:
            node = params[name]
            dims = " ".join(str(s) for s in node.shape)
            fh.write(f"{name} {node.data.ndim} {dims}".rstrip().encode() + b"\n")
        fh.write(b"END\n")
        for name in params.names:
            fh.write(struct.pack(f"<{params[name].size}d", *params[name].values))


def load_checkpoint(path: str) -> ParameterStore:
    with open(path, "rb") as fh:
        if fh.read(len(_MAGIC)) != _MAGIC:
            raise ValueError(f"{path}: not a checkpoint file")
        n = int(fh.readline())
        entries = []
        for _ in range(n):
            parts = fh.readline().decode().split()
            name, ndim = parts[0], int(parts[1])
            shape = tuple(int(v) for v in parts[2:2 + ndim])
            entries.append((name, shape))
        if fh.readline() != b"END\n":
            raise ValueError(f"{path}: corrupt checkpoint header")
        store = ParameterStore()
        for name, shape in entries:
            count = int(np.prod(shape)) if shape else 1
            raw = fh.read(8 * count)
            values = np.frombuffer(raw, dtype="<f8").reshape(shape)
            store.register(name, values.astype(np.float64))
    return store
