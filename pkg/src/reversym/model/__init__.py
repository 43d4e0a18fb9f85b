from .params import ModelConfig, ParameterStore, init_params, load_checkpoint, save_checkpoint
from .temporal import temporal_encoding
from .batching import Batch, assemble_batch
from .network import Model

__all__ = [
    "ModelConfig",
    "ParameterStore",
    "init_params",
    "load_checkpoint",
    "save_checkpoint",
    "temporal_encoding",
    "Batch",
    "assemble_batch",
    "Model",
]
