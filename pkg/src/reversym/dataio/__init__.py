from .records import (
    NormalizationStats,
    SamplingConfig,
    TrajectoryRecord,
    WindowError,
    denormalize,
    mask_observations,
    normalize,
    split_condition_predict,
)
from .store import DatasetMeta, read_dataset, write_dataset
from .generate import GenerationReport, generate_dataset, regenerate_fine_trajectory

__all__ = [
    "NormalizationStats",
    "SamplingConfig",
    "TrajectoryRecord",
    "WindowError",
    "denormalize",
    "mask_observations",
    "normalize",
    "split_condition_predict",
    "DatasetMeta",
    "read_dataset",
    "write_dataset",
    "GenerationReport",
    "generate_dataset",
    "regenerate_fine_trajectory",
]
