from .losses import (
    LossConfig,
    LossReport,
    VARIANTS,
    loss_gt_rev,
    loss_pred,
    loss_rev2,
    loss_reverse,
)
from .optim import AdamW
from .loop import TrainingDiverged, evaluate, train
from .config import TrainSettings, read_train_config, write_train_config

__all__ = [
    "LossConfig",
    "LossReport",
    "VARIANTS",
    "loss_gt_rev",
    "loss_pred",
    "loss_rev2",
    "loss_reverse",
    "AdamW",
    "TrainingDiverged",
    "evaluate",
    "train",
    "TrainSettings",
    "read_train_config",
    "write_train_config",
]
