"""Plain-text `key value` training configuration files."""

from __future__ import annotations

from dataclasses import dataclass, asdict


@dataclass
class TrainSettings:
    dataset: str = ""
    alpha: float = 1.0
    variant: str = "tango"
    epochs: int = 30
    lr: float = 1e-4
    batch: int = 32
    seed: int = 0
    solver_substeps: int = 1
    clip: float = 0.0  # 0 disables clipping

    def clip_or_none(self) -> float | None:
        return self.clip if self.clip > 0 else None


_TYPES = {"dataset": str, "alpha": float, "variant": str, "epochs": int,
          "lr": float, "batch": int, "seed": int, "solver_substeps": int,
          "clip": float}


def write_train_config(path: str, settings: TrainSettings) -> None:
    with open(path, "w") as fh:
        for key, value in asdict(settings).items():
            fh.write(f"{key} {value}\n")


def read_train_config(path: str) -> TrainSettings:
    kv = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition(" ")
            if key not in _TYPES:
                raise ValueError(f"unknown training config key {key!r}")
            kv[key] = _TYPES[key](value.strip())
    return TrainSettings(**kv)
