"""Dataset records, sampling configuration, and observation-level transforms."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..seeding import rng_for


class WindowError(ValueError):
    """A record does not span the required conditioning/target windows."""


@dataclass
class SamplingConfig:
    """How fine trajectories are thinned into irregular observations.

    Candidate frames sit every ``stride`` fine steps; each agent draws its
    observation count uniformly from [obs_count_min, obs_count_max] over the
    training window, and test records add ``test_extension_obs`` draws from
    the extension window.
    """

    dt: float = 0.001
    stride: int = 100
    obs_count_min: int = 40
    obs_count_max: int = 52
    train_horizon_steps: int = 6000
    test_extension_steps: int = 6000
    test_extension_obs: int = 40
    seed: int = 0

    def __post_init__(self):
        if self.stride < 1:
            raise ValueError(f"stride must be >= 1, got {self.stride}")
        if self.obs_count_min > self.obs_count_max:
            raise ValueError("obs_count_min must not exceed obs_count_max")
        if self.train_horizon_steps % self.stride != 0:
            raise ValueError("train_horizon_steps must be a multiple of stride")
        if self.test_extension_steps % self.stride != 0:
            raise ValueError("test_extension_steps must be a multiple of stride")

    @property
    def train_frames(self) -> int:
        return self.train_horizon_steps // self.stride

    @property
    def extension_frames(self) -> int:
        return self.test_extension_steps // self.stride

    @property
    def frame_dt(self) -> float:
        return self.dt * self.stride


@dataclass
class TrajectoryRecord:
    """Per-agent irregular observations plus the interaction graph.

    ``times[i]`` is strictly increasing; ``features[i]`` has one row per
    observation.  Timestamps are raw simulation times.
    """

    traj_id: int
    times: list = field(default_factory=list)      # per agent (K_i,)
    features: list = field(default_factory=list)   # per agent (K_i, D)
    adjacency: np.ndarray = None

    def __post_init__(self):
        self.times = [np.asarray(t, dtype=np.float64) for t in self.times]
        self.features = [np.asarray(f, dtype=np.float64) for f in self.features]
        if self.adjacency is not None:
            self.adjacency = np.asarray(self.adjacency, dtype=np.float64)
        for i, t in enumerate(self.times):
            if len(t) > 1 and np.any(np.diff(t) <= 0):
                raise ValueError(f"agent {i}: timestamps must be strictly increasing")

    @property
    def n_agents(self) -> int:
        return len(self.times)

    @property
    def feature_dim(self) -> int:
        return self.features[0].shape[1] if self.features else 0

    def frame_indices(self, frame_dt: float) -> list:
        return [np.rint(t / frame_dt).astype(np.intp) for t in self.times]


@dataclass
class NormalizationStats:
    """Per-dimension max absolute value over train + test observations."""

    max_abs: np.ndarray

    def __post_init__(self):
        self.max_abs = np.asarray(self.max_abs, dtype=np.float64)
        if np.any(self.max_abs <= 0):
            bad = int(np.argmin(self.max_abs))
            raise ValueError(f"max-abs must be strictly positive, dimension {bad} is "
                             f"{self.max_abs[bad]}")

    @staticmethod
    def from_records(records: list) -> "NormalizationStats":
        stacked = np.concatenate([f for r in records for f in r.features], axis=0)
        return NormalizationStats(np.abs(stacked).max(axis=0))


def _rescaled(record: TrajectoryRecord, factors: np.ndarray) -> TrajectoryRecord:
    return TrajectoryRecord(
        traj_id=record.traj_id,
        times=[t.copy() for t in record.times],
        features=[f * factors for f in record.features],
        adjacency=None if record.adjacency is None else record.adjacency.copy(),
    )


def normalize(records: list, stats: NormalizationStats) -> list:
    """Divide every feature dimension by its max-abs."""
    return [_rescaled(r, 1.0 / stats.max_abs) for r in records]


def denormalize(records: list, stats: NormalizationStats) -> list:
    return [_rescaled(r, stats.max_abs) for r in records]


def split_condition_predict(record: TrajectoryRecord, mode: str,
                            sampling: SamplingConfig) -> tuple[TrajectoryRecord, TrajectoryRecord]:
    """Split a record into (conditioning window, target window).

    Training conditions on the first half of the training window and
    predicts the second half; testing conditions on the whole training
    window and predicts the extension window.  Every agent must have at
    least one observation in each window.
    """
    if mode not in ("train", "test"):
        raise ValueError(f"mode must be 'train' or 'test', got {mode!r}")
    frames = record.frame_indices(sampling.frame_dt)
    if mode == "train":
        boundary = sampling.train_frames // 2
        horizon = sampling.train_frames
    else:
        boundary = sampling.train_frames
        horizon = sampling.train_frames + sampling.extension_frames
    cond_times, cond_feats, tgt_times, tgt_feats = [], [], [], []
    for i in range(record.n_agents):
        f = frames[i]
        span = int(f.max()) + 1 if len(f) else 0
        in_cond = f < boundary
        in_tgt = (f >= boundary) & (f < horizon)
        if not in_cond.any() or not in_tgt.any():
            raise WindowError(
                f"agent {i}: record spans {span} frames but windows need observations "
                f"in [0, {boundary}) and [{boundary}, {horizon})")
        cond_times.append(record.times[i][in_cond])
        cond_feats.append(record.features[i][in_cond])
        tgt_times.append(record.times[i][in_tgt])
        tgt_feats.append(record.features[i][in_tgt])
    cond = TrajectoryRecord(record.traj_id, cond_times, cond_feats, record.adjacency)
    target = TrajectoryRecord(record.traj_id, tgt_times, tgt_feats, record.adjacency)
    return cond, target


def mask_observations(record: TrajectoryRecord, ratio: float, seed: int) -> TrajectoryRecord:
    """Retain ceil(ratio * n) observations per agent, uniformly, order kept."""
    if not 0.0 < ratio <= 1.0:
        raise ValueError(f"ratio must be in (0, 1], got {ratio}")
    if ratio == 1.0:
        return record
    times, feats = [], []
    for i in range(record.n_agents):
        n = len(record.times[i])
        keep = int(np.ceil(ratio * n))
        rng = rng_for(seed, "mask", record.traj_id, i)
        chosen = np.sort(rng.choice(n, size=keep, replace=False))
        times.append(record.times[i][chosen])
        feats.append(record.features[i][chosen])
    return TrajectoryRecord(record.traj_id, times, feats, record.adjacency)
