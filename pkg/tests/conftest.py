import numpy as np
import pytest

from reversym.dataio.records import SamplingConfig, TrajectoryRecord


def micro_sampling(seed=0, frames=12, ext=12):
    """A tiny sampling grid: `frames` candidate frames per window."""
    return SamplingConfig(dt=0.01, stride=10, obs_count_min=4, obs_count_max=6,
                          train_horizon_steps=frames * 10,
                          test_extension_steps=ext * 10,
                          test_extension_obs=4, seed=seed)


def random_record(rng, n_agents=3, feature_dim=4, sampling=None, traj_id=0,
                  mode="train"):
    """A synthetic record whose observations cover both windows."""
    sampling = sampling or micro_sampling()
    frames_window = sampling.train_frames
    total = frames_window if mode == "train" else frames_window + sampling.extension_frames
    times, feats = [], []
    for _ in range(n_agents):
        k = int(rng.integers(sampling.obs_count_min, sampling.obs_count_max + 1))
        boundary = frames_window // 2 if mode == "train" else frames_window
        first = np.sort(rng.choice(boundary, size=min(k, boundary - 1) or 1,
                                   replace=False))
        second = boundary + np.sort(rng.choice(total - boundary, size=3, replace=False))
        chosen = np.concatenate([first, second])
        times.append(chosen * sampling.frame_dt)
        feats.append(rng.normal(size=(len(chosen), feature_dim)))
    adjacency = np.zeros((n_agents, n_agents))
    for i in range(n_agents):
        for j in range(i + 1, n_agents):
            if rng.random() < 0.7:
                adjacency[i, j] = adjacency[j, i] = 1.0
    if adjacency.sum() == 0 and n_agents > 1:
        adjacency[0, 1] = adjacency[1, 0] = 1.0
    return TrajectoryRecord(traj_id, times, feats, adjacency)


@pytest.fixture
def micro_cfg():
    from reversym.model import ModelConfig

    return ModelConfig(feature_dim=4, d_model=8, n_layers=2, enc_out=4,
                       latent_aug=4, ode_hidden=8, dec_layers=1)
