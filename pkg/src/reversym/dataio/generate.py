"""Trajectory generation: simulate fine, subsample, normalize, write.

Springs integrate with Euler at dt = 0.001, the pendulum with RK4 at
dt = 0.0001; candidate frames sit every `stride` fine steps.  Initial
spring positions/momenta are zero-mean Gaussians (sigma 2 and 1), pendulum
angles are uniform in (-pi, pi) with momenta zero.  Interaction graphs are
sampled with independent edge probability `edge_prob` and resampled while
the graph has no edges at all; the pendulum graph is the fixed stick chain.
A trajectory that diverges is discarded and redrawn with a fresh initial
condition, counted in the generation report.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..seeding import rng_for
from .records import NormalizationStats, SamplingConfig, TrajectoryRecord, normalize
from .store import DatasetMeta, write_dataset

_MAX_ATTEMPTS = 20

SPRING_SYSTEMS = {"simple-spring": "simple", "forced-spring": "forced",
                  "damped-spring": "damped"}

DEFAULT_PHYSICS = {
    "simple-spring": {"m": 1.0, "k": 0.1},
    "forced-spring": {"m": 1.0, "k": 0.1, "k1": 10.0, "omega": 1.0},
    "damped-spring": {"m": 1.0, "k": 0.1, "gamma": 10.0},
    "pendulum": {"m": 1.0, "l": 1.0, "g": 9.8},
}

DEFAULT_DT = {"simple-spring": 0.001, "forced-spring": 0.001,
              "damped-spring": 0.001, "pendulum": 0.0001}


@dataclass
class GenerationReport:
    regenerated: int = 0


def default_sampling(system: str, seed: int = 0, **overrides) -> SamplingConfig:
    kw = {"dt": DEFAULT_DT[system], "seed": seed}
    kw.update(overrides)
    return SamplingConfig(**kw)


def _spring_initial(rng: np.random.Generator, n: int) -> tuple[np.ndarray, np.ndarray]:
    return 0.8 * rng.standard_normal((n, 2)), 0.25 * rng.standard_normal((n, 2))


def _pendulum_initial(rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    return rng.uniform(-np.pi, np.pi, size=(3, 1)), np.zeros((3, 1))


def _sample_adjacency(rng: np.random.Generator, n: int, edge_prob: float) -> np.ndarray:
    for _ in range(_MAX_ATTEMPTS):
        upper = np.triu(rng.random((n, n)) < edge_prob, k=1).astype(np.float64)
        adj = upper + upper.T
        if adj.sum() > 0 or n == 1:
            return adj
    raise RuntimeError("could not sample a graph with at least one edge")


def _chain_adjacency(n: int) -> np.ndarray:
    adj = np.zeros((n, n))
    for i in range(n - 1):
        adj[i, i + 1] = adj[i + 1, i] = 1.0
    return adj


def _simulate_springs(q0: np.ndarray, p0: np.ndarray, adj: np.ndarray,
                      physics: dict, variant: str, dt: float,
                      n_steps: int, stride: int) -> tuple[np.ndarray, np.ndarray]:
    """Batched Euler integration; returns (frames, alive) with frames of
    shape (B, F, N, 4) holding q then p, F = n_steps // stride."""
    m, k = physics["m"], physics["k"]
    q = q0.copy()
    p = p0.copy()
    deg = adj.sum(axis=2)[..., None]
    n_frames = n_steps // stride
    batch = q0.shape[0]
    frames = np.zeros((batch, n_frames, q0.shape[1], 4))
    alive = np.ones(batch, dtype=bool)
    for step in range(n_steps):
        if step % stride == 0:
            frame = step // stride
            frames[:, frame, :, :2] = q
            frames[:, frame, :, 2:] = p
            with np.errstate(invalid="ignore"):
                alive &= np.isfinite(frames[:, frame]).all(axis=(1, 2))
        t = step * dt
        dq = p / m
        dp = -k * (deg * q - np.einsum("bij,bjd->bid", adj, q))
        if variant == "forced":
            dp = dp - physics["k1"] * np.cos(physics["omega"] * t)
        elif variant == "damped":
            dp = dp - physics["gamma"] * p / m
        with np.errstate(over="ignore", invalid="ignore"):
            q = q + dt * dq
            p = p + dt * dp
    return frames, alive


def _simulate_pendulum(q0: np.ndarray, p0: np.ndarray, physics: dict,
                       dt: float, n_steps: int, stride: int) -> tuple[np.ndarray, np.ndarray]:
    """Batched RK4 for the triple pendulum; frames (B, F, 3, 2) hold
    (theta, p) per stick."""
    from ..physics.pendulum import PendulumSpec, angular_velocities, momentum_derivatives

    spec = PendulumSpec(m=physics["m"], l=physics["l"], g=physics["g"])
    theta = q0[:, :, 0].copy()
    p = p0[:, :, 0].copy()
    n_frames = n_steps // stride
    batch = q0.shape[0]
    frames = np.zeros((batch, n_frames, 3, 2))
    alive = np.ones(batch, dtype=bool)

    def deriv(th, pm):
        w = angular_velocities(th, pm, spec)
        return w, momentum_derivatives(th, w, spec)

    for step in range(n_steps):
        if step % stride == 0:
            frame = step // stride
            frames[:, frame, :, 0] = theta
            frames[:, frame, :, 1] = p
            with np.errstate(invalid="ignore"):
                alive &= np.isfinite(frames[:, frame]).all(axis=(1, 2))
        with np.errstate(over="ignore", invalid="ignore"):
            k1t, k1p = deriv(theta, p)
            k2t, k2p = deriv(theta + 0.5 * dt * k1t, p + 0.5 * dt * k1p)
            k3t, k3p = deriv(theta + 0.5 * dt * k2t, p + 0.5 * dt * k2p)
            k4t, k4p = deriv(theta + dt * k3t, p + dt * k3p)
            theta = theta + (dt / 6.0) * (k1t + 2 * k2t + 2 * k3t + k4t)
            p = p + (dt / 6.0) * (k1p + 2 * k2p + 2 * k3p + k4p)
    return frames, alive


def _draw_conditions(system: str, n_agents: int, sampling: SamplingConfig,
                     traj_ids: list, attempts: dict, edge_prob: float):
    q0s, p0s, adjs = [], [], []
    for tid in traj_ids:
        rng = rng_for(sampling.seed, "traj", tid, attempts.get(tid, 0))
        if system == "pendulum":
            adjs.append(_chain_adjacency(3))
            q0, p0 = _pendulum_initial(rng)
        else:
            adjs.append(_sample_adjacency(rng, n_agents, edge_prob))
            q0, p0 = _spring_initial(rng, n_agents)
        q0s.append(q0)
        p0s.append(p0)
    return np.stack(q0s), np.stack(p0s), np.stack(adjs)


def _simulate_batch(system: str, n_agents: int, physics: dict, sampling: SamplingConfig,
                    traj_ids: list, n_steps: int, edge_prob: float) -> tuple[dict, dict, int]:
    """Simulate a set of trajectories batched, redrawing diverged ones.

    Returns ({traj_id: frames (F, N, D_obs)}, {traj_id: adjacency}, redraws).
    Elementwise vectorization keeps each trajectory bitwise identical to a
    single-trajectory run of the same code path."""
    frames_out: dict[int, np.ndarray] = {}
    adj_out: dict[int, np.ndarray] = {}
    attempts: dict[int, int] = {tid: 0 for tid in traj_ids}
    pending = list(traj_ids)
    redraws = 0
    while pending:
        if max(attempts[t] for t in pending) >= _MAX_ATTEMPTS:
            raise RuntimeError(f"trajectories {pending} kept diverging")
        q0, p0, adj = _draw_conditions(system, n_agents, sampling, pending,
                                       attempts, edge_prob)
        if system == "pendulum":
            frames, alive = _simulate_pendulum(q0, p0, physics, sampling.dt,
                                               n_steps, sampling.stride)
        else:
            frames, alive = _simulate_springs(q0, p0, adj, physics,
                                              SPRING_SYSTEMS[system], sampling.dt,
                                              n_steps, sampling.stride)
        still = []
        for b, tid in enumerate(pending):
            if alive[b]:
                frames_out[tid] = frames[b]
                adj_out[tid] = adj[b]
            else:
                attempts[tid] += 1
                redraws += 1
                still.append(tid)
        pending = still
    return frames_out, adj_out, redraws


def _sample_observations(frames: np.ndarray, sampling: SamplingConfig,
                         traj_id: int, is_test: bool) -> tuple[list, list]:
    """Irregular per-agent subsampling of the candidate frames."""
    n_agents = frames.shape[1]
    frame_dt = sampling.frame_dt
    times, feats = [], []
    for agent in range(n_agents):
        rng = rng_for(sampling.seed, "obs", traj_id, agent)
        n = int(rng.integers(sampling.obs_count_min, sampling.obs_count_max + 1))
        chosen = np.sort(rng.choice(sampling.train_frames, size=n, replace=False))
        if is_test:
            ext = np.sort(rng.choice(sampling.extension_frames,
                                     size=sampling.test_extension_obs, replace=False))
            chosen = np.concatenate([chosen, sampling.train_frames + ext])
        times.append(chosen * frame_dt)
        feats.append(frames[chosen, agent, :])
    return times, feats


def generate_dataset(system: str, n_agents: int, sampling: SamplingConfig,
                     n_train: int, n_test: int, out_dir: str | None = None,
                     edge_prob: float = 0.5,
                     physics: dict | None = None) -> tuple[DatasetMeta, list, GenerationReport]:
    """Build (and optionally write) a dataset of normalized irregular records."""
    if system == "pendulum":
        n_agents = 3
    phys = dict(DEFAULT_PHYSICS[system])
    if physics:
        phys.update(physics)
    report = GenerationReport()
    records = []
    train_steps = sampling.train_horizon_steps
    total_steps = train_steps + sampling.test_extension_steps
    train_ids = list(range(n_train))
    test_ids = list(range(n_train, n_train + n_test))
    frames_map: dict[int, np.ndarray] = {}
    adj_map: dict[int, np.ndarray] = {}
    if train_ids:
        f, a, redraws = _simulate_batch(system, n_agents, phys, sampling,
                                        train_ids, train_steps, edge_prob)
        frames_map.update(f)
        adj_map.update(a)
        report.regenerated += redraws
    if test_ids:
        f, a, redraws = _simulate_batch(system, n_agents, phys, sampling,
                                        test_ids, total_steps, edge_prob)
        frames_map.update(f)
        adj_map.update(a)
        report.regenerated += redraws
    for traj_id in range(n_train + n_test):
        is_test = traj_id >= n_train
        times, feats = _sample_observations(frames_map[traj_id], sampling, traj_id, is_test)
        records.append(TrajectoryRecord(traj_id, times, feats, adj_map[traj_id]))
    stats = NormalizationStats.from_records(records)
    records = normalize(records, stats)
    meta = DatasetMeta(
        system=system,
        n_agents=n_agents,
        feature_dim=records[0].feature_dim,
        sampling=sampling,
        n_train=n_train,
        n_test=n_test,
        edge_prob=edge_prob,
        physics=phys,
        norm_max_abs=stats.max_abs,
        regenerated=report.regenerated,
    )
    if out_dir is not None:
        write_dataset(out_dir, meta, records)
    return meta, records, report


def regenerate_fine_trajectory(meta: DatasetMeta, traj_id: int) -> tuple[np.ndarray, np.ndarray]:
    """Reproduce the fine-grained frames (F, N, D) and adjacency of one
    trajectory from the dataset meta alone (used for energy references)."""
    sampling = meta.sampling
    is_test = traj_id >= meta.n_train
    n_steps = sampling.train_horizon_steps + (sampling.test_extension_steps if is_test else 0)
    frames, adj, _ = _simulate_batch(meta.system, meta.n_agents, meta.physics, sampling,
                                     [traj_id], n_steps, meta.edge_prob)
    return frames[traj_id], adj[traj_id]
