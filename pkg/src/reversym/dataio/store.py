"""On-disk dataset format: a directory with `meta`, `trajectories`, `adjacency`.

meta          plain-text `key value` lines; frozen key list below.
trajectories  one observation per line:
                  traj_id agent_id timestamp f1 f2 ... fD
              space separated, floats with 17 significant digits, ordered by
              (traj_id, agent_id, timestamp).
adjacency     one line per trajectory in ascending traj_id order: the
              row-major 0/1 interaction matrix, space separated.

Frozen meta keys:
    format_version system n_agents feature_dim variant
    m k k1 omega gamma l g
    dt stride obs_count_min obs_count_max
    train_horizon_steps test_extension_steps test_extension_obs
    n_train n_test seed edge_prob regenerated
    norm_max_abs   (feature_dim floats, space separated)
Keys that do not apply to a system (e.g. `gamma` for the pendulum) are
omitted.  The format is diffable and bit-exact at float64.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .records import NormalizationStats, SamplingConfig, TrajectoryRecord

FORMAT_VERSION = 1

SYSTEMS = ("simple-spring", "forced-spring", "damped-spring", "pendulum")


def fmt(x: float) -> str:
    return f"{float(x):.17g}"


@dataclass
class DatasetMeta:
    system: str
    n_agents: int
    feature_dim: int
    sampling: SamplingConfig
    n_train: int
    n_test: int
    edge_prob: float = 0.5
    physics: dict = field(default_factory=dict)  # m/k/k1/omega/gamma or m/l/g
    norm_max_abs: np.ndarray = None
    regenerated: int = 0

    def __post_init__(self):
        if self.system not in SYSTEMS:
            raise ValueError(f"system must be one of {SYSTEMS}, got {self.system!r}")
        if self.norm_max_abs is not None:
            self.norm_max_abs = np.asarray(self.norm_max_abs, dtype=np.float64)

    @property
    def stats(self) -> NormalizationStats:
        return NormalizationStats(self.norm_max_abs)

    @property
    def seed(self) -> int:
        return self.sampling.seed


def _meta_lines(meta: DatasetMeta) -> list[str]:
    s = meta.sampling
    lines = [
        f"format_version {FORMAT_VERSION}",
        f"system {meta.system}",
        f"n_agents {meta.n_agents}",
        f"feature_dim {meta.feature_dim}",
    ]
    for key in ("m", "k", "k1", "omega", "gamma", "l", "g"):
        if key in meta.physics:
            lines.append(f"{key} {fmt(meta.physics[key])}")
    lines += [
        f"dt {fmt(s.dt)}",
        f"stride {s.stride}",
        f"obs_count_min {s.obs_count_min}",
        f"obs_count_max {s.obs_count_max}",
        f"train_horizon_steps {s.train_horizon_steps}",
        f"test_extension_steps {s.test_extension_steps}",
        f"test_extension_obs {s.test_extension_obs}",
        f"n_train {meta.n_train}",
        f"n_test {meta.n_test}",
        f"seed {s.seed}",
        f"edge_prob {fmt(meta.edge_prob)}",
        f"regenerated {meta.regenerated}",
        "norm_max_abs " + " ".join(fmt(v) for v in meta.norm_max_abs),
    ]
    return lines


def _parse_meta(text: str) -> DatasetMeta:
    kv: dict[str, str] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        key, _, value = line.partition(" ")
        kv[key] = value
    version = int(kv["format_version"])
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported dataset format version {version}")
    sampling = SamplingConfig(
        dt=float(kv["dt"]),
        stride=int(kv["stride"]),
        obs_count_min=int(kv["obs_count_min"]),
        obs_count_max=int(kv["obs_count_max"]),
        train_horizon_steps=int(kv["train_horizon_steps"]),
        test_extension_steps=int(kv["test_extension_steps"]),
        test_extension_obs=int(kv["test_extension_obs"]),
        seed=int(kv["seed"]),
    )
    physics = {key: float(kv[key])
               for key in ("m", "k", "k1", "omega", "gamma", "l", "g") if key in kv}
    return DatasetMeta(
        system=kv["system"],
        n_agents=int(kv["n_agents"]),
        feature_dim=int(kv["feature_dim"]),
        sampling=sampling,
        n_train=int(kv["n_train"]),
        n_test=int(kv["n_test"]),
        edge_prob=float(kv["edge_prob"]),
        physics=physics,
        norm_max_abs=np.array([float(v) for v in kv["norm_max_abs"].split()]),
        regenerated=int(kv["regenerated"]),
    )


def write_dataset(path: str, meta: DatasetMeta, records: list) -> None:
    """Write a dataset directory; records must be in ascending traj_id order."""
    os.makedirs(path, exist_ok=True)
    with open(os.path.join(path, "meta"), "w") as fh:
        fh.write("\n".join(_meta_lines(meta)) + "\n")
    with open(os.path.join(path, "trajectories"), "w") as fh:
        for rec in records:
            for agent in range(rec.n_agents):
                t = rec.times[agent]
                f = rec.features[agent]
                for j in range(len(t)):
                    row = " ".join(fmt(v) for v in f[j])
                    fh.write(f"{rec.traj_id} {agent} {fmt(t[j])} {row}\n")
    with open(os.path.join(path, "adjacency"), "w") as fh:
        for rec in records:
            flat = rec.adjacency.astype(int).reshape(-1)
            fh.write(" ".join(str(v) for v in flat) + "\n")


def read_dataset(path: str) -> tuple[DatasetMeta, list]:
    """Read a dataset directory back into (meta, records)."""
    with open(os.path.join(path, "meta")) as fh:
        meta = _parse_meta(fh.read())
    n = meta.n_agents
    adjacencies = []
    with open(os.path.join(path, "adjacency")) as fh:
        for line in fh:
            vals = np.array([int(v) for v in line.split()], dtype=np.float64)
            adjacencies.append(vals.reshape(n, n))
    per_traj: dict[int, list] = {}
    with open(os.path.join(path, "trajectories")) as fh:
        for line in fh:
            parts = line.split()
            tid, agent = int(parts[0]), int(parts[1])
            t = float(parts[2])
            feats = [float(v) for v in parts[3:]]
            per_traj.setdefault(tid, [[] for _ in range(n)])[agent].append((t, feats))
    records = []
    for tid in sorted(per_traj):
        rows = per_traj[tid]
        times = [np.array([r[0] for r in rows[a]]) for a in range(n)]
        feats = [np.array([r[1] for r in rows[a]]) for a in range(n)]
        records.append(TrajectoryRecord(tid, times, feats, adjacencies[tid]))
    return meta, records
