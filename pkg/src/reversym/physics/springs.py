"""Planar n-body spring systems: simple, forced, and damped variants.

Dynamics (per agent i, neighbors N_i from a symmetric adjacency):

    dq_i/dt = p_i / m
    dp_i/dt = sum_{j in N_i} -k (q_i - q_j)      simple
              ... - k1 cos(omega t)               forced (same on every dim)
              ... - gamma p_i / m                 damped

Defaults m = 1, k = 0.1; forced k1 = 10, omega = 1; damped gamma = 10.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .state import PhaseState

VARIANTS = ("simple", "forced", "damped")


@dataclass
class SpringSpec:
    n_agents: int
    adjacency: np.ndarray
    m: float = 1.0
    k: float = 0.1
    variant: str = "simple"
    k1: float = 10.0
    omega: float = 1.0
    gamma: float = 10.0

    def __post_init__(self):
        self.adjacency = np.asarray(self.adjacency, dtype=np.float64)
        n = self.n_agents
        if self.adjacency.shape != (n, n):
            raise ValueError(f"adjacency shape {self.adjacency.shape} != ({n}, {n})")
        if not np.array_equal(self.adjacency, self.adjacency.T):
            raise ValueError("adjacency must be symmetric")
        if np.any(np.diag(self.adjacency) != 0):
            raise ValueError("adjacency must have a zero diagonal")
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.m <= 0 or self.k <= 0:
            raise ValueError("m and k must be positive")
        if self.variant == "forced" and (self.k1 <= 0 or self.omega <= 0):
            raise ValueError("forced spring needs k1 > 0 and omega > 0")
        if self.variant == "damped" and self.gamma <= 0:
            raise ValueError("damped spring needs gamma > 0")
        self._degree = self.adjacency.sum(axis=1)[:, None]

    @property
    def degree(self) -> np.ndarray:
        return self._degree


def spring_derivative(state: PhaseState, spec: SpringSpec) -> tuple[np.ndarray, np.ndarray]:
    """(dq/dt, dp/dt) for the configured spring variant."""
    if state.q.shape[0] != spec.n_agents:
        raise ValueError(f"state has {state.q.shape[0]} agents, spec has {spec.n_agents}")
    if not state.is_finite():
        raise ValueError("non-finite state")
    q, p = state.q, state.p
    dq = p / spec.m
    dp = -spec.k * (spec.degree * q - spec.adjacency @ q)
    if spec.variant == "forced":
        dp = dp - spec.k1 * np.cos(spec.omega * state.t)
    elif spec.variant == "damped":
        dp = dp - spec.gamma * p / spec.m
    return dq, dp


def spring_energy(state: PhaseState, spec: SpringSpec) -> tuple[float, float, float]:
    """(kinetic, pair potential, drive term) at the state's own time.

    The pair potential carries the double-count factor: (1/2) over ordered
    pairs of (1/2) k |q_i - q_j|^2.  The drive term is the forced variant's
    explicit sum_i q_i . k1 cos(omega t), zero otherwise; the damped
    variant's dissipation integral lives in the trajectory evaluator.
    """
    q, p = state.q, state.p
    kinetic = float((p * p).sum() / (2.0 * spec.m))
    diff = q[:, None, :] - q[None, :, :]
    pair_sq = (diff * diff).sum(axis=2)
    potential = float(0.25 * spec.k * (spec.adjacency * pair_sq).sum())
    drive = 0.0
    if spec.variant == "forced":
        drive = float(q.sum() * spec.k1 * np.cos(spec.omega * state.t))
    return kinetic, potential, drive
