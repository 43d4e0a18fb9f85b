"""Phase-space state containers shared by all simulators."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class PhaseState:
    """Positions/angles ``q`` and (angular) momenta ``p`` at time ``t``.

    ``q`` and ``p`` are (N, D) float64 arrays; D = 2 for planar springs,
    D = 1 for the pendulum (angles).
    """

    q: np.ndarray
    p: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=np.float64)
        self.p = np.asarray(self.p, dtype=np.float64)
        if self.q.shape != self.p.shape:
            raise ValueError(f"q shape {self.q.shape} != p shape {self.p.shape}")

    @property
    def n_agents(self) -> int:
        return self.q.shape[0]

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.q)) and np.all(np.isfinite(self.p)))

    def copy(self) -> "PhaseState":
        return PhaseState(self.q.copy(), self.p.copy(), self.t)

    def flat(self) -> np.ndarray:
        return np.concatenate([self.q.reshape(-1), self.p.reshape(-1)])


@dataclass
class EnergyReport:
    """Energy decomposition at a single instant."""

    kinetic: float
    potential: float
    extra: float = 0.0  # explicit time-dependent or dissipated term
    @property
    def total(self) -> float:
        return self.kinetic + self.potential + self.extra

    @property
    def conservative(self) -> float:
        return self.kinetic + self.potential


@dataclass
class EnergySeries:
    """Per-step energy decomposition along a stored trajectory.

    ``dissipated`` is the friction work integral accumulated with the
    trapezoidal rule; it is zero except for the damped spring.  ``total``
    includes every term and is the quantity that stays constant when the
    underlying bookkeeping is exact.
    """

    times: np.ndarray
    kinetic: np.ndarray
    potential: np.ndarray
    drive: np.ndarray = field(default=None)
    dissipated: np.ndarray = field(default=None)

    def __post_init__(self):
        n = len(self.times)
        if self.drive is None:
            self.drive = np.zeros(n)
        if self.dissipated is None:
            self.dissipated = np.zeros(n)

    @property
    def conservative(self) -> np.ndarray:
        return self.kinetic + self.potential

    @property
    def total(self) -> np.ndarray:
        return self.conservative + self.drive + self.dissipated
