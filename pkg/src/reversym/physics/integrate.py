"""Fixed-step Euler and RK4 integration over phase states."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .state import PhaseState

Derivative = Callable[[PhaseState], tuple[np.ndarray, np.ndarray]]


class DivergenceError(RuntimeError):
    """Integration produced a non-finite state."""

    def __init__(self, step: int):
        super().__init__(f"non-finite state at step {step}")
        self.step = step


@dataclass
class IntegrationResult:
    states: list  # PhaseState, length n_completed + 1 (includes the start)
    diverged: bool = False

    def __iter__(self):
        return iter(self.states)

    def __len__(self):
        return len(self.states)

    @property
    def final(self) -> PhaseState:
        return self.states[-1]

    def q_array(self) -> np.ndarray:
        return np.stack([s.q for s in self.states])

    def p_array(self) -> np.ndarray:
        return np.stack([s.p for s in self.states])

    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.states])


def _check_step_args(dt: float, n_steps: int) -> None:
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if n_steps < 1:
        raise ValueError(f"n_steps must be >= 1, got {n_steps}")


def euler_integrate(derivative: Derivative, state0: PhaseState,
                    dt: float, n_steps: int) -> IntegrationResult:
    """q(t+dt) = q(t) + dq/dt * dt, likewise for p.

    Returns n_steps + 1 states including the start.  A non-finite state
    truncates the sequence and sets the divergence flag.
    """
    _check_step_args(dt, n_steps)
    states = [state0.copy()]
    s = state0.copy()
    for step in range(n_steps):
        dq, dp = derivative(s)
        s = PhaseState(s.q + dq * dt, s.p + dp * dt, s.t + dt)
        if not s.is_finite():
            return IntegrationResult(states, diverged=True)
        states.append(s)
    return IntegrationResult(states)


def rk4_integrate(derivative: Derivative, state0: PhaseState,
                  dt: float, n_steps: int) -> IntegrationResult:
    """Classical fourth-order Runge-Kutta with the 1/6 (k1+2k2+2k3+k4) update."""
    _check_step_args(dt, n_steps)
    states = [state0.copy()]
    s = state0.copy()
    for step in range(n_steps):
        q, p, t = s.q, s.p, s.t
        k1q, k1p = derivative(s)
        k2q, k2p = derivative(PhaseState(q + 0.5 * dt * k1q, p + 0.5 * dt * k1p, t + 0.5 * dt))
        k3q, k3p = derivative(PhaseState(q + 0.5 * dt * k2q, p + 0.5 * dt * k2p, t + 0.5 * dt))
        k4q, k4p = derivative(PhaseState(q + dt * k3q, p + dt * k3p, t + dt))
        s = PhaseState(
            q + (dt / 6.0) * (k1q + 2.0 * k2q + 2.0 * k3q + k4q),
            p + (dt / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p),
            t + dt,
        )
        if not s.is_finite():
            return IntegrationResult(states, diverged=True)
        states.append(s)
    return IntegrationResult(states)


INTEGRATORS = {"euler": euler_integrate, "rk4": rk4_integrate}
