"""Chaotic triple pendulum: three identical sticks in a vertical plane.

State is (theta_i, p_i) for i = 1..3 where p is angular momentum.  The
angular velocities come from the closed-form inverse of the 3x3 mass
matrix; the momentum derivatives come from the Lagrangian

    L = (m l / 6) (9 w2 w1 l c12 + 3 w3 w1 l c13 + 3 w2 w3 l c23
                   + 7 w1^2 l + 4 w2^2 l + w3^2 l
                   + 15 g cos t1 + 9 g cos t2 + 3 g cos t3)

with c_ab = cos(theta_a - theta_b) and w = dtheta/dt.  The common
denominator 81 cos 2(t1-t2) - 9 cos 2(t1-t3) + 45 cos 2(t2-t3) - 169 is
bounded within [-304, -34], so the singularity guard exists only to turn
corrupted states into diagnosable errors instead of NaNs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .state import PhaseState

DENOMINATOR_GUARD = 1e-12


class SingularStateError(ValueError):
    """Pendulum mass-matrix denominator vanished at the named state."""


@dataclass
class PendulumSpec:
    m: float = 1.0
    l: float = 1.0
    g: float = 9.8

    def __post_init__(self):
        if self.m <= 0 or self.l <= 0 or self.g <= 0:
            raise ValueError("m, l, g must all be positive")


def _denominator(theta: np.ndarray, spec: PendulumSpec) -> np.ndarray:
    t1, t2, t3 = theta[..., 0], theta[..., 1], theta[..., 2]
    return spec.m * spec.l ** 2 * (
        81.0 * np.cos(2.0 * (t1 - t2))
        - 9.0 * np.cos(2.0 * (t1 - t3))
        + 45.0 * np.cos(2.0 * (t2 - t3))
        - 169.0
    )


def angular_velocities(theta: np.ndarray, p: np.ndarray, spec: PendulumSpec) -> np.ndarray:
    """dtheta/dt from angular momenta; accepts (..., 3) batches."""
    theta = np.asarray(theta, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)
    t1, t2, t3 = theta[..., 0], theta[..., 1], theta[..., 2]
    p1, p2, p3 = p[..., 0], p[..., 1], p[..., 2]
    den = _denominator(theta, spec)
    if np.any(np.abs(den) < DENOMINATOR_GUARD):
        raise SingularStateError(
            f"mass-matrix denominator below {DENOMINATOR_GUARD} at theta={theta!r}")
    w1 = 6.0 * (9.0 * p1 * np.cos(2.0 * (t2 - t3))
                + 27.0 * p2 * np.cos(t1 - t2)
                - 9.0 * p2 * np.cos(t1 + t2 - 2.0 * t3)
                + 21.0 * p3 * np.cos(t1 - t3)
                - 27.0 * p3 * np.cos(t1 - 2.0 * t2 + t3)
                - 23.0 * p1) / den
    w2 = 6.0 * (27.0 * p1 * np.cos(t1 - t2)
                - 9.0 * p1 * np.cos(t1 + t2 - 2.0 * t3)
                + 9.0 * p2 * np.cos(2.0 * (t1 - t3))
                - 27.0 * p3 * np.cos(2.0 * t1 - t2 - t3)
                + 57.0 * p3 * np.cos(t2 - t3)
                - 47.0 * p2) / den
    w3 = 6.0 * (21.0 * p1 * np.cos(t1 - t3)
                - 27.0 * p1 * np.cos(t1 - 2.0 * t2 + t3)
                - 27.0 * p2 * np.cos(2.0 * t1 - t2 - t3)
                + 57.0 * p2 * np.cos(t2 - t3)
                + 81.0 * p3 * np.cos(2.0 * (t1 - t2))
                - 143.0 * p3) / den
    return np.stack([w1, w2, w3], axis=-1)


def momentum_derivatives(theta: np.ndarray, omega: np.ndarray,
                         spec: PendulumSpec) -> np.ndarray:
    """dp/dt = dL/dtheta evaluated at (theta, dtheta/dt); (..., 3) batches."""
    m, l, g = spec.m, spec.l, spec.g
    t1, t2, t3 = theta[..., 0], theta[..., 1], theta[..., 2]
    w1, w2, w3 = omega[..., 0], omega[..., 1], omega[..., 2]
    s12 = np.sin(t1 - t2)
    s13 = np.sin(t1 - t3)
    s23 = np.sin(t2 - t3)
    dp1 = -0.5 * m * l * (3.0 * w1 * w2 * l * s12 + w1 * w3 * l * s13 + 5.0 * g * np.sin(t1))
    dp2 = -0.5 * m * l * (-3.0 * w1 * w2 * l * s12 + w2 * w3 * l * s23 + 3.0 * g * np.sin(t2))
    dp3 = -0.5 * m * l * (-w1 * w3 * l * s13 - w2 * w3 * l * s23 + g * np.sin(t3))
    return np.stack([dp1, dp2, dp3], axis=-1)


def pendulum_derivative(state: PhaseState,
                        spec: PendulumSpec | None = None) -> tuple[np.ndarray, np.ndarray]:
    """(dtheta/dt, dp/dt) for the triple pendulum; state is (3, 1)."""
    spec = spec or PendulumSpec()
    if state.q.shape != (3, 1):
        raise ValueError(f"pendulum state must be (3, 1), got {state.q.shape}")
    if not state.is_finite():
        raise ValueError("non-finite state")
    theta = state.q[:, 0]
    p = state.p[:, 0]
    omega = angular_velocities(theta, p, spec)
    dp = momentum_derivatives(theta, omega, spec)
    return omega[:, None], dp[:, None]


def pendulum_energy(state: PhaseState, spec: PendulumSpec | None = None) -> tuple[float, float]:
    """(kinetic, potential).  Kinetic = p . dtheta/dt / 2 via the mass matrix;
    potential = -(m g l / 2)(5 cos t1 + 3 cos t2 + cos t3), minimal at rest."""
    spec = spec or PendulumSpec()
    theta = state.q[:, 0]
    p = state.p[:, 0]
    omega = angular_velocities(theta, p, spec)
    kinetic = float(0.5 * (p * omega).sum())
    potential = float(-(spec.m * spec.g * spec.l / 2.0)
                      * (5.0 * np.cos(theta[0]) + 3.0 * np.cos(theta[1]) + np.cos(theta[2])))
    return kinetic, potential
