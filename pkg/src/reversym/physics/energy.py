"""Energy evaluators for single states and stored trajectories."""

from __future__ import annotations

import numpy as np

from .integrate import IntegrationResult
from .pendulum import PendulumSpec, pendulum_energy
from .springs import SpringSpec, spring_energy
from .state import EnergyReport, EnergySeries, PhaseState


def energy(state: PhaseState, spec) -> EnergyReport:
    """Instantaneous energy decomposition for a spring or pendulum spec."""
    if isinstance(spec, SpringSpec):
        kinetic, potential, drive = spring_energy(state, spec)
        return EnergyReport(kinetic=kinetic, potential=potential, extra=drive)
    if isinstance(spec, PendulumSpec):
        kinetic, potential = pendulum_energy(state, spec)
        return EnergyReport(kinetic=kinetic, potential=potential)
    raise TypeError(f"unsupported spec type {type(spec).__name__}")


def energy_series(trajectory: IntegrationResult | list, spec) -> EnergySeries:
    """Energy decomposition along a trajectory.

    For the damped spring the friction work gamma/m * integral p^2/m dt is
    accumulated with the trapezoidal rule over the stored sampling, so the
    ``total`` column reconstructs the conserved bookkeeping quantity.
    """
    states = list(trajectory)
    times = np.array([s.t for s in states])
    reports = [energy(s, spec) for s in states]
    kinetic = np.array([r.kinetic for r in reports])
    potential = np.array([r.potential for r in reports])
    drive = np.array([r.extra for r in reports])
    dissipated = np.zeros(len(states))
    if isinstance(spec, SpringSpec) and spec.variant == "damped":
        rate = np.array([
            spec.gamma / spec.m * (s.p * s.p).sum() / spec.m for s in states
        ])
        if len(states) > 1:
            dt_seg = np.diff(times)
            increments = 0.5 * (rate[1:] + rate[:-1]) * dt_seg
            dissipated[1:] = np.cumsum(increments)
    return EnergySeries(times=times, kinetic=kinetic, potential=potential,
                        drive=drive, dissipated=dissipated)
