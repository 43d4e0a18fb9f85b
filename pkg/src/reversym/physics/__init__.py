from .state import PhaseState, EnergyReport, EnergySeries
from .springs import SpringSpec, spring_derivative, spring_energy
from .pendulum import PendulumSpec, pendulum_derivative, pendulum_energy, angular_velocities
from .integrate import DivergenceError, IntegrationResult, euler_integrate, rk4_integrate
from .reversal import reverse_state, reversibility_residual
from .energy import energy, energy_series

__all__ = [
    "PhaseState",
    "EnergyReport",
    "EnergySeries",
    "SpringSpec",
    "spring_derivative",
    "spring_energy",
    "PendulumSpec",
    "pendulum_derivative",
    "pendulum_energy",
    "angular_velocities",
    "DivergenceError",
    "IntegrationResult",
    "euler_integrate",
    "rk4_integrate",
    "reverse_state",
    "reversibility_residual",
    "energy",
    "energy_series",
]
