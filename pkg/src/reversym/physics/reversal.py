"""The reversing operator and the forward-back closure residual."""

from __future__ import annotations

import numpy as np

from .integrate import INTEGRATORS, DivergenceError
from .pendulum import PendulumSpec, pendulum_derivative
from .springs import SpringSpec, spring_derivative
from .state import PhaseState


def reverse_state(state: PhaseState) -> PhaseState:
    """(q, p) -> (q, -p); an involution, fixed points where p = 0."""
    return PhaseState(state.q.copy(), -state.p, state.t)


def _derivative_for(spec):
    if isinstance(spec, SpringSpec):
        return lambda s: spring_derivative(s, spec)
    if isinstance(spec, PendulumSpec):
        return lambda s: pendulum_derivative(s, spec)
    raise TypeError(f"unsupported spec type {type(spec).__name__}")


def reversibility_residual(spec, state0: PhaseState, dt: float, n_steps: int,
                           integrator: str = "rk4") -> float:
    """|| (R o phi_t o R o phi_t)(state0) - state0 ||_2.

    Evolve forward, reverse momenta, evolve again, reverse back, compare.
    For a reversible system the residual is solver-limited; friction makes
    it O(1).  The forced spring's second leg reflects time: it restarts the
    clock at -t_end so the drive (even in t) is traversed in mirror order.
    """
    deriv = _derivative_for(spec)
    step = INTEGRATORS[integrator]

    leg1 = step(deriv, state0, dt, n_steps)
    if leg1.diverged:
        raise DivergenceError(len(leg1) - 1)
    turned = reverse_state(leg1.final)
    if isinstance(spec, SpringSpec) and spec.variant == "forced":
        turned = PhaseState(turned.q, turned.p, -leg1.final.t)
    else:
        turned = PhaseState(turned.q, turned.p, 0.0)
    leg2 = step(deriv, turned, dt, n_steps)
    if leg2.diverged:
        raise DivergenceError(len(leg2) - 1)
    closed = reverse_state(leg2.final)
    return float(np.linalg.norm(closed.flat() - state0.flat()))
