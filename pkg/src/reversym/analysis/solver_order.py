"""Empirical solver-order measurement on analytically solvable systems.

Two error functionals are measured per (step size, horizon) cell:

reconstruction
    squared error against the closed-form solution, accumulated over a
    fixed readout grid (8 points per horizon), so the per-step-size slope
    isolates the integrator's global order squared: 2 for Euler, 8 for RK4.

closure
    the forward trajectory is integrated back with the negated field from
    its endpoint; the per-frame discrepancies (every internal step) are
    accumulated as a norm sum and squared.  The trajectory-level closure
    discrepancy of RK4 is fourth order, so this squared functional falls at
    slope 8.  (The endpoint alone closes one order faster because forward
    and reverse truncation terms cancel pairwise.)
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# readout times sit at quarters of the horizon; default step grids divide
# them exactly so every cell compares the same reference points
READOUT_POINTS = 4


class DegenerateFitError(ValueError):
    """All measured errors are identical; no slope can be fitted."""


def fit_loglog_slope(xs, errors) -> tuple[float, float]:
    """Least-squares slope and residual of log(error) vs log(x); >= 4 points."""
    xs = np.asarray(xs, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if len(xs) < 4:
        raise ValueError(f"need at least 4 grid points for a slope fit, got {len(xs)}")
    if np.allclose(errors, errors[0], rtol=1e-14, atol=0.0):
        raise DegenerateFitError("identical errors across the grid")
    coeffs, residuals, *_ = np.polyfit(np.log(xs), np.log(errors), 1, full=True)
    resid = float(residuals[0]) if len(residuals) else 0.0
    return float(coeffs[0]), resid


@dataclass
class ScalingResult:
    system: str
    integrator: str
    points: list = field(default_factory=list)  # (dt, horizon, recon_sq, closure_sq)
    dt_slope_recon: float = float("nan")
    dt_slope_closure: float = float("nan")
    horizon_slope_recon: float = float("nan")
    fit_residual: float = float("nan")

    def rows(self) -> list:
        return [(dt, horizon, recon, closure)
                for dt, horizon, recon, closure in self.points]


def _exponential_field(z: np.ndarray) -> np.ndarray:
    return z.copy()


def _exponential_solution(z0: np.ndarray, t: float) -> np.ndarray:
    return z0 * np.exp(t)


def _spring_field(z: np.ndarray) -> np.ndarray:
    # one normal mode of a two-agent spring pair: q'' = -omega^2 q, omega=1
    return np.array([z[1], -z[0]])


def _spring_solution(z0: np.ndarray, t: float) -> np.ndarray:
    c, s = np.cos(t), np.sin(t)
    return np.array([z0[0] * c + z0[1] * s, -z0[0] * s + z0[1] * c])


_SYSTEMS = {
    "exponential": (_exponential_field, _exponential_solution, np.array([1.0])),
    "linear-spring": (_spring_field, _spring_solution, np.array([1.0, 0.3])),
}


def _euler_step(f, z, h):
    return z + h * f(z)


def _rk4_step(f, z, h):
    k1 = f(z)
    k2 = f(z + 0.5 * h * k1)
    k3 = f(z + 0.5 * h * k2)
    k4 = f(z + h * k3)
    return z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


_STEPPERS = {"euler": _euler_step, "rk4": _rk4_step}


def _run_cell(system: str, integrator: str, dt: float, horizon: float):
    field_fn, solution, z0 = _SYSTEMS[system]
    stepper = _STEPPERS[integrator]
    n = max(int(round(horizon / dt)), 1)
    z = z0.copy()
    traj = [z.copy()]
    for _ in range(n):
        z = stepper(field_fn, z, dt)
        traj.append(z.copy())
    traj = np.array(traj)

    # reconstruction on a fixed readout grid
    readout = np.linspace(horizon / READOUT_POINTS, horizon, READOUT_POINTS)
    recon = 0.0
    for t in readout:
        j = int(round(t / dt))
        j = min(j, n)
        exact = solution(z0, j * dt)
        recon += float(((traj[j] - exact) ** 2).sum())

    # forward-reverse closure accumulated over every internal step
    z = traj[-1].copy()
    rev = [z.copy()]
    for _ in range(n):
        z = stepper(field_fn, z, -dt)
        rev.append(z.copy())
    rev = np.array(rev)[::-1]
    closure_norms = np.linalg.norm(traj - rev, axis=1).sum()
    return recon, float(closure_norms ** 2)


def solver_order_experiment(system: str, integrator: str,
                            dt_grid=None, horizon_grid=None) -> ScalingResult:
    """Measure reconstruction and closure errors over (dt, horizon) grids and
    fit log-log slopes.  Defaults: dt in {0.1 .. 0.0125}, horizon 1, plus a
    horizon sweep {1, 2, 3, 4} at the finest dt."""
    if system not in _SYSTEMS:
        raise ValueError(f"system must be one of {sorted(_SYSTEMS)}, got {system!r}")
    if integrator not in _STEPPERS:
        raise ValueError(f"integrator must be one of {sorted(_STEPPERS)}, got {integrator!r}")
    if dt_grid is None:
        dt_grid = [1.0 / n for n in (8, 12, 16, 24, 32, 64)]
    else:
        dt_grid = list(dt_grid)
    dt_grid = sorted(dt_grid, reverse=True)
    horizon_grid = list(horizon_grid) if horizon_grid is not None else [1.0, 2.0, 3.0, 4.0]
    result = ScalingResult(system=system, integrator=integrator)

    base_horizon = horizon_grid[0]
    recon_dt, closure_dt = [], []
    for dt in dt_grid:
        recon, closure = _run_cell(system, integrator, dt, base_horizon)
        result.points.append((dt, base_horizon, recon, closure))
        recon_dt.append(recon)
        closure_dt.append(closure)
    result.dt_slope_recon, result.fit_residual = fit_loglog_slope(dt_grid, recon_dt)
    result.dt_slope_closure, _ = fit_loglog_slope(dt_grid, closure_dt)

    fine = dt_grid[-1]
    recon_h = []
    for horizon in horizon_grid:
        recon, closure = _run_cell(system, integrator, fine, horizon)
        result.points.append((fine, horizon, recon, closure))
        recon_h.append(recon)
    result.horizon_slope_recon, _ = fit_loglog_slope(horizon_grid, recon_h)
    return result


def errors_monotone_in_dt(result: ScalingResult) -> bool:
    base = [(dt, r, c) for dt, h, r, c in result.points if h == result.points[0][1]]
    base.sort(key=lambda row: row[0])
    recon = [r for _, r, _ in base]
    closure = [c for _, _, c in base]
    return all(np.diff(recon) >= 0) and all(np.diff(closure) >= 0)
