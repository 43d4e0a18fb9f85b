import numpy as np
import pytest

from reversym.physics import (
    PendulumSpec,
    PhaseState,
    angular_velocities,
    energy,
    pendulum_derivative,
    rk4_integrate,
)
from reversym.physics.pendulum import _denominator, momentum_derivatives


def state_of(theta, p):
    return PhaseState(np.asarray(theta, float)[:, None], np.asarray(p, float)[:, None])


def test_hanging_equilibrium():
    dq, dp = pendulum_derivative(state_of([0, 0, 0], [0, 0, 0]))
    np.testing.assert_array_equal(dq, np.zeros((3, 1)))
    np.testing.assert_array_equal(dp, np.zeros((3, 1)))


def test_inverted_equilibrium():
    dq, dp = pendulum_derivative(state_of([np.pi, np.pi, np.pi], [0, 0, 0]))
    np.testing.assert_allclose(dq, np.zeros((3, 1)), atol=1e-12)
    np.testing.assert_allclose(dp, np.zeros((3, 1)), atol=1e-14)


def test_denominator_bounded_away_from_zero():
    rng = np.random.default_rng(0)
    spec = PendulumSpec()
    theta = rng.uniform(-np.pi, np.pi, size=(1000, 3))
    den = _denominator(theta, spec)
    assert np.all(den < 0)
    assert np.min(np.abs(den)) > 30.0


def _mass_matrix(theta, spec):
    c12 = np.cos(theta[0] - theta[1])
    c13 = np.cos(theta[0] - theta[2])
    c23 = np.cos(theta[1] - theta[2])
    f = spec.m * spec.l ** 2 / 6.0
    return f * np.array([
        [14.0, 9.0 * c12, 3.0 * c13],
        [9.0 * c12, 8.0, 3.0 * c23],
        [3.0 * c13, 3.0 * c23, 2.0],
    ])


@pytest.mark.parametrize("seed", range(20))
def test_angular_velocity_inverts_mass_matrix(seed):
    rng = np.random.default_rng(100 + seed)
    spec = PendulumSpec(m=rng.uniform(0.5, 2.0), l=rng.uniform(0.5, 2.0))
    theta = rng.uniform(-np.pi, np.pi, size=3)
    p = rng.normal(size=3)
    omega = angular_velocities(theta, p, spec)
    np.testing.assert_allclose(_mass_matrix(theta, spec) @ omega, p, rtol=1e-10, atol=1e-12)


def test_against_symbolic_lagrangian():
    sympy = pytest.importorskip("sympy")
    t1, t2, t3, w1, w2, w3, m, l, g = sympy.symbols("t1 t2 t3 w1 w2 w3 m l g")
    theta = [t1, t2, t3]
    omega = [w1, w2, w3]
    # center-of-mass kinematics of the three sticks, derived from scratch
    x = [l / 2 * sympy.sin(t1),
         l * (sympy.sin(t1) + sympy.sin(t2) / 2),
         l * (sympy.sin(t1) + sympy.sin(t2) + sympy.sin(t3) / 2)]
    y = [-l / 2 * sympy.cos(t1),
         -l * (sympy.cos(t1) + sympy.cos(t2) / 2),
         -l * (sympy.cos(t1) + sympy.cos(t2) + sympy.cos(t3) / 2)]
    subs_dot = dict(zip([sympy.Derivative(s, "tau") for s in theta], omega))
    tau = sympy.symbols("tau")
    theta_t = [sympy.Function(f"f{i}")(tau) for i in range(3)]
    remap = dict(zip(theta, theta_t))
    xdot = [sympy.diff(xi.subs(remap), tau) for xi in x]
    ydot = [sympy.diff(yi.subs(remap), tau) for yi in y]
    back = {}
    for sym, f in zip(theta, theta_t):
        back[f] = sym
    for w, f in zip(omega, theta_t):
        back[sympy.Derivative(f, tau)] = w
    xdot = [e.subs(back) for e in xdot]
    ydot = [e.subs(back) for e in ydot]
    inertia = m * l ** 2 / 12
    kinetic = (m / 2 * sum(xd ** 2 + yd ** 2 for xd, yd in zip(xdot, ydot))
               + inertia / 2 * sum(w ** 2 for w in omega))
    potential = m * g * sum(y)
    lagrangian = sympy.simplify(kinetic - potential)

    momenta = [sympy.diff(lagrangian, w) for w in omega]
    pdots = [sympy.diff(lagrangian, th) for th in theta]
    f_momenta = sympy.lambdify([t1, t2, t3, w1, w2, w3, m, l, g], momenta, "numpy")
    f_pdots = sympy.lambdify([t1, t2, t3, w1, w2, w3, m, l, g], pdots, "numpy")

    rng = np.random.default_rng(42)
    spec = PendulumSpec(m=1.3, l=0.8, g=9.8)
    for _ in range(10):
        th = rng.uniform(-np.pi, np.pi, size=3)
        pv = rng.normal(size=3)
        w = angular_velocities(th, pv, spec)
        # the closed-form velocities must reproduce the symbolic momenta
        p_back = np.array(f_momenta(*th, *w, spec.m, spec.l, spec.g))
        np.testing.assert_allclose(p_back, pv, rtol=1e-9, atol=1e-11)
        # and the momentum derivatives must match dL/dtheta term by term
        dp = momentum_derivatives(th, w, spec)
        dp_oracle = np.array(f_pdots(*th, *w, spec.m, spec.l, spec.g))
        np.testing.assert_allclose(dp, dp_oracle, rtol=1e-9, atol=1e-11)


def test_energy_minimum_at_rest():
    spec = PendulumSpec()
    rep = energy(state_of([0, 0, 0], [0, 0, 0]), spec)
    assert rep.total == pytest.approx(-4.5 * spec.m * spec.g * spec.l)
    rng = np.random.default_rng(1)
    for _ in range(20):
        other = state_of(rng.uniform(-np.pi, np.pi, 3), rng.normal(size=3))
        assert energy(other, spec).total >= rep.total - 1e-12


def test_energy_conserved_under_rk4():
    rng = np.random.default_rng(9)
    spec = PendulumSpec()
    s0 = state_of(rng.uniform(-0.8, 0.8, 3), np.zeros(3))
    traj = rk4_integrate(lambda s: pendulum_derivative(s, spec), s0, 1e-4, 2000)
    h = np.array([energy(s, spec).total for s in traj])
    assert np.max(np.abs(h - h[0])) / abs(h[0]) < 1e-8


def test_wrong_shape_rejected():
    with pytest.raises(ValueError, match=r"\(3, 1\)"):
        pendulum_derivative(PhaseState(np.zeros((2, 1)), np.zeros((2, 1))))
