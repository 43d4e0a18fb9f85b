import numpy as np
import pytest

from reversym.physics import (
    PhaseState,
    SpringSpec,
    euler_integrate,
    reverse_state,
    reversibility_residual,
    rk4_integrate,
    spring_derivative,
)


def scalar_state(x):
    return PhaseState(np.array([[float(x)]]), np.zeros((1, 1)))


def exponential(s):
    # dx/dt = x in the q slot, p inert
    return s.q.copy(), np.zeros_like(s.p)


def zero_derivative(s):
    return np.zeros_like(s.q), np.zeros_like(s.p)


def test_zero_derivative_constant_sequence():
    for integrate in (euler_integrate, rk4_integrate):
        res = integrate(zero_derivative, scalar_state(2.5), 0.1, 5)
        assert len(res) == 6
        for s in res:
            assert s.q[0, 0] == 2.5


def test_euler_one_step_formula():
    res = euler_integrate(exponential, scalar_state(1.0), 0.1, 1)
    assert res.final.q[0, 0] == pytest.approx(1.1, abs=1e-15)


def test_rk4_one_step_matches_exponential():
    res = rk4_integrate(exponential, scalar_state(1.0), 0.1, 1)
    assert res.final.q[0, 0] == pytest.approx(np.exp(0.1), abs=1e-7)


def test_time_advances_by_dt():
    res = rk4_integrate(zero_derivative, scalar_state(0.0), 0.25, 4)
    np.testing.assert_allclose(res.times(), [0.0, 0.25, 0.5, 0.75, 1.0])


def test_divergence_truncates_with_flag():
    def explode(s):
        with np.errstate(over="ignore"):
            return s.q * 1e308, np.zeros_like(s.p)

    res = euler_integrate(explode, scalar_state(1.0), 1.0, 10)
    assert res.diverged
    assert len(res) < 11


def test_invalid_step_args():
    with pytest.raises(ValueError):
        euler_integrate(zero_derivative, scalar_state(0.0), -0.1, 5)
    with pytest.raises(ValueError):
        rk4_integrate(zero_derivative, scalar_state(0.0), 0.1, 0)


def _ring_spec(n=3, variant="simple", **kw):
    adj = np.zeros((n, n))
    for i in range(n):
        adj[i, (i + 1) % n] = adj[(i + 1) % n, i] = 1.0
    return SpringSpec(n, adj, variant=variant, **kw)


def test_euler_tracks_fine_rk4_reference():
    rng = np.random.default_rng(12)
    spec = _ring_spec()
    s0 = PhaseState(rng.normal(size=(3, 2)), rng.normal(size=(3, 2)))
    deriv = lambda s: spring_derivative(s, spec)
    coarse = euler_integrate(deriv, s0, 1e-3, 1000)
    fine = rk4_integrate(deriv, s0, 1e-5, 100000)
    ref_q = fine.q_array()[::100]
    ref_p = fine.p_array()[::100]
    num = np.concatenate([coarse.q_array().ravel(), coarse.p_array().ravel()])
    ref = np.concatenate([ref_q.ravel(), ref_p.ravel()])
    assert np.linalg.norm(num - ref) / np.linalg.norm(ref) < 1e-3


def _fit_order(integrate, dts):
    errs = []
    for dt in dts:
        n = int(round(1.0 / dt))
        res = integrate(exponential, scalar_state(1.0), dt, n)
        errs.append(abs(res.final.q[0, 0] - np.exp(n * dt)))
    slope, _ = np.polyfit(np.log(dts), np.log(errs), 1)
    return slope


def test_global_error_orders():
    dts = np.array([1e-1, 5e-2, 2e-2, 1e-2, 5e-3, 2e-3, 1e-3])
    assert _fit_order(euler_integrate, dts) == pytest.approx(1.0, abs=0.2)
    dts_rk4 = np.array([1e-1, 7e-2, 5e-2, 3.5e-2, 2.5e-2])
    assert _fit_order(rk4_integrate, dts_rk4) == pytest.approx(4.0, abs=0.2)


def test_reverse_state_involution_and_fixed_point():
    rng = np.random.default_rng(3)
    s = PhaseState(rng.normal(size=(4, 2)), rng.normal(size=(4, 2)), t=1.5)
    rr = reverse_state(reverse_state(s))
    np.testing.assert_array_equal(rr.q, s.q)
    np.testing.assert_array_equal(rr.p, s.p)
    rest = PhaseState(rng.normal(size=(4, 2)), np.zeros((4, 2)))
    np.testing.assert_array_equal(reverse_state(rest).p, rest.p)


def test_reversal_preserves_simple_spring_energy():
    from reversym.physics import energy

    rng = np.random.default_rng(4)
    spec = _ring_spec(4)
    s = PhaseState(rng.normal(size=(4, 2)), rng.normal(size=(4, 2)))
    assert energy(reverse_state(s), spec).total == pytest.approx(energy(s, spec).total)


def test_zero_dynamics_zero_residual():
    spec = _ring_spec(3)
    s0 = PhaseState(np.ones((3, 2)), np.zeros((3, 2)))  # fixed point
    assert reversibility_residual(spec, s0, 1e-3, 10) == 0.0


def test_reversibility_residuals_by_variant():
    rng = np.random.default_rng(21)
    q = rng.normal(size=(4, 2))
    p = rng.normal(size=(4, 2))
    simple = reversibility_residual(_ring_spec(4), PhaseState(q, p), 1e-4, 1000)
    damped = reversibility_residual(_ring_spec(4, variant="damped"),
                                    PhaseState(q.copy(), p.copy()), 1e-4, 1000)
    forced = reversibility_residual(_ring_spec(4, variant="forced"),
                                    PhaseState(q.copy(), p.copy()), 1e-4, 1000)
    assert simple < 1e-6
    assert forced < 1e-6
    assert damped >= 1e3 * max(simple, 1e-300)
    assert damped > 1e-2
