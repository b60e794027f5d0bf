import math

import numpy as np
import pytest

from quadtrack.numerics import (IntegrationError, SingularMatrixError, expm,
                                hurwitz_test, rk4_step, smooth_sat,
                                solve_linear)


def test_rk4_exponential_growth_factor():
    # dy/dt = y, one step of h = 0.1. On a linear autonomous system the
    # classical scheme multiplies by exactly 1 + h + h^2/2 + h^3/6 + h^4/24;
    # the literal is that sum evaluated by hand.
    y = rk4_step(lambda t, v: v, 0.0, np.array([1.0]), 0.1)
    assert y[0] == pytest.approx(1.1051708333333332, rel=1e-15)
    # ten steps of h = 0.01 compound the per-step factor
    y = np.array([1.0])
    for k in range(10):
        y = rk4_step(lambda t, v: v, k * 0.01, y, 0.01)
    factor = 1.0 + 0.01 + 0.01 ** 2 / 2.0 + 0.01 ** 3 / 6.0 + 0.01 ** 4 / 24.0
    assert y[0] == pytest.approx(factor ** 10, rel=1e-14)


def test_rk4_exact_on_cubic_quadrature():
    # With a time-only right-hand side the scheme reduces to Simpson's rule,
    # which integrates cubics exactly.
    y = np.array([0.0])
    n = 7
    dt = 1.0 / n
    for k in range(n):
        y = rk4_step(lambda t, v: np.array([4.0 * t ** 3]), k * dt, y, dt)
    assert y[0] == pytest.approx(1.0, abs=5e-16)


def test_rk4_rejects_nonfinite_stage():
    def rhs(t, v):
        return v * np.inf

    with pytest.raises(IntegrationError):
        rk4_step(rhs, 0.0, np.array([1.0]), 0.1)


def test_expm_rotation():
    phi = 0.7
    a = np.array([[0.0, -phi], [phi, 0.0]])
    want = np.array([[math.cos(phi), -math.sin(phi)],
                     [math.sin(phi), math.cos(phi)]])
    assert np.allclose(expm(a), want, atol=1e-14)


def test_expm_nilpotent():
    a = np.array([[0.0, 1.0], [0.0, 0.0]])
    assert np.allclose(expm(a), [[1.0, 1.0], [0.0, 1.0]], atol=1e-15)


def test_solve_linear_matches_reference_solver():
    rng = np.random.default_rng(7)
    for _ in range(25):
        a = rng.standard_normal((5, 5)) + 5.0 * np.eye(5)
        b = rng.standard_normal(5)
        assert np.allclose(solve_linear(a, b), np.linalg.solve(a, b),
                           rtol=1e-12, atol=1e-12)


def test_solve_linear_rejects_singular():
    a = np.array([[1.0, 2.0], [2.0, 4.0]])
    with pytest.raises(SingularMatrixError):
        solve_linear(a, np.array([1.0, 1.0]))


def test_solve_linear_residual_property():
    rng = np.random.default_rng(11)
    a = rng.standard_normal((8, 8)) + 8.0 * np.eye(8)
    b = rng.standard_normal(8)
    x = solve_linear(a, b)
    assert np.linalg.norm(a @ x - b) < 1e-10


def test_hurwitz_known_cases():
    assert hurwitz_test([1.0, 10.0, 100.0, 100.0, 100.0])
    assert not hurwitz_test([1.0, -1.0, 1.0])
    # marginal pair on the axis
    assert not hurwitz_test([1.0, 0.0, 1.0])


def test_hurwitz_argument_validation():
    with pytest.raises(ValueError):
        hurwitz_test([])
    with pytest.raises(ValueError):
        hurwitz_test([1.0])
    with pytest.raises(ValueError):
        hurwitz_test([2.0, 1.0])


def test_hurwitz_against_sampled_roots():
    # Brute-force comparison: build monic polynomials from known root sets
    # (real roots and conjugate pairs, kept away from the axis) and check
    # the Routh verdict against the sign of the real parts.
    rng = np.random.default_rng(42)
    for _ in range(300):
        deg = int(rng.integers(1, 6))
        roots = []
        while len(roots) < deg:
            re = rng.uniform(0.1, 3.0) * rng.choice([-1.0, 1.0])
            if deg - len(roots) >= 2 and rng.random() < 0.5:
                im = rng.uniform(0.1, 3.0)
                roots += [complex(re, im), complex(re, -im)]
            else:
                roots.append(complex(re, 0.0))
        coeffs = np.poly(np.array(roots)).real
        stable = all(r.real < 0 for r in roots)
        assert hurwitz_test(list(coeffs)) == stable


def test_smooth_sat_bounds_and_shape():
    # strictly interior at moderate drive; at extreme drive the value may
    # round onto the rail but never past it
    assert abs(smooth_sat(6.0, 2.0)) < 2.0
    assert abs(smooth_sat(-3.0, 0.5)) < 0.5
    assert abs(smooth_sat(1e9, 2.0)) <= 2.0
    assert abs(smooth_sat(-1e9, 0.5)) <= 0.5
    assert smooth_sat(0.0, 3.0) == 0.0
    # odd function
    assert smooth_sat(-1.3, 2.0) == -smooth_sat(1.3, 2.0)
    # unit slope at the origin
    d = (smooth_sat(1e-8, 2.0) - smooth_sat(-1e-8, 2.0)) / 2e-8
    assert d == pytest.approx(1.0, abs=1e-9)
    # monotone
    grid = np.linspace(-30.0, 30.0, 401)
    vals = [smooth_sat(v, 4.0) for v in grid]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_smooth_sat_value():
    assert smooth_sat(-1.0 / 9.81, 100.0) == pytest.approx(
        -0.10193676387663367, rel=1e-15)
