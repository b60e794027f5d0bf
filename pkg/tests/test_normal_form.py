import numpy as np
import pytest

from quadtrack.altitude import AltitudeParams, altitude_control, thrust_beta
from quadtrack.normal_form import (EnvelopeError, beta_derivatives,
                                   drift_and_gain, error_coords,
                                   forward_transform, inverse_angles,
                                   normal_form_rhs)
from quadtrack.numerics import rk4_step
from quadtrack.plant import (ControlInput, G_DEFAULT, PlantState,
                             plant_deriv_array)
from quadtrack.reference import closed_form_state, exo_init, scenario_modes
from quadtrack.simulator import embedded_initial_state


def _rand_state(rng, angle=0.5):
    v = rng.uniform(-1.0, 1.0, 10)
    v[6] = rng.uniform(-angle, angle)
    v[8] = rng.uniform(-angle, angle)
    return v


def test_angle_recovery_round_trip():
    rng = np.random.default_rng(9)
    for _ in range(100):
        v = _rand_state(rng)
        xi = forward_transform(PlantState.from_array(v))
        th, ps = inverse_angles(xi.xi1[2], xi.xi2[2])
        assert th == pytest.approx(v[6], abs=1e-12)
        assert ps == pytest.approx(v[8], abs=1e-12)


def test_inverse_angles_envelope_faults():
    with pytest.raises(EnvelopeError):
        inverse_angles(0.0, G_DEFAULT)
    with pytest.raises(EnvelopeError):
        inverse_angles(G_DEFAULT, 0.0)
    # admissible near the edge
    inverse_angles(0.9 * G_DEFAULT, 0.1)


def test_gain_matrix_and_determinant():
    rng = np.random.default_rng(13)
    for _ in range(20):
        th, ps = rng.uniform(-0.5, 0.5, 2)
        _, _, b = drift_and_gain(th, 0.3, ps, -0.2)
        det = np.linalg.det(b)
        want = -G_DEFAULT ** 2 * np.cos(th) * np.cos(ps) ** 2
        assert det == pytest.approx(want, rel=1e-12)


def test_chain_rhs_matches_finite_differences():
    # one uncontrolled state pushed through the plant for two tiny steps;
    # the analytic chain derivative must match the central difference
    rng = np.random.default_rng(17)
    v = _rand_state(rng, angle=0.3)
    u = ControlInput(0.7, -0.4, 0.9)
    h = 1e-6

    def rhs(t, x):
        return plant_deriv_array(x, u.u0, u.u1, u.u2)

    back = rk4_step(lambda t, x: -rhs(t, x), 0.0, v, h)
    fwd = rk4_step(rhs, 0.0, v, h)
    xi_b = forward_transform(PlantState.from_array(back))
    xi_f = forward_transform(PlantState.from_array(fwd))
    fd1 = (xi_f.xi1 - xi_b.xi1) / (2.0 * h)
    fd2 = (xi_f.xi2 - xi_b.xi2) / (2.0 * h)
    beta = thrust_beta(u.u0)
    d1, d2 = normal_form_rhs(PlantState.from_array(v), u, beta)
    assert np.allclose(fd1, d1, rtol=1e-7, atol=1e-7)
    assert np.allclose(fd2, d2, rtol=1e-7, atol=1e-7)


def test_error_coords_vanish_on_the_manifold():
    for name in ("periodic", "polynomial"):
        modes = scenario_modes(name)
        exo = exo_init(modes)
        alt = AltitudeParams()
        for t in (0.0, 2.2, 11.0):
            sv = embedded_initial_state(modes, alt, t=t)
            s = PlantState.from_array(sv)
            u0 = altitude_control(sv[4], sv[5], alt)
            beta = thrust_beta(u0)
            bd, _ = beta_derivatives(s, ControlInput(u0, 0.0, 0.0), alt,
                                     G_DEFAULT)
            e = error_coords(forward_transform(s),
                             closed_form_state(t, modes), beta, bd, exo)
            assert np.linalg.norm(np.r_[e.e1, e.e2]) < 1e-13


def test_error_coords_hand_case():
    xi = forward_transform(PlantState.from_array(np.zeros(10)))
    xi.xi1[:] = (1.0, 2.0, 3.0, 4.0)
    xi.xi2[:] = (0.0, 0.0, 0.0, 0.0)
    w = np.array([0.5, 1.0, 2.0, 0.0, 0.0, 0.0])
    exo = exo_init(scenario_modes("periodic"))  # rho1 = 0.25
    e = error_coords(xi, w, 2.0, 0.5, exo)
    assert e.e1[0] == 0.5
    assert e.e1[1] == 1.0
    assert e.e1[2] == pytest.approx(3.0 - 2.0 / 2.0, rel=1e-15)
    # e14 = xi14 + (betadot/beta^2) w13 + (rho1/beta) w12
    assert e.e1[3] == pytest.approx(4.0 + 0.125 * 2.0 + 0.125 * 1.0,
                                    rel=1e-15)


def test_error_coords_beta_domain():
    xi = forward_transform(PlantState.from_array(np.zeros(10)))
    exo = exo_init(scenario_modes("periodic"))
    with pytest.raises(ValueError):
        error_coords(xi, np.zeros(6), 0.0, 0.0, exo)
    with pytest.raises(ValueError):
        error_coords(xi, np.zeros(6), 2.5, 0.0, exo, beta_bounds=(0.1, 1.9))


def test_beta_derivatives_against_finite_differences():
    # run the vertical loop for a moment, then compare the analytic
    # derivatives with differences of beta along the trajectory
    alt = AltitudeParams()
    v = np.zeros(10)
    v[6], v[8] = 0.2, -0.15
    dt = 1e-5

    def rhs(t, x):
        u0 = altitude_control(x[4], x[5], alt)
        return plant_deriv_array(x, u0, 0.0, 0.0)

    for k in range(2000):
        v = rk4_step(rhs, k * dt, v, dt)

    def beta_at(x):
        return thrust_beta(altitude_control(x[4], x[5], alt))

    back2 = rk4_step(lambda t, x: -rhs(t, x), 0.0,
                     rk4_step(lambda t, x: -rhs(t, x), 0.0, v, dt), dt)
    back1 = rk4_step(lambda t, x: -rhs(t, x), 0.0, v, dt)
    fwd1 = rk4_step(rhs, 0.0, v, dt)
    fwd2 = rk4_step(rhs, 0.0, fwd1, dt)
    bs = [beta_at(x) for x in (back2, back1, v, fwd1, fwd2)]
    fd_dot = (bs[3] - bs[1]) / (2.0 * dt)
    fd_ddot = (bs[3] - 2.0 * bs[2] + bs[1]) / (dt * dt)

    u0 = altitude_control(v[4], v[5], alt)
    bdot, bddot = beta_derivatives(PlantState.from_array(v),
                                   ControlInput(u0, 0.0, 0.0), alt, G_DEFAULT)
    assert fd_dot == pytest.approx(bdot, rel=1e-4)
    assert fd_ddot == pytest.approx(bddot, rel=1e-3)
