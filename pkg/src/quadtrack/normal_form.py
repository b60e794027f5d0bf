"""Chain-of-integrators coordinates for the two horizontal axes.

For axis 1 (the x channel): xi_11 = x, xi_12 = vx, xi_13 = g sin(theta)
cos(psi), xi_14 = d(xi_13)/dt. Axis 2 (the y channel) uses xi_23 = -g
sin(psi). In these coordinates each axis is a four-integrator chain whose
second link is scaled by beta(t) and whose last link sees the drift q_i plus
the input through the gain row b_i:

    xi_i1_dot = xi_i2
    xi_i2_dot = beta * xi_i3
    xi_i3_dot = xi_i4
    xi_i4_dot = q_i + b_i . (u1, u2)

q_1, q_2 here are the input-free parts only; the angular accelerations enter
exclusively through B = (b_1; b_2), so `q + B u` is the complete derivative.
The transform is invertible while |theta|, |psi| < pi/2.
"""

from dataclasses import dataclass

import numpy as np

from .altitude import AltitudeParams
from .plant import ControlInput, PlantState, G_DEFAULT
from .reference import ExoParams


class EnvelopeError(ValueError):
    """State left the region where the coordinate change is invertible."""


@dataclass
class XiCoords:
    xi1: np.ndarray  # (xi_11 .. xi_14)
    xi2: np.ndarray  # (xi_21 .. xi_24)


@dataclass
class ErrorCoords:
    e1: np.ndarray
    e2: np.ndarray


def forward_transform(s: PlantState, g=G_DEFAULT) -> XiCoords:
    st, ct = np.sin(s.theta), np.cos(s.theta)
    sp, cp = np.sin(s.psi), np.cos(s.psi)
    xi1 = np.array([
        s.x,
        s.vx,
        g * st * cp,
        g * s.dtheta * ct * cp - g * s.dpsi * st * sp,
    ])
    xi2 = np.array([
        s.y,
        s.vy,
        -g * sp,
        -g * s.dpsi * cp,
    ])
    return XiCoords(xi1, xi2)


def inverse_angles(xi13, xi23, g=G_DEFAULT):
    """Recover (theta, psi) from the third chain coordinates.

    psi = asin(-xi23/g), theta = asin(xi13/(g cos psi)). Faults when the
    arguments leave the invertible region.
    """
    if abs(xi23) >= g:
        raise EnvelopeError("inverse_angles: |xi23| = %g reaches g" % abs(xi23))
    psi = np.arcsin(-xi23 / g)
    denom = g * np.cos(psi)
    if abs(xi13) >= denom:
        raise EnvelopeError(
            "inverse_angles: |xi13| = %g reaches g cos(psi) = %g"
            % (abs(xi13), denom))
    theta = np.arcsin(xi13 / denom)
    return float(theta), float(psi)


def drift_and_gain(theta, dtheta, psi, dpsi, g=G_DEFAULT):
    """Input-free drifts q1, q2 and the 2x2 input gain B.

    det B = -g^2 cos(theta) cos(psi)^2, nonzero inside the envelope.
    """
    st, ct = np.sin(theta), np.cos(theta)
    sp, cp = np.sin(psi), np.cos(psi)
    q1 = (-2.0 * g * dpsi * dtheta * ct * sp
          - g * (dtheta * dtheta + dpsi * dpsi) * st * cp)
    q2 = g * dpsi * dpsi * sp
    b = np.array([[g * ct * cp, -g * st * sp],
                  [0.0, -g * cp]])
    return q1, q2, b


def normal_form_rhs(s: PlantState, u: ControlInput, beta, g=G_DEFAULT):
    """Analytic time derivative of both chains along the closed loop.

    Returns (xi1_dot, xi2_dot); the last entries are q_i + b_i . (u1, u2).
    Used by the finite-difference consistency checks.
    """
    xi = forward_transform(s, g)
    q1, q2, b = drift_and_gain(s.theta, s.dtheta, s.psi, s.dpsi, g)
    u12 = np.array([u.u1, u.u2])
    xi1_dot = np.array([xi.xi1[1], beta * xi.xi1[2], xi.xi1[3],
                        q1 + b[0] @ u12])
    xi2_dot = np.array([xi.xi2[1], beta * xi.xi2[2], xi.xi2[3],
                        q2 + b[1] @ u12])
    return xi1_dot, xi2_dot


def error_coords(xi: XiCoords, w, beta, betadot, p: ExoParams,
                 beta_bounds=None) -> ErrorCoords:
    """Tracking-error coordinates for both chains.

    e_i1 = xi_i1 - w_i1, e_i2 = xi_i2 - w_i2, e_i3 = xi_i3 - w_i3 / beta,
    e_i4 = xi_i4 + (betadot/beta^2) w_i3 + (rho_i/beta) w_i2.
    """
    if beta_bounds is not None:
        lo, hi = beta_bounds
        if not (lo < beta < hi):
            raise ValueError("error_coords: beta=%r outside (%r, %r)"
                             % (beta, lo, hi))
    if beta <= 0.0:
        raise ValueError("error_coords: beta must be positive, got %r" % beta)
    w = np.asarray(w, dtype=float)
    bd2 = betadot / (beta * beta)

    def _axis(xiv, wv, rho):
        return np.array([
            xiv[0] - wv[0],
            xiv[1] - wv[1],
            xiv[2] - wv[2] / beta,
            xiv[3] + bd2 * wv[2] + (rho / beta) * wv[1],
        ])

    return ErrorCoords(_axis(xi.xi1, w[:3], p.rho1),
                       _axis(xi.xi2, w[3:], p.rho2))


def beta_derivatives(s: PlantState, u: ControlInput, p: AltitudeParams,
                     g=G_DEFAULT):
    """Analytic (betadot, betaddot) along a closed-loop trajectory.

    Differentiates beta = 1 + u0/g through the altitude law
    u0 = sat(a), a = -r0 (z - z*) - r1 vz, using the plant's vertical
    acceleration and jerk. The passed u supplies the thrust actually applied;
    on a consistent trajectory u.u0 equals the altitude law's output.
    """
    ell = p.ell
    a = -p.r0 * (s.z - p.z_star) - p.r1 * s.vz
    th = np.tanh(a / ell)
    sat_d = 1.0 - th * th            # d sat / da
    sat_dd = -2.0 * th * sat_d / ell  # d^2 sat / da^2

    ct, st = np.cos(s.theta), np.sin(s.theta)
    cp, sp = np.cos(s.psi), np.sin(s.psi)
    thrust = g + u.u0
    zdd = thrust * ct * cp - g
    adot = -p.r0 * s.vz - p.r1 * zdd
    u0dot = sat_d * adot

    # z jerk: d/dt[(g + u0) cos(theta) cos(psi)]
    zddd = (u0dot * ct * cp
            + thrust * (-s.dtheta * st * cp - s.dpsi * ct * sp))
    addot = -p.r0 * zdd - p.r1 * zddd
    u0ddot = sat_dd * adot * adot + sat_d * addot
    return u0dot / g, u0ddot / g
