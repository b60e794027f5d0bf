"""Quadrotor rigid-body model as a vector field on the 10-dimensional state.

The horizontal accelerations are driven by the tilt angles through the total
thrust (g + u0); the angles are driven directly by the torque inputs. Gravity
g is always a parameter (never hard-coded) so tests may run with g = 1.
"""

from dataclasses import dataclass

import numpy as np

G_DEFAULT = 9.81  # m/s^2


@dataclass
class PlantState:
    """Positions/velocities in meters and m/s, angles in rad, rates in rad/s.

    Field order matches the state vector layout used by the integrator:
    (x, vx, y, vy, z, vz, theta, dtheta, psi, dpsi).
    """
    x: float = 0.0
    vx: float = 0.0
    y: float = 0.0
    vy: float = 0.0
    z: float = 0.0
    vz: float = 0.0
    theta: float = 0.0
    dtheta: float = 0.0
    psi: float = 0.0
    dpsi: float = 0.0

    def as_array(self):
        return np.array([self.x, self.vx, self.y, self.vy, self.z, self.vz,
                         self.theta, self.dtheta, self.psi, self.dpsi])

    @classmethod
    def from_array(cls, v):
        v = np.asarray(v, dtype=float)
        if v.shape != (10,):
            raise ValueError("PlantState.from_array: expected 10 values, "
                             "got shape %r" % (v.shape,))
        return cls(*v.tolist())

    def in_envelope(self, margin=0.0):
        """True when both tilt angles are inside (-pi/2, pi/2) less margin."""
        lim = np.pi / 2.0 - margin
        return abs(self.theta) < lim and abs(self.psi) < lim


@dataclass
class ControlInput:
    """Collective thrust offset u0 (m/s^2) and angular accelerations (rad/s^2)."""
    u0: float = 0.0
    u1: float = 0.0
    u2: float = 0.0


def plant_deriv(s: PlantState, u: ControlInput, g: float = G_DEFAULT):
    """Right-hand side of the rigid-body model, same layout as PlantState.

    xddot = (g + u0) sin(theta) cos(psi)
    yddot = -(g + u0) sin(psi)
    zddot = (g + u0) cos(theta) cos(psi) - g
    thetaddot = u1, psiddot = u2
    """
    vals = (s.x, s.vx, s.y, s.vy, s.z, s.vz, s.theta, s.dtheta, s.psi, s.dpsi,
            u.u0, u.u1, u.u2)
    if not all(np.isfinite(vals)):
        raise ValueError("plant_deriv: non-finite state or input")
    thrust = g + u.u0
    st, ct = np.sin(s.theta), np.cos(s.theta)
    sp, cp = np.sin(s.psi), np.cos(s.psi)
    return np.array([
        s.vx,
        thrust * st * cp,
        s.vy,
        -thrust * sp,
        s.vz,
        thrust * ct * cp - g,
        s.dtheta,
        u.u1,
        s.dpsi,
        u.u2,
    ])


def plant_deriv_array(sv, u0, u1, u2, g=G_DEFAULT):
    """plant_deriv on a raw 10-vector; the integrator's hot path."""
    thrust = g + u0
    st = np.sin(sv[6]); ct = np.cos(sv[6])
    sp = np.sin(sv[8]); cp = np.cos(sv[8])
    return np.array([
        sv[1], thrust * st * cp,
        sv[3], -thrust * sp,
        sv[5], thrust * ct * cp - g,
        sv[7], u1,
        sv[9], u2,
    ])
