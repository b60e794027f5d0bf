"""Saturated PD altitude loop and the thrust-induced gain beta(t).

The altitude controller holds z near a constant setpoint with a smoothly
saturated PD law, which keeps |u0| < ell < g and therefore
beta = 1 + u0/g inside (1 - ell/g, 1 + ell/g). That bounded, differentiable
beta is what the horizontal error coordinates are built on.
"""

from dataclasses import dataclass, field

from .numerics import smooth_sat
from .plant import G_DEFAULT


@dataclass
class AltitudeParams:
    r0: float = 15.0
    r1: float = 20.0
    ell: float = field(default=0.9 * G_DEFAULT)
    z_star: float = 0.5

    def validate(self, g=G_DEFAULT):
        if self.r0 <= 0.0 or self.r1 <= 0.0:
            raise ValueError("altitude gains must be positive")
        if not (0.0 < self.ell < g):
            raise ValueError("need 0 < ell < g, got ell=%r g=%r"
                             % (self.ell, g))
        return self

    def beta_bounds(self, g=G_DEFAULT):
        """(beta_min, beta_max) implied by the saturation level."""
        return 1.0 - self.ell / g, 1.0 + self.ell / g


def altitude_control(z, vz, p: AltitudeParams, g=G_DEFAULT):
    """u0 = smooth_sat(-r0 (z - z*) - r1 vz, ell); always inside (-ell, ell)."""
    p.validate(g)
    return smooth_sat(-p.r0 * (z - p.z_star) - p.r1 * vz, p.ell)


def thrust_beta(u0, g=G_DEFAULT):
    """beta = 1 + u0/g. Requires |u0| < g so beta stays positive."""
    if abs(u0) >= g:
        raise ValueError("thrust_beta: |u0| must stay below g (u0=%r, g=%r)"
                         % (u0, g))
    return 1.0 + u0 / g
