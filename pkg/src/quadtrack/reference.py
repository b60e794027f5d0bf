"""Reference trajectory generator for the two horizontal axes.

Each axis carries a three-dimensional linear block
    wdot_i = (w_i2, w_i3, -rho_i * w_i2)
whose output w_i1 is the desired position. rho_i = omega^2 generates
sinusoids around an offset; rho_i = 0 generates quadratic polynomials in
time. The simulator evaluates w(t) in closed form (the blocks are linear with
known solutions); the ODE form exists for integration oracles and
diagnostics. Mixed modes per axis are allowed since the blocks are
independent.
"""

from dataclasses import dataclass

import numpy as np


@dataclass
class PeriodicMode:
    """x*(t) = offset + amplitude * sin(omega t + phase)."""
    offset: float
    amplitude: float
    omega: float
    phase: float


@dataclass
class PolynomialMode:
    """x*(t) = c0 + c1 t + c2 t^2."""
    c0: float
    c1: float
    c2: float


@dataclass
class ExoParams:
    rho1: float
    rho2: float
    w0: np.ndarray  # initial 6-vector, blocks (w11,w12,w13, w21,w22,w23)

    def __post_init__(self):
        self.w0 = np.asarray(self.w0, dtype=float)
        if self.w0.shape != (6,):
            raise ValueError("ExoParams: w0 must have 6 components")
        if self.rho1 < 0.0 or self.rho2 < 0.0:
            raise ValueError("ExoParams: rho must be nonnegative")


# Scenario presets exposed to the CLI by name.
def scenario_modes(name):
    if name == "periodic":
        return (PeriodicMode(0.1, 0.3, 0.5, 0.7),
                PeriodicMode(0.2, 0.4, 0.6, 0.8))
    if name == "polynomial":
        return (PolynomialMode(0.1, 0.3, 0.5),
                PolynomialMode(0.2, 0.4, 0.6))
    raise ValueError("unknown scenario preset %r" % name)


def _axis_init(mode):
    """(rho, initial 3-block) for one axis."""
    if isinstance(mode, PeriodicMode):
        if mode.omega <= 0.0:
            raise ValueError("periodic mode requires omega > 0, got %r"
                             % mode.omega)
        s, c = np.sin(mode.phase), np.cos(mode.phase)
        a, om = mode.amplitude, mode.omega
        return mode.omega ** 2, np.array(
            [mode.offset + a * s, a * om * c, -a * om * om * s])
    if isinstance(mode, PolynomialMode):
        return 0.0, np.array([mode.c0, mode.c1, 2.0 * mode.c2])
    raise TypeError("unsupported reference mode %r" % (mode,))


def exo_init(modes):
    """ExoParams for an (axis1, axis2) mode pair."""
    m1, m2 = modes
    rho1, b1 = _axis_init(m1)
    rho2, b2 = _axis_init(m2)
    return ExoParams(rho1, rho2, np.concatenate([b1, b2]))


def exo_deriv(w, p: ExoParams):
    """Block field wdot_i = (w_i2, w_i3, -rho_i w_i2) stacked over both axes."""
    return np.array([w[1], w[2], -p.rho1 * w[1],
                     w[4], w[5], -p.rho2 * w[4]])


def _axis_state(t, mode):
    if isinstance(mode, PeriodicMode):
        a, om = mode.amplitude, mode.omega
        arg = om * t + mode.phase
        s, c = np.sin(arg), np.cos(arg)
        return np.array([mode.offset + a * s, a * om * c, -a * om * om * s])
    if isinstance(mode, PolynomialMode):
        return np.array([mode.c0 + mode.c1 * t + mode.c2 * t * t,
                         mode.c1 + 2.0 * mode.c2 * t,
                         2.0 * mode.c2])
    raise TypeError("unsupported reference mode %r" % (mode,))


def closed_form_state(t, modes):
    """Exact 6-vector w(t); the simulator's propagation path."""
    return np.concatenate([_axis_state(t, modes[0]), _axis_state(t, modes[1])])


def closed_form_reference(t, modes):
    """(x*, y*) at time t, analytically."""
    w = closed_form_state(t, modes)
    return w[0], w[3]


def s_matrix(rho):
    """3x3 generator block with characteristic polynomial s^3 + rho s."""
    return np.array([[0.0, 1.0, 0.0],
                     [0.0, 0.0, 1.0],
                     [0.0, -float(rho), 0.0]])


def s_block(p: ExoParams):
    """Block-diagonal 6x6 generator for both axes."""
    s = np.zeros((6, 6))
    s[:3, :3] = s_matrix(p.rho1)
    s[3:, 3:] = s_matrix(p.rho2)
    return s
