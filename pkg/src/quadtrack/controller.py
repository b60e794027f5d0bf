"""Horizontal control laws and gain certification.

Two laws share the same error-chain gains K = (k1..k4):

* `robust_control` is the implementable output-feedback law. It feeds back
  the observer estimates through the constant hover input gain
  Bbar = diag(g, -g), saturates componentwise at level nu, and adds the
  internal-model term Gamma eta.
* `ideal_control` is the full-information benchmark. It cancels the exact
  drift along the error chains, so each chain closes to
  e_i4_dot = -(k1 e_i1 + k2 e_i2 + k3 e_i3 + k4 e_i4) regardless of the
  internal-model state.

`validate_gains` certifies the pieces the robust law relies on: the closed
quartic s^4 + k4 s^3 + k3 s^2 + k2 s + k1 is Hurwitz, it stays Hurwitz with
the thrust factor beta multiplying the position and velocity gains at both
ends of the admissible range, and the hover approximation of the input gain
is close in the sense ||I - B(theta, psi) Bbar^{-1}||_1 < 1 over the operating
angle box.
"""

from dataclasses import dataclass, field

import numpy as np

from .altitude import AltitudeParams, altitude_control, thrust_beta
from .internal_model import InternalModel, RegulatorSolution, total_control
from .normal_form import (beta_derivatives, drift_and_gain, error_coords,
                          forward_transform)
from .numerics import hurwitz_test, smooth_sat, solve_linear
from .plant import ControlInput, G_DEFAULT, PlantState
from .reference import ExoParams

DEFAULT_K = (100.0, 100.0, 100.0, 10.0)
DEFAULT_NU = 100.0


class CertificationError(ValueError):
    """Gain certification failed; the loop must not be run."""


@dataclass
class ControllerParams:
    k: np.ndarray = DEFAULT_K
    nu: float = DEFAULT_NU
    sign_convention: str = "negative"

    def __post_init__(self):
        self.k = np.asarray(self.k, dtype=float)
        if self.k.shape != (4,):
            raise ValueError("ControllerParams: k must be (k1, k2, k3, k4)")
        if self.nu <= 0.0:
            raise ValueError("ControllerParams: nu must be positive")
        if self.sign_convention != "negative":
            # The gains are magnitudes; the minus signs live in the law.
            raise ValueError("ControllerParams: gains are defined for the "
                             "negative-feedback convention only")

    def closed_poly(self, beta=1.0):
        """[1, k4, k3, beta k2, beta k1]; beta=1 gives the nominal quartic."""
        k1, k2, k3, k4 = self.k
        return [1.0, k4, k3, beta * k2, beta * k1]


def bbar_matrix(g=G_DEFAULT):
    """Hover input gain diag(g, -g), the design-time stand-in for B."""
    return np.array([[g, 0.0], [0.0, -g]])


def gain_defect(theta, psi, g=G_DEFAULT):
    """I - B(theta, psi) Bbar^{-1}; small 1-norm certifies the hover gain."""
    _, _, b = drift_and_gain(theta, 0.0, psi, 0.0, g)
    return np.eye(2) - b @ np.linalg.inv(bbar_matrix(g))


@dataclass
class CertificationReport:
    quartic: list
    quartic_hurwitz: bool
    beta_screen: dict            # beta -> bool for the screened quartics
    gain_gap: float              # grid max of ||I - B Bbar^{-1}||_1
    gain_gap_at: tuple           # (theta, psi) attaining the max
    grid_n: int
    angle_limit: float

    def ok(self):
        return (self.quartic_hurwitz
                and all(self.beta_screen.values())
                and self.gain_gap < 1.0)

    def summary(self):
        lines = ["quartic %s: %s" % (self.quartic,
                                     "Hurwitz" if self.quartic_hurwitz
                                     else "NOT Hurwitz")]
        for beta, okb in sorted(self.beta_screen.items()):
            lines.append("beta=%g screen: %s"
                         % (beta, "Hurwitz" if okb else "NOT Hurwitz"))
        lines.append("gain gap max %.6f at theta=%g psi=%g "
                     "(grid %dx%d, |angle| <= %g)"
                     % (self.gain_gap, self.gain_gap_at[0],
                        self.gain_gap_at[1], self.grid_n, self.grid_n,
                        self.angle_limit))
        return "\n".join(lines)


def validate_gains(params: ControllerParams, beta_bounds=(0.1, 1.9),
                   angle_limit=0.5, grid_n=101, g=G_DEFAULT):
    """Certify the gain set; returns the report without raising.

    Callers that must not proceed on failure check report.ok().
    """
    quartic = params.closed_poly()
    screen = {}
    for beta in beta_bounds:
        screen[float(beta)] = hurwitz_test(params.closed_poly(beta))

    angles = np.linspace(-angle_limit, angle_limit, grid_n)
    ct = np.cos(angles)
    st = np.sin(angles)
    # ||I - B Bbar^{-1}||_1 = max(|1 - ct cp|, |st sp| + |1 - cp|); the
    # closed form of the 2x2 column sums, verified against gain_defect.
    col1 = np.abs(1.0 - np.outer(ct, ct))
    col2 = np.abs(np.outer(st, st)) + np.abs(1.0 - ct)[np.newaxis, :]
    norms = np.maximum(col1, col2)
    flat = int(np.argmax(norms))
    it, ip = np.unravel_index(flat, norms.shape)
    return CertificationReport(
        quartic=quartic,
        quartic_hurwitz=hurwitz_test(quartic),
        beta_screen=screen,
        gain_gap=float(norms[it, ip]),
        gain_gap_at=(float(angles[it]), float(angles[ip])),
        grid_n=grid_n,
        angle_limit=angle_limit,
    )


def robust_control(o1, o2, eta, im: InternalModel, params: ControllerParams,
                   g=G_DEFAULT):
    """Saturated output-feedback law from the two observer states.

    ubar_i = sat_nu[ Bbar^{-1}_ii (-sigma_i - K . ehat_i) ],
    u = Gamma eta + ubar. Returns (ubar, u).
    """
    kvec = params.k
    inner1 = -o1.sigma - float(kvec @ o1.ehat)
    inner2 = -o2.sigma - float(kvec @ o2.ehat)
    v = np.array([inner1 / g, inner2 / (-g)])
    ubar = smooth_sat(v, params.nu)
    return ubar, total_control(im, ubar, eta)


def transformed_drift(s: PlantState, w, exo: ExoParams, psi,
                      alt: AltitudeParams, g=G_DEFAULT):
    """Drift of the error chains and supporting quantities at one state.

    Returns (qt1, qt2, b, beta, betadot) where

        qt_i = q_i + (betaddot/beta^2 - 2 betadot^2/beta^3 + rho_i/beta) w_i3
                   - (2 rho_i betadot / beta^2) w_i2 + b_i . (Psi w)

    so that along the loop e_i4_dot = qt_i + b_i . (Gamma etat + ubar) with
    etat = eta - Sigma w. The altitude input is recomputed from (z, vz); on a
    consistent trajectory this equals the applied u0.
    """
    w = np.asarray(w, dtype=float)
    u0 = altitude_control(s.z, s.vz, alt, g)
    beta = thrust_beta(u0, g)
    betadot, betaddot = beta_derivatives(s, ControlInput(u0, 0.0, 0.0), alt, g)
    q1, q2, b = drift_and_gain(s.theta, s.dtheta, s.psi, s.dpsi, g)

    vw = psi @ w
    b2 = beta * beta
    common = betaddot / b2 - 2.0 * betadot * betadot / (b2 * beta)
    qt1 = (q1 + (common + exo.rho1 / beta) * w[2]
           - (2.0 * exo.rho1 * betadot / b2) * w[1] + float(b[0] @ vw))
    qt2 = (q2 + (common + exo.rho2 / beta) * w[5]
           - (2.0 * exo.rho2 * betadot / b2) * w[4] + float(b[1] @ vw))
    return qt1, qt2, b, beta, betadot


def ideal_control(s: PlantState, w, eta, im: InternalModel,
                  sol: RegulatorSolution, exo: ExoParams,
                  alt: AltitudeParams, params: ControllerParams,
                  g=G_DEFAULT):
    """Full-information law that closes each chain to e_dot4 = -K . e.

    Cancels the transformed drift through the true input gain B, and uses
    -Gamma (eta - Sigma w) to make the emitted u independent of the
    internal-model transient. Returns (ubar, u).
    """
    w = np.asarray(w, dtype=float)
    qt1, qt2, b, beta, betadot = transformed_drift(s, w, exo, sol.psi, alt, g)
    xi = forward_transform(s, g)
    err = error_coords(xi, w, beta, betadot, exo)

    kvec = params.k
    rhs = np.array([-qt1 - float(kvec @ err.e1),
                    -qt2 - float(kvec @ err.e2)])
    etat = eta - sol.sigma @ w
    ubar = -im.gamma @ etat + solve_linear(b, rhs)
    return ubar, total_control(im, ubar, eta)
