"""Disturbance-generator copy embedded in the controller (internal model).

Two independent three-dimensional blocks, one per horizontal axis. Each block
is a stable companion filter F_i driven through G_i = (0,0,1)^T; the output
injection Gamma_i = (1, 3 - rho_i, 3) places the spectrum of
Phi_i = F_i + G_i Gamma_i exactly on the reference generator's block
(characteristic polynomial s^3 + rho_i s). Deactivating the feedback
(Gamma = 0) leaves a plain stable filter; the polynomial reference case runs
that way.

The steady-state interconnection matrix Sigma (eta = Sigma w on the ideal
steady motion) is computed once per scenario for verification and metrics; the
runtime loop never needs it.
"""

from dataclasses import dataclass, field

import numpy as np

from .plant import G_DEFAULT

REGULATOR_TOL = 1e-9


class RegulatorError(RuntimeError):
    """The steady-state matrix equations have no solution to tolerance."""


@dataclass
class InternalModel:
    f: np.ndarray          # 6x6 block diagonal
    g: np.ndarray          # 6x2 block diagonal
    gamma: np.ndarray      # 2x6 block diagonal (zero when deactivated)
    rho1: float
    rho2: float
    active: bool
    eta: np.ndarray = field(default_factory=lambda: np.zeros(6))


@dataclass
class RegulatorSolution:
    sigma: np.ndarray      # 6x6
    psi: np.ndarray        # 2x6
    residual_sylvester: float
    residual_output: float


def build_internal_model(rho1, rho2, active=True) -> InternalModel:
    if rho1 < 0.0 or rho2 < 0.0:
        raise ValueError("build_internal_model: rho must be nonnegative")
    f = np.zeros((6, 6))
    g = np.zeros((6, 2))
    gamma = np.zeros((2, 6))
    for i, rho in enumerate((rho1, rho2)):
        k = 3 * i
        f[k, k + 1] = 1.0
        f[k + 1, k + 2] = 1.0
        f[k + 2, k:k + 3] = (-1.0, -3.0, -3.0)
        g[k + 2, i] = 1.0
        if active:
            gamma[i, k:k + 3] = (1.0, 3.0 - rho, 3.0)
    return InternalModel(f, g, gamma, float(rho1), float(rho2), active)


def im_deriv(m: InternalModel, ubar, eta=None):
    """eta_dot = F eta + G (Gamma eta + ubar); zero when the model is off.

    A disabled model is frozen, not merely disconnected: eta holds its
    initial value so logs and terminal diagnostics stay meaningful.
    `eta` defaults to the model's own state; the simulator passes integrator
    stage values explicitly.
    """
    if eta is None:
        eta = m.eta
    if not m.active:
        return np.zeros(6)
    return m.f @ eta + m.g @ (m.gamma @ eta + np.asarray(ubar, dtype=float))


def total_control(m: InternalModel, ubar, eta=None):
    """The emitted angular-acceleration pair u = Gamma eta + ubar."""
    if eta is None:
        eta = m.eta
    return m.gamma @ eta + np.asarray(ubar, dtype=float)


def psi_matrix(rho1, rho2, g=G_DEFAULT):
    """Steady-state feedforward rows: (0,0,-rho1/g,0,0,0) and (0,0,0,0,0,rho2/g).

    The sign flip between the axes mirrors the opposite signs of the two
    input-gain rows at hover.
    """
    psi = np.zeros((2, 6))
    psi[0, 2] = -rho1 / g
    psi[1, 5] = rho2 / g
    return psi


def solve_regulator(s, f, g, gamma, psi, tol=None) -> RegulatorSolution:
    """Solve Sigma S = (F + G Gamma) Sigma together with Gamma Sigma = Psi.

    Both constraints are vectorized (row-major) and stacked into one 48x36
    least-squares system; the stacked system is rank-deficient in general, so
    a residual gate certifies success instead of assuming exact solvability.
    Raises RegulatorError reporting both residuals when either exceeds `tol`.
    """
    if tol is None:
        tol = REGULATOR_TOL
    s = np.asarray(s, dtype=float)
    phi = np.asarray(f, dtype=float) + np.asarray(g, dtype=float) @ gamma
    n = s.shape[0]
    eye = np.eye(n)

    # vec() below is row-major: vec(Sigma S) = (I kron S^T) m,
    # vec(Phi Sigma) = (Phi kron I) m, vec(Gamma Sigma) = (Gamma kron I) m.
    top = np.kron(eye, s.T) - np.kron(phi, eye)
    bottom = np.kron(np.asarray(gamma, dtype=float), eye)
    lhs = np.vstack([top, bottom])
    rhs = np.concatenate([np.zeros(n * n), np.asarray(psi, float).ravel()])

    m, *_ = np.linalg.lstsq(lhs, rhs, rcond=None)
    sigma = m.reshape(n, n)

    res_syl = np.max(np.abs(sigma @ s - phi @ sigma))
    res_out = np.max(np.abs(gamma @ sigma - psi))
    if res_syl > tol or res_out > tol:
        raise RegulatorError(
            "no regulator solution to tolerance %g: "
            "|Sigma S - Phi Sigma| = %.3e, |Gamma Sigma - Psi| = %.3e"
            % (tol, res_syl, res_out))
    return RegulatorSolution(sigma, np.asarray(psi, float), res_syl, res_out)
