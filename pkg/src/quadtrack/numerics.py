"""Dense linear-algebra and integration kernel shared by the other modules.

Everything here is a pure function. Tolerances are module constants and can
be overridden per call where they are actionable.
"""

import warnings

import numpy as np
import scipy.linalg

# Contract tolerances (see the individual functions).
EXPM_REL_TOL = 1e-10
SOLVE_RESIDUAL_TOL = 1e-10
SOLVE_SINGULAR_TOL = 1e-12
HURWITZ_ZERO_TOL = 0.0


class IntegrationError(RuntimeError):
    """Non-finite derivative encountered during a step."""


class SingularMatrixError(ValueError):
    """Linear system is singular to working tolerance."""


def rk4_step(f, t, x, dt):
    """One classical fourth-order Runge-Kutta step for xdot = f(t, x).

    Local error O(dt^5). Raises IntegrationError if any stage derivative is
    non-finite, reporting the time and the first offending component.
    """
    if dt <= 0.0:
        raise ValueError("rk4_step: dt must be positive, got %r" % dt)
    x = np.asarray(x, dtype=float)

    k1 = _stage(f, t, x)
    k2 = _stage(f, t + 0.5 * dt, x + 0.5 * dt * k1)
    k3 = _stage(f, t + 0.5 * dt, x + 0.5 * dt * k2)
    k4 = _stage(f, t + dt, x + dt * k3)
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _stage(f, t, x):
    k = np.asarray(f(t, x), dtype=float)
    if not np.all(np.isfinite(k)):
        bad = int(np.flatnonzero(~np.isfinite(np.atleast_1d(k)))[0])
        raise IntegrationError(
            "non-finite derivative at t=%g (component %d)" % (t, bad))
    return k


def expm(m):
    """Matrix exponential by scaling-and-squaring with a Pade core.

    Relative error <= EXPM_REL_TOL for ||m||_1 <= 1e3 (contract checked by
    the test suite on closed-form cases). Non-square input is a dimension
    fault.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("expm: expected a square matrix, got shape %r"
                         % (m.shape,))
    return scipy.linalg.expm(m)


def solve_linear(a, b, residual_tol=None, singular_tol=None):
    """Solve a x = b by partially pivoted LU elimination.

    Guarantees ||a x - b||_inf <= residual_tol * (1 + ||b||_inf), otherwise a
    SingularMatrixError is raised; a pivot smaller than singular_tol relative
    to ||a||_inf raises the same fault with the pivot magnitude.
    """
    if residual_tol is None:
        residual_tol = SOLVE_RESIDUAL_TOL
    if singular_tol is None:
        singular_tol = SOLVE_SINGULAR_TOL
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("solve_linear: matrix must be square, got shape %r"
                         % (a.shape,))
    flat = b.ndim == 1
    rhs = b.reshape(a.shape[0], -1)
    if rhs.shape[0] != a.shape[0]:
        raise ValueError("solve_linear: shape mismatch %r vs %r"
                         % (a.shape, b.shape))

    with warnings.catch_warnings():
        # the pivot gate below turns exact singularity into a typed fault;
        # scipy's advisory about a zero diagonal would only duplicate it
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(a)
    pivots = np.abs(np.diag(lu))
    scale = max(np.max(np.abs(a)), 1.0)
    if pivots.min() <= singular_tol * scale:
        raise SingularMatrixError(
            "singular to tolerance: smallest pivot %.3e (matrix scale %.3e)"
            % (pivots.min(), scale))
    x = scipy.linalg.lu_solve((lu, piv), rhs)

    residual = np.max(np.abs(a @ x - rhs))
    bound = residual_tol * (1.0 + np.max(np.abs(rhs)))
    if residual > bound:
        raise SingularMatrixError(
            "residual %.3e exceeds %.3e; system too ill-conditioned"
            % (residual, bound))
    return x.reshape(b.shape) if not flat else x[:, 0]


def hurwitz_test(coeffs, zero_tol=None):
    """Routh-Hurwitz stability test for a monic polynomial.

    `coeffs` are descending-order coefficients starting with 1. Returns True
    iff every root has strictly negative real part, decided from the Routh
    table alone (no eigensolving). A zero or negative first-column entry,
    including the degenerate all-zero row, returns False; no epsilon
    substitution is attempted.
    """
    if zero_tol is None:
        zero_tol = HURWITZ_ZERO_TOL
    c = [float(v) for v in coeffs]
    if len(c) == 0:
        raise ValueError("hurwitz_test: empty coefficient list")
    if len(c) < 2:
        raise ValueError("hurwitz_test: degree must be at least 1")
    if abs(c[0] - 1.0) > 1e-12:
        raise ValueError("hurwitz_test: polynomial must be monic, got %r"
                         % c[0])

    width = (len(c) + 1) // 2
    row_prev = [0.0] * width
    row_cur = [0.0] * width
    row_prev[: len(c[0::2])] = c[0::2]
    row_cur[: len(c[1::2])] = c[1::2]

    if row_cur[0] <= zero_tol:
        return False
    for _ in range(len(c) - 2):
        nxt = [0.0] * width
        for j in range(width - 1):
            nxt[j] = (row_cur[0] * row_prev[j + 1]
                      - row_prev[0] * row_cur[j + 1]) / row_cur[0]
        row_prev, row_cur = row_cur, nxt
        if row_cur[0] <= zero_tol:
            return False
    return True


def smooth_sat(v, limit):
    """Smooth saturation limit * tanh(v / limit).

    Odd, strictly monotone, 1-Lipschitz, |result| < limit. Applied
    componentwise for array arguments. limit must be positive.
    """
    if limit <= 0.0:
        raise ValueError("smooth_sat: limit must be positive, got %r" % limit)
    if isinstance(v, np.ndarray):
        return limit * np.tanh(v / limit)
    return limit * float(np.tanh(v / limit))
