"""Closed-loop assembly: plant, altitude loop, exosystem, internal model,
observers, robust controller.

Stepping scheme (two-rate):

* plant + internal model integrate jointly with rk4 at dt_plant, the three
  control channels held zero-order over the step;
* the exosystem is evaluated in closed form at the sample times, never
  integrated, so reference values carry no accumulation error;
* the two observers advance by the exact discretization of their frozen-beta
  affine dynamics at dt_observer <= dt_plant, with the measured tracking
  error interpolated over the step by the cubic Hermite of its endpoint
  values and rates. A plain hold of the measurement destabilizes the loop at
  any practical step size; the interpolant is what makes the high-gain
  observer sampled-data viable.

The observer states live in the scaled coordinates throughout the run. At
nominal gains the physical components span twenty orders of magnitude, and
converting back and forth each step would re-round sigma at measurement
scale; scaling out once and logging the physical values as a product keeps
the per-step arithmetic noise at the exact-step floor.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .altitude import AltitudeParams, altitude_control, thrust_beta
from .controller import (CertificationError, ControllerParams, bbar_matrix,
                         robust_control, transformed_drift, validate_gains)
from .internal_model import (RegulatorError, build_internal_model,
                             psi_matrix, solve_regulator)
from .normal_form import beta_derivatives, inverse_angles
from .numerics import rk4_step
from .observer import (ObserverGains, ObserverState, measurement_cubic,
                       propagator, step_scaled, subdivide_poly)
from .plant import ControlInput, G_DEFAULT, PlantState, plant_deriv_array
from .reference import (closed_form_state, exo_init, s_block, scenario_modes)

# Transform-invertibility margin: abort when |theta| or |psi| reaches
# pi/2 - ENVELOPE_MARGIN.
ENVELOPE_MARGIN = 1e-3

LOG_COLUMNS = (
    "t", "x", "y", "z", "theta", "psi",
    "x_ref", "y_ref", "z_ref", "ex", "ey", "ez",
    "u0", "u1", "u2", "beta",
    "eta1", "eta2", "eta3", "eta4", "eta5", "eta6",
    "ehat11", "ehat12", "ehat13", "ehat14", "sigma1",
    "ehat21", "ehat22", "ehat23", "ehat24", "sigma2",
    "env_ok",
)
COL = {name: i for i, name in enumerate(LOG_COLUMNS)}

_DEF_ALT = AltitudeParams()
DEFAULT_TILT_FLOOR = G_DEFAULT / (G_DEFAULT + _DEF_ALT.ell)


class EnvelopeAbort(RuntimeError):
    """|theta| or |psi| reached the invertibility margin; run stopped."""


@dataclass
class LogRecord:
    """One sample of the closed loop; the row schema of the log array."""
    t: float
    x: float
    y: float
    z: float
    theta: float
    psi: float
    x_ref: float
    y_ref: float
    z_ref: float
    ex: float
    ey: float
    ez: float
    u0: float
    u1: float
    u2: float
    beta: float
    eta: np.ndarray          # (6,)
    ehat1: np.ndarray        # (4,)
    sigma1: float
    ehat2: np.ndarray        # (4,)
    sigma2: float
    env_ok: bool

    @classmethod
    def from_row(cls, row):
        row = np.asarray(row, dtype=float)
        return cls(*row[:16], row[16:22].copy(), row[22:26].copy(),
                   float(row[26]), row[27:31].copy(), float(row[31]),
                   bool(row[32] > 0.5))

    def to_row(self):
        out = np.empty(len(LOG_COLUMNS))
        out[:16] = (self.t, self.x, self.y, self.z, self.theta, self.psi,
                    self.x_ref, self.y_ref, self.z_ref, self.ex, self.ey,
                    self.ez, self.u0, self.u1, self.u2, self.beta)
        out[16:22] = self.eta
        out[22:26] = self.ehat1
        out[26] = self.sigma1
        out[27:31] = self.ehat2
        out[31] = self.sigma2
        out[32] = 1.0 if self.env_ok else 0.0
        return out


def log_records(log):
    """Iterate a log array as LogRecord objects."""
    for row in np.asarray(log, dtype=float):
        yield LogRecord.from_row(row)


@dataclass
class SimConfig:
    scenario: str = "periodic"           # periodic | polynomial | custom
    t_final: float = 30.0
    dt_plant: float = 1e-3
    dt_observer: float = None            # defaults to dt_plant
    g: float = G_DEFAULT
    observer_preset: str = "paper"       # paper | fast
    kappa: float = None                  # overrides the preset value
    ladder: tuple = (1.0, 1.0, 1.0, 1.0)
    internal_model: bool = True
    initial_state: np.ndarray = field(
        default_factory=lambda: np.zeros(10))
    initial_eta: np.ndarray = field(
        default_factory=lambda: np.zeros(6))
    alt: AltitudeParams = field(default_factory=AltitudeParams)
    ctrl: ControllerParams = field(default_factory=ControllerParams)
    modes: tuple = None                  # required when scenario == "custom"
    out: str = ""
    transient_fraction: float = 0.75

    def validate(self):
        if self.t_final <= 0.0:
            raise ValueError("SimConfig: t_final must be positive")
        if self.dt_plant <= 0.0:
            raise ValueError("SimConfig: dt_plant must be positive")
        dto = self.dt_observer
        if dto is not None:
            if dto <= 0.0 or dto > self.dt_plant * (1.0 + 1e-12):
                raise ValueError("SimConfig: need 0 < dt_observer <= dt_plant")
            ratio = self.dt_plant / dto
            if abs(ratio - round(ratio)) > 1e-9:
                raise ValueError("SimConfig: dt_plant must be an integer "
                                 "multiple of dt_observer")
        if self.scenario not in ("periodic", "polynomial", "custom"):
            raise ValueError("SimConfig: unknown scenario %r" % self.scenario)
        if self.scenario == "custom" and self.modes is None:
            raise ValueError("SimConfig: custom scenario requires modes")
        if self.observer_preset not in ("paper", "fast"):
            raise ValueError("SimConfig: unknown observer preset %r"
                             % self.observer_preset)
        if self.kappa is not None and self.kappa <= 0.0:
            raise ValueError("SimConfig: kappa must be positive")
        if not (0.0 < self.transient_fraction < 1.0):
            raise ValueError("SimConfig: transient_fraction in (0, 1)")
        self.initial_state = np.asarray(self.initial_state, dtype=float)
        if self.initial_state.shape != (10,):
            raise ValueError("SimConfig: initial_state must have the 10 "
                             "PlantState components")
        self.initial_eta = np.asarray(self.initial_eta, dtype=float)
        if self.initial_eta.shape != (6,):
            raise ValueError("SimConfig: initial_eta must have 6 components")
        self.alt.validate(self.g)
        return self

    def substeps(self):
        if self.dt_observer is None:
            return 1
        return max(1, int(round(self.dt_plant / self.dt_observer)))

    def resolve_modes(self):
        if self.scenario == "custom":
            return tuple(self.modes)
        return scenario_modes(self.scenario)

    def observer_gains(self) -> ObserverGains:
        from .observer import DEFAULT_KAPPA, FAST_KAPPA
        if self.kappa is not None:
            kap = self.kappa
        else:
            kap = DEFAULT_KAPPA if self.observer_preset == "paper" \
                else FAST_KAPPA
        lo, hi = self.alt.beta_bounds(self.g)
        return ObserverGains.from_recursion(kap, self.ladder, lo, hi)


def embedded_initial_state(modes, alt=None, g=G_DEFAULT, t=0.0):
    """Plant state on the zero-error manifold at time t.

    Places the vehicle at hover altitude with the attitude and rates that
    make all eight tracking-error coordinates vanish, so a run started here
    has no transient beyond what the estimators inject. Closed form: at
    z = z_star with vz = 0 the altitude loop is at rest (u0 = 0, beta = 1),
    the angles come from inverting the chain heads xi_i3 = w_i3, and the
    rates follow from xi_i4 = -betadot w_i3 - rho_i w_i2.
    """
    if alt is None:
        alt = AltitudeParams()
    w = closed_form_state(t, modes)
    exo = exo_init(modes)
    theta, psi = inverse_angles(w[2], w[5], g)
    rest = PlantState(w[0], w[1], w[3], w[4], alt.z_star, 0.0,
                      theta, 0.0, psi, 0.0)
    betadot, _ = beta_derivatives(rest, ControlInput(0.0, 0.0, 0.0), alt, g)
    xi14 = -betadot * w[2] - exo.rho1 * w[1]
    xi24 = -betadot * w[5] - exo.rho2 * w[4]
    dpsi = -xi24 / (g * math.cos(psi))
    dtheta = (xi14 + g * dpsi * math.sin(theta) * math.sin(psi)) / (
        g * math.cos(theta) * math.cos(psi))
    return np.array([w[0], w[1], w[3], w[4], alt.z_star, 0.0,
                     theta, dtheta, psi, dpsi])


@dataclass
class Metrics:
    tail_rms_ex: float
    tail_rms_ey: float
    max_abs_ez: float
    max_abs_theta: float
    max_abs_psi: float
    min_tilt: float
    tilt_floor: float
    envelope_violations: int
    eta_terminal_error: float
    tail_start: float

    def as_dict(self):
        return {
            "tail_rms_ex": self.tail_rms_ex,
            "tail_rms_ey": self.tail_rms_ey,
            "max_abs_ez": self.max_abs_ez,
            "max_abs_theta": self.max_abs_theta,
            "max_abs_psi": self.max_abs_psi,
            "min_tilt": self.min_tilt,
            "tilt_floor": self.tilt_floor,
            "envelope_violations": self.envelope_violations,
            "eta_terminal_error": self.eta_terminal_error,
            "tail_start": self.tail_start,
        }


def metrics(log, transient_fraction=0.75, tilt_floor=DEFAULT_TILT_FLOOR,
            sol=None, modes=None) -> Metrics:
    """Summary statistics of a log array.

    RMS errors and max |ez| run over the tail window starting at
    transient_fraction of the horizon; angle extrema, the tilt minimum and
    the violation count cover the whole run. Violations are recounted from
    the angle columns against tilt_floor, or-ed with a cleared env_ok flag,
    so a log assembled elsewhere is judged by the same rule the simulator
    applied. The terminal internal-model error needs the regulator solution
    and the scenario modes; it is NaN when either is missing.
    """
    log = np.asarray(log, dtype=float)
    if log.ndim != 2 or log.shape[0] == 0 or log.shape[1] != len(LOG_COLUMNS):
        raise ValueError("metrics: log must be a nonempty array with %d "
                         "columns" % len(LOG_COLUMNS))
    t = log[:, COL["t"]]
    t0, t1 = t[0], t[-1]
    tail_start = t0 + transient_fraction * (t1 - t0)
    tail = t >= tail_start - 1e-12
    if not np.any(tail):
        tail = np.zeros_like(t, dtype=bool)
        tail[-1] = True

    theta = log[:, COL["theta"]]
    psi = log[:, COL["psi"]]
    tilt = np.cos(theta) * np.cos(psi)
    bad = (tilt < tilt_floor) | (log[:, COL["env_ok"]] < 0.5)

    eta_err = float("nan")
    if sol is not None and modes is not None:
        w_end = closed_form_state(t1, modes)
        eta_end = log[-1, COL["eta1"]:COL["eta1"] + 6]
        eta_err = float(np.linalg.norm(eta_end - sol.sigma @ w_end))

    return Metrics(
        tail_rms_ex=float(np.sqrt(np.mean(log[tail, COL["ex"]] ** 2))),
        tail_rms_ey=float(np.sqrt(np.mean(log[tail, COL["ey"]] ** 2))),
        max_abs_ez=float(np.max(np.abs(log[tail, COL["ez"]]))),
        max_abs_theta=float(np.max(np.abs(theta))),
        max_abs_psi=float(np.max(np.abs(psi))),
        min_tilt=float(np.min(tilt)),
        tilt_floor=float(tilt_floor),
        envelope_violations=int(np.count_nonzero(bad)),
        eta_terminal_error=eta_err,
        tail_start=float(tail_start),
    )


def simulate(cfg: SimConfig, diagnostics=False):
    """Run the closed loop; returns (log, metrics).

    With diagnostics=True returns (log, metrics, diag) where diag carries
    per-sample quantities that need the full state and so cannot be
    recovered from the CSV columns: the true lumped drift each observer's
    sigma estimates, the internal-model error norm, and the pre-mixing ubar.

    Raises CertificationError when the gain checks fail, EnvelopeAbort when
    an angle reaches pi/2 - 1e-3, and IntegrationError on non-finite state.
    """
    cfg.validate()
    g = cfg.g
    modes = cfg.resolve_modes()
    exo = exo_init(modes)
    sblk = s_block(exo)
    im = build_internal_model(exo.rho1, exo.rho2, active=cfg.internal_model)
    psi_mat = psi_matrix(exo.rho1, exo.rho2, g)
    try:
        sol = solve_regulator(sblk, im.f, im.g, im.gamma, psi_mat)
    except RegulatorError:
        # With the internal model off, Gamma Sigma = Psi has no solution;
        # internal-model diagnostics are then reported as NaN.
        sol = None

    beta_lo, beta_hi = cfg.alt.beta_bounds(g)
    report = validate_gains(cfg.ctrl, beta_bounds=(beta_lo, beta_hi), g=g)
    if not report.ok():
        raise CertificationError(report.summary())
    gains = cfg.observer_gains().validate()

    tilt_floor = g / (g + cfg.alt.ell)
    angle_cap = math.pi / 2.0 - ENVELOPE_MARGIN
    dt = cfg.dt_plant
    nsub = cfg.substeps()
    n = int(round(cfg.t_final / dt))
    bbar = bbar_matrix(g)

    fmat, gmat, gam = im.f, im.g, im.gamma
    hold = {"u0": 0.0, "u1": 0.0, "u2": 0.0, "ubar": np.zeros(2)}

    im_active = im.active

    def joint_rhs(tt, v):
        d = np.empty(16)
        d[:10] = plant_deriv_array(v[:10], hold["u0"], hold["u1"],
                                   hold["u2"], g)
        if im_active:
            eta_v = v[10:]
            d[10:] = fmat @ eta_v + gmat @ (gam @ eta_v + hold["ubar"])
        else:
            # A disabled internal model is frozen, not merely disconnected.
            d[10:] = 0.0
        return d

    joint = np.empty(16)
    joint[:10] = cfg.initial_state
    joint[10:] = cfg.initial_eta
    z1s = np.zeros(5)
    z2s = np.zeros(5)
    dsc = gains.dsc

    log = np.empty((n + 1, len(LOG_COLUMNS)))
    if diagnostics:
        diag = {
            "sigma_true": np.full((n + 1, 2), np.nan),
            "eta_err": np.full(n + 1, np.nan),
            "ubar": np.empty((n + 1, 2)),
        }

    w = closed_form_state(0.0, modes)
    for k in range(n + 1):
        t = k * dt
        sv = joint[:10]
        eta = joint[10:]
        theta, psi_a = sv[6], sv[8]

        if abs(theta) >= angle_cap or abs(psi_a) >= angle_cap:
            raise EnvelopeAbort(
                "attitude left the invertible envelope at t=%.6f "
                "(theta=%.4f, psi=%.4f)" % (t, theta, psi_a))

        u0 = altitude_control(sv[4], sv[5], cfg.alt, g)
        beta = thrust_beta(u0, g)
        p1 = z1s * dsc
        p2 = z2s * dsc
        o1 = ObserverState(p1[:4], p1[4])
        o2 = ObserverState(p2[:4], p2[4])
        ubar, u12 = robust_control(o1, o2, eta, im, cfg.ctrl, g)

        tilt = math.cos(theta) * math.cos(psi_a)
        env_ok = (tilt >= tilt_floor) and (beta_lo < beta < beta_hi)

        row = log[k]
        row[0] = t
        row[1] = sv[0]
        row[2] = sv[2]
        row[3] = sv[4]
        row[4] = theta
        row[5] = psi_a
        row[6] = w[0]
        row[7] = w[3]
        row[8] = cfg.alt.z_star
        row[9] = sv[0] - w[0]
        row[10] = sv[2] - w[3]
        row[11] = sv[4] - cfg.alt.z_star
        row[12] = u0
        row[13] = u12[0]
        row[14] = u12[1]
        row[15] = beta
        row[16:22] = eta
        row[22:26] = p1[:4]
        row[26] = p1[4]
        row[27:31] = p2[:4]
        row[31] = p2[4]
        row[32] = 1.0 if env_ok else 0.0

        if diagnostics:
            diag["ubar"][k] = ubar
            state = PlantState.from_array(sv)
            qt1, qt2, bmat, _, _ = transformed_drift(
                state, w, exo, psi_mat, cfg.alt, g)
            # The drift qt already folds in the Psi w feedforward, so the
            # residual each sigma estimator tracks is qt + b (Gamma eta -
            # Psi w) + (b - bbar) ubar; this holds whether or not the
            # internal model is active (Gamma eta = 0 when it is off).
            gterm = gam @ eta - psi_mat @ w
            diag["sigma_true"][k, 0] = (qt1 + bmat[0] @ gterm
                                        + (bmat[0] - bbar[0]) @ ubar)
            diag["sigma_true"][k, 1] = (qt2 + bmat[1] @ gterm
                                        + (bmat[1] - bbar[1]) @ ubar)
            if sol is not None:
                diag["eta_err"][k] = np.linalg.norm(eta - sol.sigma @ w)

        if k == n:
            break

        ex0 = sv[0] - w[0]
        dex0 = sv[1] - w[1]
        ey0 = sv[2] - w[3]
        dey0 = sv[3] - w[4]

        hold["u0"] = u0
        hold["u1"] = u12[0]
        hold["u2"] = u12[1]
        hold["ubar"] = ubar
        joint = rk4_step(joint_rhs, t, joint, dt)

        w = closed_form_state((k + 1) * dt, modes)
        ex1 = joint[0] - w[0]
        dex1 = joint[1] - w[1]
        ey1 = joint[2] - w[3]
        dey1 = joint[3] - w[4]

        c1 = measurement_cubic(ex0, dex0, ex1, dex1, dt)
        c2 = measurement_cubic(ey0, dey0, ey1, dey1, dt)
        bu1 = g * ubar[0]          # Bbar rows (g, 0) and (0, -g)
        bu2 = -g * ubar[1]
        if nsub == 1:
            prop = propagator(gains, beta, dt)
            z1s = step_scaled(z1s, c1, beta, bu1, gains, dt, prop)
            z2s = step_scaled(z2s, c2, beta, bu2, gains, dt, prop)
        else:
            h = dt / nsub
            prop = propagator(gains, beta, h)
            for j in range(nsub):
                l1 = subdivide_poly(c1, nsub, j)
                l2 = subdivide_poly(c2, nsub, j)
                z1s = step_scaled(z1s, l1, beta, bu1, gains, h, prop)
                z2s = step_scaled(z2s, l2, beta, bu2, gains, h, prop)

    m = metrics(log, transient_fraction=cfg.transient_fraction,
                tilt_floor=tilt_floor, sol=sol, modes=modes)
    if diagnostics:
        return log, m, diag
    return log, m
