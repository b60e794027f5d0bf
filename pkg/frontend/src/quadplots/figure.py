"""Multi-panel summary figure for a tracking run.

Default layout is four panels: positions against their references,
tracking errors, attitude angles with the invertibility margins, and
the three control signals.  An optional fifth panel plots the envelope
quantities (tilt product and thrust scale) directly.

Everything uses the object-oriented matplotlib API; no pyplot, so no
global figure state leaks between calls or into test processes.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure
import numpy as np

from .schema import LogTable, load_log

PANELS = ("positions", "errors", "angles", "controls", "envelope")
DEFAULT_PANELS = ("positions", "errors", "angles", "controls")

# The envelope condition compares cos(theta)*cos(psi) against
# g/(g + ell).  The log does not carry ell, so the guide level is a
# parameter; the default matches the stock altitude saturation
# ell = 0.9 g, giving g/(g + 0.9 g) = 1/1.9.
DEFAULT_TILT_FLOOR = 1.0 / 1.9

# Data series carry their column name as the line label; guides and
# shading use labels starting with "_" so they stay out of legends and
# are easy to filter in structural checks.
_GUIDE = {"color": "0.45", "linewidth": 0.9, "linestyle": ":", "label": "_guide"}


def data_lines(ax):
    """Plotted data series of one panel, excluding guide lines."""
    return [ln for ln in ax.get_lines() if not ln.get_label().startswith("_")]


def _panel_positions(ax, table: LogTable, tilt_floor: float) -> None:
    t = table.t
    for name in ("x", "y", "z"):
        ax.plot(t, table.col(name), label=name, linewidth=1.2)
    for name in ("x_ref", "y_ref", "z_ref"):
        ax.plot(t, table.col(name), label=name, linewidth=1.0, linestyle="--")
    ax.set_title("positions and references [m]")


def _panel_errors(ax, table: LogTable, tilt_floor: float) -> None:
    t = table.t
    for name in ("ex", "ey", "ez"):
        ax.plot(t, table.col(name), label=name, linewidth=1.2)
    ax.axhline(0.0, **_GUIDE)
    ax.set_title("tracking errors [m]")


def _panel_angles(ax, table: LogTable, tilt_floor: float) -> None:
    t = table.t
    theta = table.col("theta")
    psi = table.col("psi")
    ax.plot(t, theta, label="theta", linewidth=1.2)
    ax.plot(t, psi, label="psi", linewidth=1.2)
    ax.plot(t, np.cos(theta) * np.cos(psi), label="cos(theta)cos(psi)",
            linewidth=1.0)
    half_pi = math.pi / 2.0
    ax.axhline(half_pi, **_GUIDE)
    ax.axhline(-half_pi, **_GUIDE)
    # Admissible band for the tilt product: stay at or above the floor.
    ax.axhspan(tilt_floor, 1.0, color="0.82", alpha=0.35, label="_band")
    ax.set_title("angles [rad] and tilt product")


def _panel_controls(ax, table: LogTable, tilt_floor: float) -> None:
    t = table.t
    for name in ("u0", "u1", "u2"):
        ax.plot(t, table.col(name), label=name, linewidth=1.2)
    ax.set_title("control signals")


def _panel_envelope(ax, table: LogTable, tilt_floor: float) -> None:
    t = table.t
    theta = table.col("theta")
    psi = table.col("psi")
    ax.plot(t, np.cos(theta) * np.cos(psi), label="cos(theta)cos(psi)",
            linewidth=1.2)
    ax.plot(t, table.col("beta"), label="beta", linewidth=1.2)
    ax.axhline(tilt_floor, **_GUIDE)
    ax.axhline(0.1, **_GUIDE)
    ax.axhline(1.9, **_GUIDE)
    ax.set_title("envelope quantities")


_BUILDERS = {
    "positions": _panel_positions,
    "errors": _panel_errors,
    "angles": _panel_angles,
    "controls": _panel_controls,
    "envelope": _panel_envelope,
}


def build_figure(table: LogTable,
                 panels: tuple[str, ...] = DEFAULT_PANELS,
                 tilt_floor: float = DEFAULT_TILT_FLOOR) -> Figure:
    """Assemble the figure in memory; one axes per requested panel.

    Axis limits are left to matplotlib's auto-fit, which pads the data
    range symmetrically on both sides.
    """
    for name in panels:
        if name not in _BUILDERS:
            raise ValueError(
                "unknown panel %r (choose from %s)" % (name, ", ".join(PANELS))
            )
    if not panels:
        raise ValueError("panel selection is empty")
    if not 0.0 < tilt_floor <= 1.0:
        raise ValueError("tilt_floor must lie in (0, 1], got %r" % (tilt_floor,))

    n = len(panels)
    ncols = 2 if n > 1 else 1
    nrows = (n + ncols - 1) // ncols
    fig = Figure(figsize=(5.6 * ncols, 3.4 * nrows), layout="constrained")
    axes = fig.subplots(nrows, ncols, squeeze=False).ravel()
    for ax in axes[n:]:
        fig.delaxes(ax)
    for ax, name in zip(axes[:n], panels):
        _BUILDERS[name](ax, table, tilt_floor)
        ax.set_xlabel("t [s]")
        ax.grid(True, alpha=0.3)
        ax.legend(loc="best", fontsize="small")
    return fig


@dataclass
class FigureSpec:
    """What to render: input log, output image file(s), panel choice."""

    input_csv: str
    outputs: tuple[str, ...]
    panels: tuple[str, ...] = DEFAULT_PANELS
    tilt_floor: float = DEFAULT_TILT_FLOOR
    dpi: int = 130

    def __post_init__(self):
        self.outputs = tuple(self.outputs)
        self.panels = tuple(self.panels)
        if not self.outputs:
            raise ValueError("at least one output path is required")
        for name in self.panels:
            if name not in _BUILDERS:
                raise ValueError(
                    "unknown panel %r (choose from %s)"
                    % (name, ", ".join(PANELS))
                )
        if self.dpi <= 0:
            raise ValueError("dpi must be positive, got %r" % (self.dpi,))

    @classmethod
    def for_directory(cls, input_csv: str, out_dir: str, **kwargs) -> "FigureSpec":
        """Default output: <out_dir>/<log stem>.png next to nothing else."""
        stem = os.path.splitext(os.path.basename(input_csv))[0] or "figure"
        return cls(input_csv=input_csv,
                   outputs=(os.path.join(out_dir, stem + ".png"),),
                   **kwargs)


def render_figures(spec: FigureSpec) -> list[str]:
    """Render the figure and write every requested image file.

    Returns the list of written paths.  The input file is only ever
    opened for reading; load_log records its checksum so callers can
    verify the file is untouched afterwards.
    """
    table = load_log(spec.input_csv)
    fig = build_figure(table, spec.panels, spec.tilt_floor)
    canvas = FigureCanvasAgg(fig)
    written = []
    for path in spec.outputs:
        parent = os.path.dirname(path)
        if parent:
            os.makedirs(parent, exist_ok=True)
        canvas.print_figure(path, dpi=spec.dpi)
        written.append(path)
    return written
