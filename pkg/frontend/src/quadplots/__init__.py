"""Figure generation for quadrotor tracking-run logs.

Reads the 33-column CSV log written by the simulator's command line tool
and renders a multi-panel summary figure.  Communication with the
simulator happens only through that file format; nothing here imports
simulator code.
"""

from .schema import LOG_HEADER, LogTable, SchemaError, load_log
from .figure import PANELS, DEFAULT_PANELS, FigureSpec, build_figure, render_figures

__all__ = [
    "LOG_HEADER",
    "LogTable",
    "SchemaError",
    "load_log",
    "PANELS",
    "DEFAULT_PANELS",
    "FigureSpec",
    "build_figure",
    "render_figures",
]
