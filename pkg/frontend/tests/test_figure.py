"""Figure structure: panel counts, line contracts, guide levels."""

import math

import numpy as np
import pytest

from quadplots.figure import (
    DEFAULT_PANELS,
    DEFAULT_TILT_FLOOR,
    PANELS,
    FigureSpec,
    build_figure,
    data_lines,
)
from quadplots.schema import load_log


def test_default_layout_is_four_panels(periodic_log):
    fig = build_figure(load_log(periodic_log))
    assert len(fig.axes) == 4
    titles = [ax.get_title() for ax in fig.axes]
    assert titles == [
        "positions and references [m]",
        "tracking errors [m]",
        "angles [rad] and tilt product",
        "control signals",
    ]


def test_positions_panel_line_contract(periodic_log):
    fig = build_figure(load_log(periodic_log))
    lines = data_lines(fig.axes[0])
    assert [ln.get_label() for ln in lines] == [
        "x", "y", "z", "x_ref", "y_ref", "z_ref",
    ]
    solid = [ln for ln in lines if ln.get_linestyle() == "-"]
    dashed = [ln for ln in lines if ln.get_linestyle() == "--"]
    assert [ln.get_label() for ln in solid] == ["x", "y", "z"]
    assert [ln.get_label() for ln in dashed] == ["x_ref", "y_ref", "z_ref"]


def test_lines_carry_log_data(periodic_log):
    table = load_log(periodic_log)
    fig = build_figure(table)
    by_label = {ln.get_label(): ln for ln in data_lines(fig.axes[0])}
    assert np.array_equal(by_label["z"].get_xdata(), table.t)
    assert np.array_equal(by_label["z"].get_ydata(), table.col("z"))
    err = {ln.get_label(): ln for ln in data_lines(fig.axes[1])}
    assert np.array_equal(err["ex"].get_ydata(), table.col("ex"))


def test_angles_panel_guides_and_band(periodic_log):
    fig = build_figure(load_log(periodic_log))
    ax = fig.axes[2]
    labels = [ln.get_label() for ln in data_lines(ax)]
    assert labels == ["theta", "psi", "cos(theta)cos(psi)"]
    guides = [ln for ln in ax.get_lines() if ln.get_label() == "_guide"]
    levels = sorted(ln.get_ydata()[0] for ln in guides)
    assert levels == [-math.pi / 2.0, math.pi / 2.0]
    bands = [p for p in ax.patches if p.get_label() == "_band"]
    assert len(bands) == 1
    ylo = bands[0].get_y()
    yhi = ylo + bands[0].get_height()
    assert ylo == pytest.approx(DEFAULT_TILT_FLOOR)
    assert yhi == pytest.approx(1.0)


def test_controls_panel(periodic_log):
    fig = build_figure(load_log(periodic_log))
    labels = [ln.get_label() for ln in data_lines(fig.axes[3])]
    assert labels == ["u0", "u1", "u2"]


def test_envelope_panel(periodic_log):
    table = load_log(periodic_log)
    fig = build_figure(table, panels=PANELS)
    assert len(fig.axes) == 5
    ax = fig.axes[4]
    by_label = {ln.get_label(): ln for ln in data_lines(ax)}
    assert set(by_label) == {"cos(theta)cos(psi)", "beta"}
    tilt = np.cos(table.col("theta")) * np.cos(table.col("psi"))
    assert np.allclose(by_label["cos(theta)cos(psi)"].get_ydata(), tilt)
    levels = sorted(
        ln.get_ydata()[0] for ln in ax.get_lines() if ln.get_label() == "_guide"
    )
    assert levels == [0.1, pytest.approx(DEFAULT_TILT_FLOOR), 1.9]


def test_zero_log_error_series_flat(zero_log):
    fig = build_figure(load_log(zero_log))
    worst = max(
        np.max(np.abs(ln.get_ydata())) for ln in data_lines(fig.axes[1])
    )
    assert worst == 0.0


def test_single_panel_and_reordering(periodic_log):
    table = load_log(periodic_log)
    fig = build_figure(table, panels=("controls",))
    assert len(fig.axes) == 1
    assert fig.axes[0].get_title() == "control signals"
    fig = build_figure(table, panels=("angles", "positions", "errors"))
    assert [ax.get_title() for ax in fig.axes] == [
        "angles [rad] and tilt product",
        "positions and references [m]",
        "tracking errors [m]",
    ]


def test_unknown_panel_rejected(periodic_log):
    table = load_log(periodic_log)
    with pytest.raises(ValueError, match="hologram"):
        build_figure(table, panels=("positions", "hologram"))
    with pytest.raises(ValueError, match="empty"):
        build_figure(table, panels=())
    with pytest.raises(ValueError, match="tilt_floor"):
        build_figure(table, tilt_floor=0.0)


def test_figure_spec_validation(tmp_path):
    with pytest.raises(ValueError, match="output"):
        FigureSpec(input_csv="a.csv", outputs=())
    with pytest.raises(ValueError, match="hologram"):
        FigureSpec(input_csv="a.csv", outputs=("f.png",), panels=("hologram",))
    with pytest.raises(ValueError, match="dpi"):
        FigureSpec(input_csv="a.csv", outputs=("f.png",), dpi=0)
    spec = FigureSpec.for_directory(str(tmp_path / "run" / "log.csv"), str(tmp_path))
    assert spec.outputs == (str(tmp_path / "log.png"),)
    assert spec.panels == DEFAULT_PANELS
