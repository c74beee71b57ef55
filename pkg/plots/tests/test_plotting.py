import math

import numpy as np
import pytest

from svrplot.plotting import (PlotSpec, build_bars_figure,
                              build_loglog_figure, render_loglog,
                              render_saturation_bars)

HEADER = ("experiment_id,curve_kind,d,n,rep,sigma_zeta,sigma_gamma,l,j,m,"
          "mse,rel_mse,center_err,vec_err,h_mean,misclass2,fit_ms,pred_ms,"
          "failed")
COLUMNS = HEADER.split(",")

DEFAULTS = {"experiment_id": "exp", "curve_kind": "line", "d": "3",
            "sigma_zeta": "0.1", "sigma_gamma": "0.3", "l": "10", "j": "1",
            "m": "1", "mse": "1.0", "rel_mse": "0.5", "center_err": "0.1",
            "vec_err": "0.1", "h_mean": "5.0", "misclass2": "0.0",
            "fit_ms": "1.0", "pred_ms": "1.0", "failed": "0"}


def write_metrics(path, rows):
    lines = [HEADER]
    for row in rows:
        merged = {**DEFAULTS, **{k: str(v) for k, v in row.items()}}
        lines.append(",".join(merged[c] for c in COLUMNS))
    path.write_text("\n".join(lines) + "\n")


def power_law_rows(ns, exponent, scale=3.7, reps=2, **extra):
    rows = []
    for n in ns:
        for rep in range(reps):
            rows.append({"n": n, "rep": rep,
                         "mse": repr(scale * n ** exponent), **extra})
    return rows


NS = (10_000, 20_000, 50_000, 100_000, 200_000)


def spec_for(path, out, **kw):
    base = dict(csv=str(path), y_field="mse", group_by="sigma_zeta",
                window=(NS[0], NS[-1]), out=str(out))
    base.update(kw)
    return PlotSpec(**base)


def test_exact_power_law_slope_and_legend(tmp_path):
    csv = tmp_path / "m.csv"
    write_metrics(csv, power_law_rows(NS, -0.5))
    fig, slopes = build_loglog_figure(spec_for(csv, tmp_path / "o.png"))
    assert list(slopes) == [0.1]
    assert abs(slopes[0.1] + 0.5) < 1e-12
    labels = [t.get_text() for t in fig.axes[0].get_legend().get_texts()]
    assert labels == ["sigma_zeta=0.1 (slope -0.50)"]


def test_two_groups_two_curves(tmp_path):
    csv = tmp_path / "m.csv"
    write_metrics(csv, power_law_rows(NS, -0.5, sigma_zeta="0.05")
                  + power_law_rows(NS, -1.0, scale=9.9, sigma_zeta="0.2"))
    fig, slopes = build_loglog_figure(spec_for(csv, tmp_path / "o.png"))
    assert sorted(slopes) == [0.05, 0.2]
    assert abs(slopes[0.05] + 0.5) < 1e-12
    assert abs(slopes[0.2] + 1.0) < 1e-12
    assert len(fig.axes[0].get_legend().get_texts()) == 2


def test_dashed_line_at_window_left_edge(tmp_path):
    csv = tmp_path / "m.csv"
    write_metrics(csv, power_law_rows(NS, -0.5))
    window = (20_000, 200_000)
    fig, _ = build_loglog_figure(
        spec_for(csv, tmp_path / "o.png", window=window))
    vlines = [ln for ln in fig.axes[0].lines
              if np.array_equal(ln.get_xdata(), [window[0], window[0]])]
    assert vlines and vlines[0].get_linestyle() == "--"


def test_failed_rows_excluded_from_slope(tmp_path):
    csv = tmp_path / "m.csv"
    rows = power_law_rows(NS, -0.5)
    # poison one cell: a failed row with a wild value must not move the fit
    rows.append({"n": NS[2], "rep": 9, "mse": "1e6", "failed": "1"})
    write_metrics(csv, rows)
    _, slopes = build_loglog_figure(spec_for(csv, tmp_path / "o.png"))
    assert abs(slopes[0.1] + 0.5) < 1e-12


def test_mean_over_reps_before_slope(tmp_path):
    # reps 1.5c and 0.5c average to c * n^-0.5 even though neither rep lies
    # on the power law
    csv = tmp_path / "m.csv"
    rows = []
    for n in NS:
        rows.append({"n": n, "rep": 0, "mse": repr(1.5 * n ** -0.5)})
        rows.append({"n": n, "rep": 1, "mse": repr(0.5 * n ** -0.5)})
    write_metrics(csv, rows)
    _, slopes = build_loglog_figure(spec_for(csv, tmp_path / "o.png"))
    assert abs(slopes[0.1] + 0.5) < 1e-9


def test_render_is_deterministic(tmp_path):
    csv = tmp_path / "m.csv"
    write_metrics(csv, power_law_rows(NS, -0.5))
    a, b = tmp_path / "a.png", tmp_path / "b.png"
    render_loglog(spec_for(csv, a))
    render_loglog(spec_for(csv, b))
    assert a.read_bytes() == b.read_bytes()


def test_svg_render_is_deterministic(tmp_path):
    csv = tmp_path / "m.csv"
    write_metrics(csv, power_law_rows(NS, -0.5))
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    render_loglog(spec_for(csv, a, format="svg"))
    render_loglog(spec_for(csv, b, format="svg"))
    assert a.read_bytes().startswith(b"<?xml")
    assert a.read_bytes() == b.read_bytes()


def test_input_csv_never_mutated(tmp_path):
    csv = tmp_path / "m.csv"
    write_metrics(csv, power_law_rows(NS, -0.5))
    before = csv.read_bytes()
    render_loglog(spec_for(csv, tmp_path / "o.png"))
    assert csv.read_bytes() == before


def test_missing_column_names_it(tmp_path):
    csv = tmp_path / "m.csv"
    csv.write_text("n,rep,failed,mse\n10000,0,0,1.0\n")
    with pytest.raises(ValueError, match="sigma_zeta"):
        build_loglog_figure(spec_for(csv, tmp_path / "o.png"))


def test_empty_csv_and_all_failed_errors(tmp_path):
    empty = tmp_path / "e.csv"
    empty.write_text(HEADER + "\n")
    with pytest.raises(ValueError, match="no rows"):
        build_loglog_figure(spec_for(empty, tmp_path / "o.png"))

    dead = tmp_path / "d.csv"
    write_metrics(dead, [dict(r, failed="1")
                         for r in power_law_rows(NS, -0.5)])
    with pytest.raises(ValueError, match="usable rows"):
        build_loglog_figure(spec_for(dead, tmp_path / "o.png"))


def test_window_outside_data_range_errors(tmp_path):
    csv = tmp_path / "m.csv"
    write_metrics(csv, power_law_rows(NS, -0.5))
    with pytest.raises(ValueError, match="outside"):
        build_loglog_figure(
            spec_for(csv, tmp_path / "o.png", window=(5_000, 200_000)))


def test_no_file_written_on_error(tmp_path):
    csv = tmp_path / "m.csv"
    write_metrics(csv, power_law_rows(NS[:2], -0.5))  # two points: too few
    out = tmp_path / "o.png"
    with pytest.raises(ValueError, match="three"):
        render_loglog(spec_for(csv, out, window=(NS[0], NS[1])))
    assert not out.exists()
    assert not list(tmp_path.glob(".svrplot-*"))


def test_plotspec_validation():
    good = dict(csv="x.csv", y_field="mse", group_by="d",
                window=(1.0, 2.0), out="o.png")
    PlotSpec(**good)
    with pytest.raises(ValueError, match="y_field"):
        PlotSpec(**{**good, "y_field": "time"})
    with pytest.raises(ValueError, match="format"):
        PlotSpec(**{**good, "format": "pdf"})
    with pytest.raises(ValueError, match="window"):
        PlotSpec(**{**good, "window": (2.0, 1.0)})


# ------------------------------------------------------------------ bars


def write_bars(path, pairs, group="kappa"):
    path.write_text(f"{group},mse\n"
                    + "".join(f"{g},{v!r}\n" for g, v in pairs))


def test_bars_basic(tmp_path):
    csv = tmp_path / "s.csv"
    write_bars(csv, [(0.04, 2.5e-6), (0.1, 1.3e-5), (0.2, 2.6e-5),
                     (0.4, 3.5e-5)])
    fig, values = build_bars_figure(csv, "kappa")
    ax = fig.axes[0]
    assert ax.get_yscale() == "log"
    assert len(ax.patches) == 4
    assert list(values) == [0.04, 0.1, 0.2, 0.4]
    heights = [p.get_height() for p in ax.patches]
    assert heights == sorted(heights)


def test_bars_single_group(tmp_path):
    csv = tmp_path / "s.csv"
    write_bars(csv, [(0.2, 1e-4)])
    out = tmp_path / "bars.png"
    values = render_saturation_bars(csv, "kappa", out)
    assert out.exists() and values == {0.2: 1e-4}


def test_bars_duplicate_group_errors_without_file(tmp_path):
    csv = tmp_path / "s.csv"
    write_bars(csv, [(0.2, 1e-4), (0.2, 2e-4)])
    out = tmp_path / "bars.png"
    with pytest.raises(ValueError, match="duplicate"):
        render_saturation_bars(csv, "kappa", out)
    assert not out.exists()


def test_bars_empty_csv_errors_without_file(tmp_path):
    csv = tmp_path / "s.csv"
    csv.write_text("kappa,mse\n")
    out = tmp_path / "bars.png"
    with pytest.raises(ValueError, match="no rows"):
        render_saturation_bars(csv, "kappa", out)
    assert not out.exists()


def test_bars_deterministic(tmp_path):
    csv = tmp_path / "s.csv"
    write_bars(csv, [(0.04, 2.5e-6), (0.4, 3.5e-5)])
    a, b = tmp_path / "a.png", tmp_path / "b.png"
    render_saturation_bars(csv, "kappa", a)
    render_saturation_bars(csv, "kappa", b)
    assert a.read_bytes() == b.read_bytes()
