"""Log-log error curves and saturation bar charts from metric CSVs.

Consumes the flat CSV written by the regression experiment harness (one row
per (n, repetition) cell) purely as text; nothing here imports the estimator
package.  The only computation is the least-squares log-log slope shown in
the legend, re-derived from the CSV with the same semantics the harness uses:
repetitions averaged per n first, failed rows dropped, window inclusive.
"""

from __future__ import annotations

import csv
import os
import tempfile
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

Y_FIELDS = ("mse", "rel_mse", "center_err", "vec_err")
FORMATS = ("png", "svg")


@dataclass(frozen=True)
class PlotSpec:
    """One log-log figure: which column, grouped how, slope window, target."""

    csv: str
    y_field: str
    group_by: str
    window: tuple
    out: str
    format: str = "png"

    def __post_init__(self):
        if self.y_field not in Y_FIELDS:
            raise ValueError(f"y_field must be one of {Y_FIELDS}")
        if self.format not in FORMATS:
            raise ValueError(f"format must be one of {FORMATS}")
        lo, hi = self.window
        if not lo < hi:
            raise ValueError("window must be (lo, hi) with lo < hi")


def _read_csv(path, required):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        cols = reader.fieldnames or []
        missing = [c for c in required if c not in cols]
        if missing:
            raise ValueError(
                f"missing column(s) {', '.join(missing)} in {path}")
        return list(reader)


def _parse_group(raw):
    try:
        return float(raw)
    except ValueError:
        return raw


def _label(value):
    return f"{value:g}" if isinstance(value, float) else str(value)


def _sorted_groups(groups):
    try:
        return sorted(groups)
    except TypeError:  # mixed numeric/string group values
        return sorted(groups, key=str)


def _slope(samples, window):
    """Log-log least-squares slope of per-n means over the window."""
    lo, hi = window
    xs = [x for x in sorted(samples) if lo <= x <= hi]
    if len(xs) < 3:
        raise ValueError("need at least three grid points in the window")
    means = np.array([np.mean(samples[x]) for x in xs], dtype=float)
    if not (means > 0).all():
        raise ValueError("log-log slope needs positive values")
    slope, _ = np.polyfit(np.log(np.array(xs, dtype=float)),
                          np.log(means), 1)
    return float(slope)


def _atomic_save(fig, out, fmt):
    """Write the figure via temp file + rename; never leaves partial output."""
    out = os.fspath(out)
    parent = os.path.dirname(out) or "."
    fd, tmp = tempfile.mkstemp(dir=parent, prefix=".svrplot-",
                               suffix=f".{fmt}")
    os.close(fd)
    try:
        if fmt == "svg":
            # Fixed hash salt and no date stamp keep the bytes reproducible.
            with matplotlib.rc_context({"svg.hashsalt": "svrplot"}):
                fig.savefig(tmp, format=fmt, metadata={"Date": None})
        else:
            fig.savefig(tmp, format=fmt, dpi=120)
        os.replace(tmp, out)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def build_loglog_figure(spec):
    """The figure and per-group slopes, without touching the filesystem."""
    rows = _read_csv(spec.csv,
                     ("n", "rep", "failed", spec.y_field, spec.group_by))
    if not rows:
        raise ValueError(f"no rows in {spec.csv}")
    all_n = set()
    groups = {}
    for row in rows:
        n = float(row["n"])
        all_n.add(n)
        if row["failed"] != "0":
            continue
        g = _parse_group(row[spec.group_by])
        groups.setdefault(g, {}).setdefault(n, []).append(
            float(row[spec.y_field]))
    if not groups:
        raise ValueError(
            f"no group of {spec.group_by} has usable rows in {spec.csv}")
    lo, hi = spec.window
    if lo < min(all_n) or hi > max(all_n):
        raise ValueError(
            f"window ({lo:g}, {hi:g}) outside the data's n range "
            f"[{min(all_n):g}, {max(all_n):g}]")

    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    slopes = {}
    for g in _sorted_groups(groups):
        per_n = groups[g]
        slopes[g] = _slope(per_n, spec.window)
        ns = sorted(per_n)
        means = np.array([np.mean(per_n[n]) for n in ns])
        mins = np.array([min(per_n[n]) for n in ns])
        maxs = np.array([max(per_n[n]) for n in ns])
        ax.errorbar(ns, means, yerr=np.stack([means - mins, maxs - means]),
                    marker="o", markersize=4, capsize=3,
                    label=(f"{spec.group_by}={_label(g)} "
                           f"(slope {slopes[g]:.2f})"))
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.axvline(lo, color="0.4", linestyle="--", linewidth=1.0)
    ax.set_xlabel("n")
    ax.set_ylabel(spec.y_field)
    ax.grid(True, which="both", alpha=0.25)
    ax.legend()
    fig.tight_layout()
    return fig, slopes


def render_loglog(spec):
    """Render the log-log figure for `spec`; returns {group: slope}."""
    fig, slopes = build_loglog_figure(spec)
    try:
        _atomic_save(fig, spec.out, spec.format)
    finally:
        plt.close(fig)
    return slopes


def build_bars_figure(csv_path, group_by, value_field="mse"):
    """Saturation bar figure from a `<group>,<value>` CSV (one row each)."""
    rows = _read_csv(csv_path, (group_by, value_field))
    if not rows:
        raise ValueError(f"no rows in {csv_path}")
    values = {}
    for row in rows:
        g = _parse_group(row[group_by])
        if g in values:
            raise ValueError(f"duplicate group {group_by}={_label(g)}")
        values[g] = float(row[value_field])
    ordered = _sorted_groups(values)

    fig, ax = plt.subplots(figsize=(5.6, 4.0))
    xs = np.arange(len(ordered))
    ax.bar(xs, [values[g] for g in ordered], width=0.6, color="#3b6ea5")
    ax.set_yscale("log")
    ax.set_xticks(xs)
    ax.set_xticklabels([_label(g) for g in ordered])
    ax.set_xlabel(group_by)
    ax.set_ylabel(f"{value_field} at saturation")
    ax.grid(True, axis="y", which="both", alpha=0.25)
    fig.tight_layout()
    return fig, {g: values[g] for g in ordered}


def render_saturation_bars(csv_path, group_by, out, value_field="mse"):
    """Render saturation bars; returns {group: value}.

    All validation happens before any file is created, so an invalid CSV
    never leaves an output file behind.
    """
    fig, values = build_bars_figure(csv_path, group_by, value_field)
    try:
        fmt = "svg" if os.fspath(out).endswith(".svg") else "png"
        _atomic_save(fig, out, fmt)
    finally:
        plt.close(fig)
    return values
