"""Figure rendering for regression experiment CSVs."""

from .plotting import (FORMATS, Y_FIELDS, PlotSpec, build_bars_figure,
                       build_loglog_figure, render_loglog,
                       render_saturation_bars)

__all__ = [
    "FORMATS",
    "Y_FIELDS",
    "PlotSpec",
    "build_bars_figure",
    "build_loglog_figure",
    "render_loglog",
    "render_saturation_bars",
]
