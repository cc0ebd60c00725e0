"""SVG line chart of exact ``E[m2]`` against ``n``, one curve per (model, d)."""

from __future__ import annotations

import io
import logging

import matplotlib
import pandas as pd
from matplotlib.figure import Figure

from randgraphstate.core.artifacts import atomic_write_text

logger = logging.getLogger(__name__)


def fig1_figure(frame: pd.DataFrame) -> Figure:
    """Figure from rows with columns ``model, d, n, float_value, asymptote``."""
    fig = Figure(figsize=(7, 5))
    ax = fig.add_subplot(111)
    for (model, d), group in frame.groupby(["model", "d"], sort=True):
        group = group.sort_values("n")
        line = ax.plot(group["n"], group["float_value"], marker="o", label=f"{model}, d={d}")[0]
        ax.axhline(group["asymptote"].iloc[0], color=line.get_color(), linestyle=":")
    ax.set_xlabel("n")
    ax.set_ylabel("E[m2]")
    ax.legend()
    return fig


def save_svg(fig: Figure, path: str) -> None:
    """Write ``fig`` as SVG with fixed element ids and no date stamp."""
    buffer = io.StringIO()
    with matplotlib.rc_context({"svg.hashsalt": "randgraphstate"}):
        fig.savefig(buffer, format="svg", metadata={"Date": None})
    atomic_write_text(path, buffer.getvalue())
    logger.info("Wrote plot %s", path)
