"""Matplotlib defaults and helpers for report figures."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

# colour-blind-safe cycle (Okabe-Ito)
PALETTE = ["#0072B2", "#D55E00", "#009E73", "#CC79A7", "#E69F00", "#56B4E9", "#F0E442", "#000000"]

STYLE = {
    "font.family": "DejaVu Sans",
    "font.size": 10,
    "axes.titlesize": 11,
    "axes.labelsize": 10,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "axes.grid": True,
    "axes.grid.axis": "y",
    "grid.alpha": 0.3,
    "legend.fontsize": 8,
    "legend.frameon": False,
    "xtick.labelsize": 9,
    "ytick.labelsize": 9,
    "savefig.dpi": 120,
    "savefig.bbox": "tight",
    "svg.hashsalt": "idiom-forge",
}


def new_figure(width=7.0, height=None):
    golden = (5 ** 0.5 - 1) / 2
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(width, height or width * golden))
    return fig, ax


def save(fig, path):
    with plt.rc_context(STYLE):
        fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
    return path


def grouped_bars(ax, groups, series, labels, colors=None):
    """Draw one cluster per entry in ``groups`` with one bar per series.

    ``series`` is a list of value lists, one per label, each as long as ``groups``.
    """
    colors = colors or PALETTE
    n = max(len(series), 1)
    width = 0.8 / n
    for i, (values, label) in enumerate(zip(series, labels)):
        offsets = [g + (i - (n - 1) / 2) * width for g in range(len(groups))]
        bars = ax.bar(offsets, values, width=width, label=label, color=colors[i % len(colors)])
        ax.bar_label(bars, fmt="%.1f", fontsize=7, padding=1)
    ax.set_xticks(range(len(groups)))
    ax.set_xticklabels(groups)
    return ax
