"""Deterministic SVG figures for the evolved-mode frames and the flow portrait."""
from __future__ import annotations

import io
import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .io import atomic_write_text  # noqa: E402

STYLE = {
    "svg.hashsalt": "sclg",
    "svg.fonttype": "path",
    "font.family": "DejaVu Sans",
    "font.size": 8,
    "axes.labelsize": 8,
    "axes.titlesize": 8,
    "xtick.labelsize": 7,
    "ytick.labelsize": 7,
    "lines.linewidth": 0.8,
    "image.cmap": "viridis",
}

STATIONARY_STYLE = {
    "elliptic": {"marker": "o", "color": "#d62728"},
    "hyperbolic": {"marker": "X", "color": "#1f77b4"},
}


def _svg_text(fig):
    buf = io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    return buf.getvalue()


def figure1_svg(frames, path):
    """3 x 3 contact sheet of |field| for the nine frames."""
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(3, 3, figsize=(6.6, 6.6), sharex=True, sharey=True)
        vmax = max(float(np.max(np.abs(f.field.values))) for f in frames)
        for ax, frame in zip(axes.flat, frames):
            g = frame.field
            extent = (g.x_axis.lo, g.x_axis.hi, g.y_axis.lo, g.y_axis.hi)
            # rows of values are x; imshow wants y down the rows
            ax.imshow(np.abs(g.values).T, origin="lower", extent=extent, vmin=0.0, vmax=vmax,
                      interpolation="nearest")
            ax.set_title(f"T = {frame.k}π/8")
            ax.set_aspect("equal")
        for ax in axes[-1]:
            ax.set_xlabel("x")
        for ax in axes[:, 0]:
            ax.set_ylabel("y")
        fig.tight_layout()
        atomic_write_text(path, _svg_text(fig))
    return path


def figure2_svg(data, path, window=1.2):
    """Flow lines in the (x, xi) plane with the stationary points marked."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.5, 4.5))
        for line in data.lines:
            if line.x.size > 1:
                color = "black" if line.kind.startswith("sep_") else "0.55"
                ax.plot(line.x, line.xi, color=color, lw=1.0 if color == "black" else 0.6)
        for kind, pts in data.stationary.items():
            style = STATIONARY_STYLE[kind]
            for i, (x, xi) in enumerate(pts):
                (mark,) = ax.plot([x], [xi], linestyle="none", markersize=6, zorder=5, **style)
                mark.set_gid(f"stationary-{kind}-{i}")
        a = math.sqrt(data.r2 * data.h)
        ax.set_xlim(-window, window)
        ax.set_ylim(-window, window)
        ax.set_aspect("equal")
        ax.set_xlabel("x")
        ax.set_ylabel("ξ")
        ax.set_title(f"h = {data.h:g}, r² = {data.r2:g}, pocket radius {a:.4f}")
        fig.tight_layout()
        atomic_write_text(path, _svg_text(fig))
    return path
