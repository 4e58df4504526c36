"""Figure rendering for the CLI report paths.

Writes static images next to the CSV exports; all functions take data that
was already sampled, so plotting stays out of the numerical core.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def render_heatmap(xs, ys, values, title: str, path: str, log_scale: bool = False):
    """Save a pcolormesh heatmap of values on the grid xs x ys.

    NaN entries (excluded points near singularities) are left blank.
    """
    fig, ax = plt.subplots(figsize=(6, 5))
    v = np.asarray(values, dtype=float)
    if log_scale:
        with np.errstate(divide="ignore", invalid="ignore"):
            v = np.log10(np.abs(v))
    mesh = ax.pcolormesh(xs, ys, v, shading="auto", cmap="viridis")
    fig.colorbar(mesh, ax=ax)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title(title)
    ax.set_aspect("equal")
    fig.tight_layout()
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_radial_profile(radii, values, title: str, path: str):
    """Save a log-log radial decay profile (used for mode tails)."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.loglog(radii, np.abs(values), marker="o", markersize=3, lw=1)
    ax.set_xlabel("|z|")
    ax.set_ylabel("|value|")
    ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
