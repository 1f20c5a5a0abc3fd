"""Matplotlib rendering of the reproduced figure data.

The CSV tables are the authoritative output; the PNGs emitted here are a
convenience view of the same numbers, written alongside the tables by the
report path of the CLI.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _plot_curves(ax, columns, rows):
    data = np.asarray(rows, dtype=float)
    x = data[:, 0]
    for j in range(1, data.shape[1]):
        ax.plot(x, data[:, j], label=columns[j], lw=1.2)
    ax.set_xlabel(columns[0])
    ax.legend(fontsize=7)
    ax.grid(alpha=0.3)


def _plot_grid(ax, columns, rows):
    data = np.asarray(rows, dtype=float)
    xu = np.unique(data[:, 0])
    yu = np.unique(data[:, 1])
    z = data[:, 2].reshape(xu.size, yu.size)
    pc = ax.pcolormesh(yu, xu, z, shading="auto", cmap="viridis")
    ax.set_xlabel(columns[1])
    ax.set_ylabel(columns[0])
    plt.colorbar(pc, ax=ax, label=columns[2])


def render_figure(fig_id: str, tables, outdir: str) -> str:
    """Render all panels of one figure to a single PNG; returns its path."""
    n = len(tables)
    ncols = 2 if n > 1 else 1
    nrows = (n + ncols - 1) // ncols
    fig, axes = plt.subplots(nrows, ncols, figsize=(5.5 * ncols, 4.0 * nrows),
                             squeeze=False)
    for ax in axes.flat[n:]:
        ax.set_visible(False)
    for ax, table in zip(axes.flat, tables):
        if table.kind == "grid":
            _plot_grid(ax, table.columns, table.rows)
        else:
            _plot_curves(ax, table.columns, table.rows)
        eta = table.params.get("eta")
        ax.set_title(f"{fig_id}  " + (f"eta={eta:g}" if eta is not None else ""),
                     fontsize=9)
    fig.tight_layout()
    path = os.path.join(outdir, f"{fig_id}.png")
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path
