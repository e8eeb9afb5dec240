"""Figure rendering for the CLI report paths.

Every figure is drawn from the same rows that go into the CSV, so the plot is
a pure function of (config, seed) like everything else.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def plot_marginal_curves(rows: np.ndarray, title: str, path: str) -> None:
    """mFDR / FNR / mR against the threshold, with the 1/2 reference line."""
    t, mfdr, fnr, mr = rows.T
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(t, mfdr, label="mFDR", color="#cc3311")
    ax.plot(t, fnr, label="FNR", color="#0077bb")
    ax.plot(t, mr, label="mR = mFDR + FNR", color="black")
    ax.axhline(0.5, color="gray", lw=0.8)
    i = int(np.argmin(mr))
    ax.axhline(mr[i], color="gray", lw=0.8, ls="--")
    ax.plot([t[i]], [mr[i]], "k.", ms=6)
    ax.set_xlabel("threshold t")
    ax.set_ylabel("rate")
    ax.set_ylim(-0.02, 1.05)
    ax.set_title(title)
    ax.legend(loc="center right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_level_sets(x_grid, y_grid, levels: np.ndarray, title: str, path: str) -> None:
    """Filled contour of the two-offset boundary function on the lattice."""
    fig, ax = plt.subplots(figsize=(5.2, 4.4))
    # levels is indexed [i, j] = (x_i, y_j); contourf wants [y, x]
    cf = ax.contourf(x_grid, y_grid, np.asarray(levels).T, levels=14, cmap="viridis")
    cs = ax.contour(
        x_grid, y_grid, np.asarray(levels).T,
        levels=[0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 0.9], colors="white", linewidths=0.7,
    )
    ax.clabel(cs, fontsize=7, fmt="%.2f")
    fig.colorbar(cf, ax=ax, label="boundary value")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_point_risks(point_rows: list[dict], title: str, path: str) -> None:
    """Scatter of the evaluated (x, y) points with combined risk annotations.

    BH risks are printed above each dot, l-value risks below, one panel per
    point-set family (level sets vs comparison lines).
    """
    families = sorted({r["set"] for r in point_rows})
    fig, axes = plt.subplots(1, len(families), figsize=(4.6 * len(families), 4.4),
                             squeeze=False)
    for ax, fam in zip(axes[0], families):
        rows = [r for r in point_rows if r["set"] == fam]
        xs = [r["x"] for r in rows]
        ys = [r["y"] for r in rows]
        ax.plot(xs, ys, "ko", ms=5)
        for r in rows:
            offset = 0.12 if r["procedure"].startswith("bh") else -0.22
            ax.annotate(
                f"{r['combined']:.2f}", (r["x"], r["y"]),
                xytext=(r["x"], r["y"] + offset), fontsize=7, ha="center",
                color="#cc3311" if offset > 0 else "#0077bb",
            )
        ax.set_title(fam, fontsize=9)
        ax.set_xlabel("x")
        ax.set_ylabel("y")
    fig.suptitle(title, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
