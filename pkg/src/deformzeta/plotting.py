"""
Figures for the command line reports: benchmark scaling on log-log axes and
the reciprocal roots of chi on the circle |alpha| = q^((n-1)/2).

Everything renders with the Agg backend into files; nothing is shown.
"""
import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

RC = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "figure.figsize": (4.5, 3.4),
    "savefig.dpi": 150,
}


def _save(fig, path):
    d = os.path.dirname(path)
    if d:
        os.makedirs(d, exist_ok=True)
    fig.savefig(path, bbox_inches="tight")
    plt.close(fig)
    return path


def _reference(ax, x, y0, slope, label, style):
    x = np.asarray(x, dtype=float)
    ax.loglog(x, y0 * (x / x[0]) ** slope, style, color="0.5", lw=0.8, label=label)


def plot_scaling(rows, key, path, xlabel, title=None):
    """Wall time of the giant-step and naive runs against ``key``, with
    reference lines of slope 1/2 and 1 through the first points."""
    with plt.rc_context(RC):
        fig, ax = plt.subplots()
        x = [r[key] for r in rows]
        g = [r["giant"] for r in rows]
        ax.loglog(x, g, "o-", label="giant steps")
        if all("naive" in r for r in rows):
            nv = [r["naive"] for r in rows]
            ax.loglog(x, nv, "s-", label="naive")
            _reference(ax, x, nv[0], 1.0, "slope 1", "--")
        _reference(ax, x, g[0], 0.5, "slope 1/2", ":")
        ax.set_xlabel(xlabel)
        ax.set_ylabel("seconds (best of runs)")
        if title:
            ax.set_title(title)
        ax.legend(frameon=False)
        return _save(fig, path)


def plot_roots(zeta, path):
    """Reciprocal roots of chi scaled by q^(-(n-1)/2), with the unit circle."""
    from .zeta import reciprocal_roots
    q, n = zeta.q, zeta.n
    scale = q ** ((n - 1) / 2)
    pts = [z / scale for z, e in reciprocal_roots(zeta.chi) for _ in range(e)]
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(3.6, 3.6))
        t = np.linspace(0, 2 * np.pi, 400)
        ax.plot(np.cos(t), np.sin(t), color="0.6", lw=0.8)
        if pts:
            ax.plot([z.real for z in pts], [z.imag for z in pts], "o", ms=4)
        ax.set_aspect("equal")
        ax.set_xlim(-1.3, 1.3)
        ax.set_ylim(-1.3, 1.3)
        ax.set_title("reciprocal roots / q^((n-1)/2), q = %d" % q)
        return _save(fig, path)
