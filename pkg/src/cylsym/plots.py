"""Figure rendering for the CLI report path.

Only the CLI imports this module (lazily, when --plot is passed), so the
computational core never touches matplotlib.  Figures are written next to
the delimited output files.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def plot_boundary_curve(curve, path) -> None:
    """Numerical threshold with bracket error bars against the spectral
    curve, in both charts."""
    pts = [pt for pt in curve.points if pt.converged]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.0, 3.6))
    p_fine = np.linspace(min(pt.p for pt in curve.points) * 0.98,
                         max(pt.p for pt in curve.points) * 1.02, 200)
    lam_fs = 4.0 * (curve.N - 1.0) / (p_fine ** 2 - 4.0)
    ax1.plot(p_fine, lam_fs, "-", color="0.4", label=r"$\Lambda^{FS}(p)$")
    if pts:
        ax1.errorbar([pt.p for pt in pts], [pt.lambda_star_num for pt in pts],
                     yerr=[0.5 * pt.bracket_width for pt in pts],
                     fmt="o", capsize=3, label=r"$\Lambda^*_{num}(p)$")
    ax1.set_xlabel("p")
    ax1.set_ylabel(r"$\Lambda$")
    ax1.legend()
    ax1.set_title("symmetry-breaking threshold")

    a_fs = 0.5 * (curve.N - 2.0) - np.sqrt(lam_fs)
    ax2.plot(p_fine, a_fs, "-", color="0.4", label=r"$a^{FS}(p)$")
    if pts:
        ax2.plot([pt.p for pt in pts], [pt.a_star_num for pt in pts], "o",
                 label=r"$a^*_{num}(p)$")
    ax2.set_xlabel("p")
    ax2.set_ylabel("a")
    ax2.legend()
    ax2.set_title("threshold in the (p, a) chart")
    fig.tight_layout()
    fig.savefig(str(path), dpi=150)
    plt.close(fig)


def plot_fs_curve(rows, N, path) -> None:
    """The instability curve in the (a, b) plane between its two edges."""
    a = np.array([r[0] for r in rows])
    b = np.array([r[1] for r in rows])
    fig, ax = plt.subplots(figsize=(4.8, 3.6))
    ax.plot(a, a, "--", color="0.6", label="b = a")
    ax.plot(a, a + 1.0, "--", color="0.6", label="b = a + 1")
    ax.plot(a, b, "-", label=r"$b^{FS}(a)$")
    ax.fill_between(a, a, b, alpha=0.15, label="symmetry breaking")
    ax.set_xlabel("a")
    ax.set_ylabel("b")
    ax.set_title(f"instability curve, N = {N}")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(str(path), dpi=150)
    plt.close(fig)


def plot_radial_profile(t, w, path, u=None, r=None) -> None:
    fig, ax = plt.subplots(figsize=(4.8, 3.6))
    ax.plot(t, w, "-", label=r"$w^*(t)$")
    ax.set_xlabel("t")
    ax.set_ylabel(r"$w^*$")
    if u is not None:
        ax2 = ax.twinx()
        ax2.plot(t, u, ":", color="C1", label=r"$u^*(e^t)$")
        ax2.set_ylabel(r"$u^*$")
    ax.set_title("radial extremal profile")
    fig.tight_layout()
    fig.savefig(str(path), dpi=150)
    plt.close(fig)


def plot_minimize_field(field, radial_vals, path) -> None:
    """Final minimizer: spherical-mean profile vs. the exact radial
    extremal, and the angular structure as a heat map."""
    grid = field.grid
    mean = field.grid.sphere.mean_projection(field.values)[:, 0]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.0, 3.6))
    ax1.plot(grid.t, mean, "-", label="spherical mean of minimizer")
    ax1.plot(grid.t, radial_vals, "--", label="radial extremal (rescaled)")
    ax1.set_xlabel("t")
    ax1.legend(fontsize=8)
    ax1.set_title("t-profile")
    angles = grid.sphere.polar_angles()
    dev = field.values - field.grid.sphere.mean_projection(field.values)
    extent = [angles.min(), angles.max(), grid.t.min(), grid.t.max()]
    span = float(np.max(np.abs(dev))) or 1.0
    im = ax2.imshow(dev, aspect="auto", origin="lower", extent=extent,
                    cmap="RdBu_r", vmin=-span, vmax=span)
    ax2.set_xlabel("polar angle")
    ax2.set_ylabel("t")
    ax2.set_title("angular deviation")
    fig.colorbar(im, ax=ax2)
    fig.tight_layout()
    fig.savefig(str(path), dpi=150)
    plt.close(fig)
