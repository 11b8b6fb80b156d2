"""Optional figure rendering for the CLI report paths.

All functions take already-computed arrays/reports and write a PNG next to
the delimited output; nothing here feeds back into the numerics.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def plot_band_coefficients(thetas, lambda01, lambda10, path) -> None:
    """Coefficient curves over one Brillouin zone."""
    fig, axes = plt.subplots(1, 2 if lambda10 is not None else 1, figsize=(9, 3.5))
    axes = np.atleast_1d(axes)
    axes[0].plot(thetas, lambda01, lw=1.2)
    axes[0].set_xlabel(r"$\theta$")
    axes[0].set_ylabel("log-band coefficient")
    if lambda10 is not None:
        axes[1].plot(thetas, lambda10, lw=1.2, color="tab:red")
        axes[1].set_xlabel(r"$\theta$")
        axes[1].set_ylabel("quadratic-band coefficient")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_figure_curve(thetas, values, case: int, path) -> None:
    """Single quadratic-coefficient curve for one built-in dataset."""
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(thetas, values, lw=1.2)
    ax.set_xlabel(r"$\theta$")
    ax.set_ylabel("quadratic-band coefficient")
    ax.set_title(f"built-in dataset {case}")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_rate_report(reports, path) -> None:
    """Ratio-vs-1/|ln eps| trends for one or more convergence reports."""
    fig, ax = plt.subplots(figsize=(5.5, 4))
    for rep in reports:
        eps = np.array([p.epsilon for p in rep.points])
        x = 1.0 / np.abs(np.log(eps))
        r1 = [p.ratio1 for p in rep.points]
        if all(r is not None for r in r1):
            ax.plot(x, r1, "o-", label=rf"$\theta$={rep.theta:.3g} log band")
        r2 = [p.ratio2 for p in rep.points]
        if rep.k >= 2 and all(r is not None for r in r2):
            ax.plot(x, r2, "s--", label=rf"$\theta$={rep.theta:.3g} quad band")
    ax.axhline(1.0, color="k", lw=0.8)
    ax.set_xlabel(r"$1/|\ln\varepsilon|$")
    ax.set_ylabel("measured / predicted")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
