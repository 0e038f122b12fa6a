"""Optional matplotlib rendering of report data to image files.

The CSV/JSON tables stay the primary output; these helpers draw the same
data so results can be eyeballed without a downstream plotting step.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .montecarlo import ConvergenceResult, EnsembleResult
from .stability import RegionGrid


def render_region(grid: RegionGrid, path: str) -> None:
    """Stability-region raster: SDE boundary plus one panel per method spec."""
    labels = list(grid.members)
    ncols = max(len(labels), 1)
    fig, axes = plt.subplots(1, ncols, figsize=(4.2 * ncols, 4.0), squeeze=False)
    extent = (grid.x_min, grid.x_max, grid.y_min, grid.y_max)
    for ax, label in zip(axes[0], labels or ["sde"]):
        member = grid.members.get(label, grid.sde)
        ax.imshow(
            member,
            origin="lower",
            extent=extent,
            aspect="auto",
            cmap="Greys",
            vmin=0,
            vmax=1.6,
        )
        ax.contour(
            grid.x_centers,
            grid.y_centers,
            grid.sde.astype(float),
            levels=[0.5],
            colors="k",
            linestyles="--",
            linewidths=1.0,
        )
        ax.set_title(label)
        ax.set_xlabel("x = h*lambda")
        ax.set_ylabel("y = h*m*mu1^2")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_ensemble(result: EnsembleResult, path: str) -> None:
    """MS-error and second-moment curves of a simulation run."""
    fig, (ax_err, ax_mom) = plt.subplots(1, 2, figsize=(9.5, 4.0))
    ax_err.plot(result.times, result.ms_error, "o-", color="tab:red")
    ax_err.set_yscale("log")
    ax_err.set_xlabel("t")
    ax_err.set_ylabel("MS-error")
    ax_err.set_title("mean-square error vs exact solution")

    ax_mom.plot(result.times, result.est_second_moment, "o-", label="estimated")
    ax_mom.plot(result.times, result.recurrence_second_moment, "s--", label="recurrence")
    ax_mom.plot(result.times, result.analytic_second_moment, "k:", label="analytic SDE")
    ax_mom.set_yscale("log")
    ax_mom.set_xlabel("t")
    ax_mom.set_ylabel("E|X|^2")
    ax_mom.set_title("second moments")
    ax_mom.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_convergence(result: ConvergenceResult, path: str) -> None:
    """Log-log endpoint errors with the fitted order line."""
    fig, ax = plt.subplots(figsize=(5.0, 4.0))
    ax.loglog(result.step_sizes, result.errors, "o", label="MS-error at T")
    log_h = np.log(result.step_sizes)
    fit = np.polyfit(log_h, np.log(result.errors), 1)
    ax.loglog(
        result.step_sizes,
        np.exp(np.polyval(fit, log_h)),
        "-",
        label=f"slope {result.slope:.3f}",
    )
    ax.set_xlabel("h")
    ax.set_ylabel("MS-error")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
