"""Figure rendering for the CLI report paths.

Figures are saved to files next to the delimited outputs; the Agg backend
keeps rendering headless and byte-reproducible (the PNG software tag is
stripped so reruns diff clean).
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .dynamics import Trajectory
from .experiments import CorrelationReport, HultenRecoveryReport, PairContrastReport
from .network import NetworkStats

_SAVE_KWARGS = dict(dpi=150, metadata={"Software": None})


def _industry_labels(n: int, names=None) -> list[str]:
    if names is not None:
        return list(names)
    return [str(i + 1) for i in range(n)]


def save_analysis_figure(stats: NetworkStats, path: Path, names=None) -> None:
    """Multipliers and Domar weights per industry plus the inverse heatmap."""
    n = len(stats.multipliers)
    labels = _industry_labels(n, names)
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4.2))
    x = np.arange(n)
    width = 0.38
    ax1.bar(x - width / 2, stats.multipliers, width, label="output multiplier",
            color="#4878d0")
    ax1.bar(x + width / 2, stats.domar, width, label="Domar weight", color="#ee854a")
    ax1.axhline(stats.weighted_multiplier, color="#4878d0", linestyle="--",
                linewidth=1, label="weighted multiplier")
    ax1.set_xticks(x)
    ax1.set_xticklabels(labels, rotation=45 if n > 8 else 0, ha="right" if n > 8 else "center")
    ax1.set_xlabel("industry")
    ax1.legend(fontsize=8)
    ax1.grid(True, axis="y", alpha=0.3)

    im = ax2.imshow(stats.H, cmap="viridis")
    ax2.set_title("total requirements (row: buyer)", fontsize=10)
    ax2.set_xlabel("supplying industry")
    ax2.set_ylabel("buying industry")
    fig.colorbar(im, ax=ax2, fraction=0.046)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)


def save_trajectory_figure(traj: Trajectory, path: Path, names=None) -> None:
    """Rates converging to the closed form, stocks on a log scale."""
    n = traj.n
    labels = _industry_labels(n, names)
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4.2))
    for i in range(n):
        (line,) = ax1.plot(traj.times, traj.rates[:, i], label=labels[i], linewidth=1.2)
        if traj.convergence is not None:
            ax1.axhline(traj.convergence.steady_state[i], color=line.get_color(),
                        linestyle=":", linewidth=0.8)
    ax1.set_xlabel("time")
    ax1.set_ylabel("growth rate")
    if n <= 10:
        ax1.legend(fontsize=7)
    ax1.grid(True, alpha=0.3)

    for i in range(n):
        ax2.semilogy(traj.times, traj.stocks[:, i], linewidth=1.2)
    ax2.set_xlabel("time")
    ax2.set_ylabel("productivity stock (log scale)")
    ax2.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)


def save_pair_contrast_figure(report: PairContrastReport, path: Path) -> None:
    """Gradient forms on the equal-Domar pair, side by side."""
    fig, axes = plt.subplots(1, 2, figsize=(9, 4.0), sharey=True)
    for ax, tag, theta, dense, comp in (
        (axes[0], "network a (uncoupled)", report.theta_a,
         report.matrix_gradient_a, report.component_gradient_a),
        (axes[1], "network b (coupled)", report.theta_b,
         report.matrix_gradient_b, report.component_gradient_b),
    ):
        x = np.arange(len(theta))
        ax.bar(x - 0.28, theta, 0.26, label="Domar weight", color="#6acc64")
        ax.bar(x, dense, 0.26, label="dense gradient", color="#4878d0")
        ax.bar(x + 0.28, comp, 0.26, label="component gradient", color="#ee854a")
        ax.set_title(tag, fontsize=10)
        ax.set_xticks(x)
        ax.set_xticklabels([f"industry {i + 1}" for i in x])
        ax.grid(True, axis="y", alpha=0.3)
    axes[0].set_ylabel("growth response")
    axes[0].legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)


def save_hulten_figure(report: HultenRecoveryReport, path: Path) -> None:
    """Policy gradient against Domar weights for the recovery check."""
    n = report.n
    x = np.arange(n)
    fig, ax = plt.subplots(figsize=(7, 4.0))
    ax.bar(x - 0.2, report.domar, 0.38, label="Domar weight", color="#6acc64")
    ax.bar(x + 0.2, report.gradient, 0.38, label="policy gradient", color="#4878d0")
    ax.set_xlabel("industry")
    ax.set_title(
        f"alpha={report.alpha:g}, beta={report.beta:g}, max gap={report.max_gap:.2e}",
        fontsize=10,
    )
    ax.legend(fontsize=8)
    ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)


def save_correlation_figure(report: CorrelationReport, path: Path) -> None:
    """Pooled multiplier/rate scatter with fitted and theoretical lines."""
    mult = report.samples[:, 2]
    gamma = report.samples[:, 3]
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    ax.plot(mult, gamma, ".", markersize=2, alpha=0.15, color="#4878d0",
            rasterized=True)
    grid = np.linspace(mult.min(), mult.max(), 50)
    ax.plot(grid, report.pooled_intercept + report.pooled_slope * grid,
            color="#d65f5f", linewidth=1.8,
            label=f"fit: slope {report.pooled_slope:.4f}")
    ax.plot(grid, report.theoretical_slope * grid, color="#2e2e2e", linewidth=1.4,
            linestyle="--", label=f"theory: slope {report.theoretical_slope:.4f}")
    ax.set_xlabel("output multiplier")
    ax.set_ylabel("steady-state growth rate")
    ax.set_title(
        f"mean per-trial correlation {report.mean_correlation:.3f} "
        f"({report.n_trials_used} trials)", fontsize=10)
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)
