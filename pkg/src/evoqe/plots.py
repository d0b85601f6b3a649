"""Figure rendering for the CLI report paths.

Every function takes already-computed data, writes one PNG and returns the
path; nothing here recomputes physics.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _finish(fig, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_cycle_energies(cycle_energies, path, reference=None) -> Path:
    """Cycle-end energy per evolution cycle, with optional exact reference."""
    fig, ax = plt.subplots(figsize=(5, 3.4))
    cycles = np.arange(len(cycle_energies))
    ax.plot(cycles, cycle_energies, "o-", color="tab:green", label="cycle energy")
    if reference is not None:
        ax.axhline(reference, color="k", ls="--", lw=1, label="exact ground")
    ax.set_xlabel("evolution cycle")
    ax.set_ylabel("energy")
    ax.legend(frameon=False)
    return _finish(fig, Path(path))


def plot_trajectory(trajectory, path) -> Path:
    """Best-so-far energy against evaluation count (log-x)."""
    fig, ax = plt.subplots(figsize=(5, 3.4))
    indices = np.array([t[0] for t in trajectory])
    energies = np.minimum.accumulate(np.array([t[1] for t in trajectory]))
    ax.semilogx(indices, energies, lw=1, color="tab:blue")
    ax.set_xlabel("energy evaluations")
    ax.set_ylabel("lowest energy so far")
    return _finish(fig, Path(path))


def plot_landscape(theta1, theta2, energies, path) -> Path:
    """Heatmap of the two-parameter energy grid."""
    fig, ax = plt.subplots(figsize=(4.6, 3.8))
    mesh = ax.pcolormesh(theta2, theta1, energies, shading="nearest", cmap="viridis")
    fig.colorbar(mesh, ax=ax, label="energy")
    i, j = np.unravel_index(np.argmin(energies), np.asarray(energies).shape)
    ax.plot(theta2[j], theta1[i], "r*", ms=12, label="grid minimum")
    ax.set_xlabel(r"$\theta_2$")
    ax.set_ylabel(r"$\theta_1$")
    ax.legend(frameon=False, loc="upper right")
    return _finish(fig, Path(path))


def plot_census(final_energies, path, ground_energy=None, neel_energy=None) -> Path:
    """Histogram of optimizer restart outcomes."""
    fig, ax = plt.subplots(figsize=(5, 3.4))
    ax.hist(final_energies, bins=40, color="tab:red", alpha=0.8)
    if ground_energy is not None:
        ax.axvline(ground_energy, color="k", lw=1, label="ground")
    if neel_energy is not None:
        ax.axvline(neel_energy, color="k", ls="--", lw=1, label="Neel")
    ax.set_xlabel("final energy")
    ax.set_ylabel("runs")
    ax.legend(frameon=False)
    return _finish(fig, Path(path))


def plot_batch_ratios(ratios, path) -> Path:
    """Per-instance energy ratio before/after evolution."""
    fig, ax = plt.subplots(figsize=(5, 3.4))
    ax.plot(ratios, "o", ms=3, color="tab:orange")
    ax.axhline(1.0, color="k", lw=1)
    ax.set_xlabel("instance")
    ax.set_ylabel("ratio plain VQE / evolved")
    return _finish(fig, Path(path))
