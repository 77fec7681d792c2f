"""Figures for comparison reports, rendered to files with the Agg backend."""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def plot_states(trajectories, labels, path, channels=(0, 1), window=None):
    """State channels of several trajectories over time, one panel per channel."""
    fig, axes = plt.subplots(len(channels), 1, figsize=(7, 2.6 * len(channels)), sharex=True)
    axes = np.atleast_1d(axes)
    for ax, i in zip(axes, channels):
        for tr, lab in zip(trajectories, labels):
            ax.plot(tr.t, tr.x[:, i], lw=1.0, label=lab)
        if window is not None:
            ax.axvspan(*window, color="0.9", zorder=0)
        ax.set_ylabel(f"x{i + 1}")
        ax.grid(alpha=0.3)
    axes[0].legend(loc="upper right")
    axes[-1].set_xlabel("t [s]")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_phase(trajectories, labels, path, i=0, j=1):
    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    for tr, lab in zip(trajectories, labels):
        ax.plot(tr.x[:, i], tr.x[:, j], lw=0.8, label=lab)
    ax.set_xlabel(f"x{i + 1}")
    ax.set_ylabel(f"x{j + 1}")
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_control(trajectories, labels, path):
    fig, ax = plt.subplots(figsize=(7, 2.8))
    for tr, lab in zip(trajectories, labels):
        ax.plot(tr.t, tr.u[:, 0], lw=0.8, label=lab)
    ax.set_xlabel("t [s]")
    ax.set_ylabel("u")
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_hom_norm(trajectories, labels, path):
    """Homogeneous-norm histories against the unit level of the invariant ellipsoid."""
    fig, ax = plt.subplots(figsize=(7, 2.8))
    for tr, lab in zip(trajectories, labels):
        if tr.hom_norm is not None:
            ax.plot(tr.t, tr.hom_norm, lw=0.8, label=lab)
    ax.axhline(1.0, color="k", ls="--", lw=0.8)
    ax.set_xlabel("t [s]")
    ax.set_ylabel("||x||_{d,P}")
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
