"""Static figures written next to the CSV/JSON outputs."""

from __future__ import annotations

import csv

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def _read(path: str) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def plot_dims(csv_path: str, png_path: str) -> str:
    _, rows = _read(csv_path)
    levels = [int(r[0]) for r in rows]
    dims = [int(r[1]) for r in rows]
    fig, ax = plt.subplots(figsize=(4.5, 3.2))
    ax.plot(levels, dims, marker="o")
    ax.set_xlabel("level j")
    ax.set_ylabel("dim G^j")
    ax.set_xticks(levels)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(png_path, dpi=120)
    plt.close(fig)
    return png_path


def plot_trajectories(csv_paths: dict[str, str], png_path: str) -> str:
    """Distance to target and energy for each labelled trajectory CSV."""
    fig, (a1, a2) = plt.subplots(1, 2, figsize=(8, 3.2))
    for label, path in csv_paths.items():
        _, rows = _read(path)
        t = [float(r[0]) for r in rows]
        a2.plot(t, [float(r[1]) for r in rows], label=label)
        if rows and rows[0][3]:
            a1.plot(t, [float(r[3]) for r in rows], label=label)
    a1.set_xlabel("t")
    a1.set_ylabel("V-distance to target")
    a2.set_xlabel("t")
    a2.set_ylabel("energy")
    for ax in (a1, a2):
        ax.grid(alpha=0.3)
        ax.legend()
    fig.tight_layout()
    fig.savefig(png_path, dpi=120)
    plt.close(fig)
    return png_path
