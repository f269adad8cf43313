"""Figures for probe score reports, written as PNG files."""
from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def accuracy_figure(report: dict, path: str) -> str:
    names = sorted(report["responders"])
    acc = [report["responders"][n]["accuracy"] for n in names]
    fig, ax = plt.subplots(figsize=(max(4, 1.2 * len(names)), 3.5))
    ax.bar(names, acc, color="#4C72B0")
    ax.set_ylim(0, 1)
    ax.set_ylabel("accuracy vs gold")
    for x, y in enumerate(acc):
        ax.text(x, y + 0.02, f"{y:.2f}", ha="center", fontsize=8)
    ax.tick_params(axis="x", labelrotation=30)
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)
    return path


def agreement_matrix(report: dict) -> tuple[list, list]:
    names = sorted(report["responders"])
    grid = []
    for a in names:
        row = []
        for b in names:
            if a == b:
                row.append(1.0)
            else:
                key = f"{a}|{b}" if a < b else f"{b}|{a}"
                row.append(report["agreement"][key])
        grid.append(row)
    return names, grid


def agreement_figure(report: dict, path: str) -> str:
    names, grid = agreement_matrix(report)
    fig, ax = plt.subplots(figsize=(1 + 0.8 * len(names), 1 + 0.8 * len(names)))
    im = ax.imshow(grid, vmin=0, vmax=1, cmap="viridis")
    ax.set_xticks(range(len(names)), names, rotation=45, ha="right")
    ax.set_yticks(range(len(names)), names)
    for i, row in enumerate(grid):
        for j, v in enumerate(row):
            ax.text(j, i, f"{v:.2f}", ha="center", va="center", fontsize=7, color="w" if v < 0.6 else "k")
    fig.colorbar(im, ax=ax, fraction=0.046)
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)
    return path


def write_figures(report: dict, out_dir: str) -> list[str]:
    os.makedirs(out_dir, exist_ok=True)
    return [
        accuracy_figure(report, os.path.join(out_dir, "accuracy.png")),
        agreement_figure(report, os.path.join(out_dir, "agreement.png")),
    ]
