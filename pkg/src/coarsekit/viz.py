"""Figure helpers: every plot is rendered straight to a file.

Uses the non-interactive backend so the CLI can run headless; callers get the
written path back.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .geom import GeoComplex  # noqa: E402

__all__ = ["plot_complex", "plot_staircase", "plot_points", "plot_residuals"]


def _edges(c: GeoComplex):
    return sorted(s for s in c.simplices if len(s) == 2)


def plot_complex(c: GeoComplex, path, title: str | None = None) -> Path:
    """Wireframe of a complex: 1- and 2-dimensional ambient plots directly,
    three dimensions as a 3d wireframe."""
    path = Path(path)
    coords = c.coords
    dim = c.ambient_dim
    fig = plt.figure(figsize=(6, 6))
    if dim <= 2:
        ax = fig.add_subplot(111)
        flat = coords if dim == 2 else np.hstack([coords, np.zeros((len(coords), 1))])
        for a, b in _edges(c):
            ax.plot(flat[[a, b], 0], flat[[a, b], 1], "b-", lw=0.8)
        ax.plot(flat[:, 0], flat[:, 1], "k.", ms=3)
        ax.set_aspect("equal")
    elif dim == 3:
        ax = fig.add_subplot(111, projection="3d")
        for a, b in _edges(c):
            ax.plot(coords[[a, b], 0], coords[[a, b], 1], coords[[a, b], 2], "b-", lw=0.6)
        ax.scatter(coords[:, 0], coords[:, 1], coords[:, 2], c="k", s=4)
    else:
        ax = fig.add_subplot(111)
        ax.text(0.5, 0.5, f"ambient dimension {dim} not drawable", ha="center")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_staircase(radii, values, path, label: str = "S(R)", title: str | None = None) -> Path:
    path = Path(path)
    fig, ax = plt.subplots(figsize=(6, 4))
    finite = [v if np.isfinite(v) else np.nan for v in values]
    ax.step(radii, finite, where="post", label=label)
    ax.plot(radii, finite, "k.", ms=4)
    ax.set_xlabel("R")
    ax.set_ylabel(label)
    if title:
        ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_points(points, path, title: str | None = None) -> Path:
    """Scatter/line plot of a 2-d point path (e.g. the spiral ray)."""
    path = Path(path)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    fig, ax = plt.subplots(figsize=(6, 6))
    ax.plot(pts[:, 0], pts[:, 1], "b-", lw=0.8)
    ax.plot(pts[:, 0], pts[:, 1], "k.", ms=2)
    ax.set_aspect("equal")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_residuals(labels, values, path, bound: float | None = None, title: str | None = None) -> Path:
    path = Path(path)
    fig, ax = plt.subplots(figsize=(6, 4))
    xs = np.arange(len(labels))
    ax.bar(xs, values, color="steelblue")
    if bound is not None:
        ax.axhline(bound, color="red", ls="--", label=f"bound {bound:g}")
        ax.legend()
    ax.set_xticks(xs)
    ax.set_xticklabels(labels, rotation=30, ha="right", fontsize=8)
    if values and min(values) > 0:
        ax.set_yscale("log")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
