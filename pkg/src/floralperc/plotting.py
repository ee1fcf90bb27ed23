"""Report figures.  Everything renders off-screen (Agg) straight to files."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .cardy import SQRT3, h_triple  # noqa: E402


# u vanishes on C, v on A, w on B
REFERENCE = {"u": 2, "v": 0, "w": 1}


def _save(fig, path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_cardy_field(fe, path, which: str = "u"):
    """Estimated field, reference and error side by side on the unit triangle."""
    z = fe.z
    m, _ = fe.estimate(which)
    ref = h_triple(z.real, z.imag)[REFERENCE[which]]
    fig, axes = plt.subplots(1, 3, figsize=(12, 3.8))
    tri = np.array([0, 1, np.exp(1j * np.pi / 3), 0])
    for ax, vals, title, cmap in (
        (axes[0], m, f"{which} (N={fe.N}, n={fe.n})", "viridis"),
        (axes[1], ref, "reference", "viridis"),
        (axes[2], m - ref, "error", "coolwarm"),
    ):
        lim = max(abs(vals).max(), 1e-9) if cmap == "coolwarm" else None
        sc = ax.scatter(z.real, z.imag, c=vals, s=8, cmap=cmap,
                        vmin=-lim if lim else 0, vmax=lim if lim else 1)
        ax.plot(tri.real, tri.imag, "k-", lw=0.8)
        ax.set_aspect("equal")
        ax.set_title(title)
        ax.set_xlim(-0.02, 1.02)
        ax.set_ylim(-0.02, SQRT3 / 2 + 0.02)
        fig.colorbar(sc, ax=ax, shrink=0.8)
    return _save(fig, path)


def plot_cardy_convergence(rows, path):
    fig, ax = plt.subplots(figsize=(5, 3.6))
    Ns = [r.N for r in rows]
    for w in "uvw":
        ax.plot(Ns, [r.max_err[w] for r in rows], "o-", label=f"max |{w} - h|")
    ax.plot(Ns, [r.sum_dev for r in rows], "s--", label="max |u+v+w-1|")
    ax.set_xscale("log")
    ax.set_xticks(Ns, [str(n) for n in Ns])
    ax.set_xlabel("N")
    ax.legend(fontsize=8)
    return _save(fig, path)


def plot_contour(rows, path):
    fig, ax = plt.subplots(figsize=(5, 3.6))
    for pair in sorted({r["pair"] for r in rows}):
        sub = [r for r in rows if r["pair"] == pair]
        ax.errorbar([r["N"] for r in sub], [r["abs"] for r in sub], yerr=[r["stderr"] for r in sub],
                    marker="o", capsize=3, label=pair)
    ax.set_xscale("log")
    ax.set_xlabel("N")
    ax.set_ylabel("|contour integral|")
    ax.legend(fontsize=8)
    return _save(fig, path)


def plot_arms(study, path):
    fig, ax = plt.subplots(figsize=(5, 3.6))
    keep = [(n, e) for n, e in zip(study.n_list, study.estimates) if e.successes > 0]
    ax.errorbar([n for n, _ in keep], [e.mean for _, e in keep], yerr=[e.stderr for _, e in keep],
                fmt="o", capsize=3)
    if study.slope is not None:
        ns = np.array([n for n, _ in keep], float)
        ms = np.array([e.mean for _, e in keep])
        c = np.exp(np.mean(np.log(ms) - study.slope * np.log(ns)))
        ax.plot(ns, c * ns**study.slope, "k--", lw=0.8,
                label=f"slope {study.slope:.3f} +/- {study.slope_err:.3f}")
        ax.legend(fontsize=8)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel(f"one-arm probability (m={study.m})")
    return _save(fig, path)


def plot_crossing(rows, path):
    fig, ax = plt.subplots(figsize=(5, 3.6))
    keys = sorted({(r["aspect"], r["way"], r["color"]) for r in rows})
    for aspect, way, color in keys:
        sub = [r for r in rows if (r["aspect"], r["way"], r["color"]) == (aspect, way, color)]
        ax.errorbar([r["N"] for r in sub], [r["estimate"].mean for r in sub],
                    yerr=[r["estimate"].stderr for r in sub], marker="o", capsize=3,
                    label=f"{way} {color} (h/w={aspect:.3f})")
    ax.set_xscale("log")
    ax.set_ylim(0, 1)
    ax.set_xlabel("N")
    ax.set_ylabel("crossing probability")
    ax.legend(fontsize=7)
    return _save(fig, path)
