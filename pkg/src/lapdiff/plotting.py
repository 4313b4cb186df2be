"""Figure rendering for sweep and estimate reports.

Kept separate from the scoring code: metrics produce the numbers, the CLI
report path calls in here to draw them.  Uses the Agg backend so rendering
works headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["render_sweep_figure", "render_support_figure"]


def render_sweep_figure(rows, path, title: str = "") -> None:
    """Score indexes against lambda: acc plus the per-class rates.

    TP/TN are the within-class recovery rates (fraction of truly changed /
    unchanged coordinates classified correctly); FP/FN are their
    complements.  These are the curves that approach 1 and 0 in the good
    regime.
    """
    lams = [r.lam for r in rows]
    acc = [r.acc for r in rows]
    tp = [r.tp_rate for r in rows]
    tn = [r.tn_rate for r in rows]
    fp = [1.0 - r.tn_rate for r in rows]
    fn = [1.0 - r.tp_rate for r in rows]

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.plot(lams, acc, "k-o", ms=4, label="acc")
    ax.plot(lams, tp, "-s", ms=4, color="tab:blue", label="TP")
    ax.plot(lams, tn, "-^", ms=4, color="tab:green", label="TN")
    ax.plot(lams, fp, "--v", ms=4, color="tab:orange", label="FP")
    ax.plot(lams, fn, "--d", ms=4, color="tab:red", label="FN")
    ax.set_xlabel(r"$\lambda$")
    ax.set_ylabel("index value")
    ax.set_ylim(-0.05, 1.05)
    ax.grid(True, alpha=0.3)
    ax.legend(loc="center right", fontsize=9)
    if title:
        ax.set_title(title, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_support_figure(L0, dL_hat, path, title: str = "") -> None:
    """Side-by-side sparsity patterns: reference Laplacian and estimated change."""
    L0 = np.asarray(L0)
    dL_hat = np.asarray(dL_hat)
    fig, axes = plt.subplots(1, 2, figsize=(8.0, 4.0))
    for ax, M, name in zip(axes, (L0, dL_hat), ("reference L0", "estimated change")):
        scale = np.max(np.abs(M))
        mask = np.abs(M) > (1e-9 * scale if scale > 0 else 0.0)
        ax.imshow(mask, cmap="Greys", interpolation="nearest")
        ax.set_title(name, fontsize=10)
        ax.set_xticks([])
        ax.set_yticks([])
    if title:
        fig.suptitle(title, fontsize=11)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
