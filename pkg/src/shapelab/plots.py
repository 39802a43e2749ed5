"""Figure rendering for equidistribution reports.

Renders PNG companions next to the JSON/CSV outputs: per-cell deviations,
the x-marginal against its closed-form density, the shape cloud on the
fundamental domain, and the y-tail against 3/(pi t).
"""

from __future__ import annotations

import math
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .measure import MU_TOTAL

__all__ = ["render_report_figures"]


def _domain_boundary(ax):
    xs = np.linspace(0, 0.5, 200)
    ax.plot(xs, np.sqrt(1 - xs * xs), "k-", lw=1)
    ax.axvline(0.0, color="k", lw=1)
    ax.axvline(0.5, color="k", lw=1)


def render_report_figures(report, x, y, outdir: str, stem: str = "report") -> list[str]:
    """Render figures for a StatsReport plus the raw shape coordinates.

    Returns the list of files written.
    """
    os.makedirs(outdir, exist_ok=True)
    paths = []

    # per-cell relative deviation
    fig, ax = plt.subplots(figsize=(7, 3.2))
    devs = [c["rel_dev"] for c in report.cells]
    ax.bar(range(len(devs)), devs, color="#33658a")
    ax.axhline(0, color="k", lw=0.8)
    if report.N:
        sigma = [1.0 / math.sqrt(c["expected"]) if c["expected"] > 0 else 0 for c in report.cells]
        ax.plot(range(len(devs)), [2 * s for s in sigma], "r--", lw=0.8, label="±2σ")
        ax.plot(range(len(devs)), [-2 * s for s in sigma], "r--", lw=0.8)
        ax.legend(loc="upper right", fontsize=8)
    ax.set_xlabel("cell index")
    ax.set_ylabel("relative deviation")
    ax.set_title(f"equal-measure cells, N={report.N}")
    fig.tight_layout()
    p = os.path.join(outdir, f"{stem}_cells.png")
    fig.savefig(p, dpi=130)
    plt.close(fig)
    paths.append(p)

    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)

    # x marginal vs closed form 6 / (pi sqrt(1-x^2))
    fig, ax = plt.subplots(figsize=(5, 3.4))
    if len(x):
        ax.hist(x, bins=60, range=(0, 0.5), density=True, color="#86bbd8", label="sample")
    xs = np.linspace(0, 0.4999, 300)
    ax.plot(xs, 6 / (math.pi * np.sqrt(1 - xs * xs)), "k-", lw=1.2, label="density")
    ax.set_xlabel("x")
    ax.set_ylabel("density")
    ax.legend(fontsize=8)
    fig.tight_layout()
    p = os.path.join(outdir, f"{stem}_xmarginal.png")
    fig.savefig(p, dpi=130)
    plt.close(fig)
    paths.append(p)

    # shape cloud on the fundamental domain
    fig, ax = plt.subplots(figsize=(4.2, 5))
    if len(x):
        k = min(len(x), 20000)
        idx = np.linspace(0, len(x) - 1, k).astype(int)
        ax.plot(x[idx], y[idx], ".", ms=1.2, alpha=0.35, color="#2f4858")
    _domain_boundary(ax)
    ax.set_xlim(-0.02, 0.52)
    ax.set_ylim(0.8, max(3.0, np.percentile(y, 99.5) if len(y) else 3.0))
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title("shapes in the fundamental domain")
    fig.tight_layout()
    p = os.path.join(outdir, f"{stem}_domain.png")
    fig.savefig(p, dpi=130)
    plt.close(fig)
    paths.append(p)

    # y tail versus 3/(pi t)
    fig, ax = plt.subplots(figsize=(5, 3.4))
    if len(y):
        ys = np.sort(y)
        surv = 1.0 - np.arange(1, len(ys) + 1) / len(ys)
        sel = ys >= 1.0
        ax.loglog(ys[sel], np.maximum(surv[sel], 1e-12), "-", color="#86bbd8", label="sample")
    ts = np.geomspace(1.0, max(4.0, float(np.max(y)) if len(y) else 4.0), 100)
    ax.loglog(ts, 3 / (math.pi * ts), "k--", lw=1.2, label="3/(pi t)")
    ax.set_xlabel("t")
    ax.set_ylabel("P(Y > t)")
    ax.legend(fontsize=8)
    fig.tight_layout()
    p = os.path.join(outdir, f"{stem}_ytail.png")
    fig.savefig(p, dpi=130)
    plt.close(fig)
    paths.append(p)
    return paths
