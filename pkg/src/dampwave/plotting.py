"""Matplotlib figures written straight to files (Agg backend)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .pde_solver import LifespanStatus  # noqa: E402


def lifespan_figure(records, fits, path: str) -> str:
    """Two panels: ``T`` against ``eps`` on log axes, and ``log T`` against
    ``eps**-1/2`` and ``eps**-2/3`` with the fitted laws."""
    pts = sorted((r.epsilon, r.T_num) for r in records
                 if LifespanStatus(r.status) is LifespanStatus.BLEW_UP)
    eps, T = (np.array(v) for v in zip(*pts)) if pts else (np.empty(0), np.empty(0))
    fine = np.geomspace(eps.min(), eps.max(), 200) if eps.size else eps
    fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(10, 4))
    ax0.loglog(eps, T, "ko", label="T_num")
    for f in fits:
        ax0.loglog(fine, f.curve(fine), label=f"{f.model.value} (r2={f.r_squared:.4f})")
    ax0.set_xlabel("epsilon")
    ax0.set_ylabel("lifespan")
    ax0.legend(fontsize=7)
    for f in fits:
        if f.model.value == "PowerLaw":
            continue
        theta = 0.5 if f.model.value == "ExpHalf" else 2 / 3
        ax1.plot(eps ** -theta, np.log(T), "o", label=f"data vs eps^-{theta:.3g}")
        ax1.plot(fine ** -theta, np.log(f.curve(fine)), "-")
    ax1.set_xlabel("eps^-theta")
    ax1.set_ylabel("log T")
    ax1.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path


def decay_figure(t, scaled, label: str, path: str) -> str:
    """Scaled free solution against ``t - r`` (should level off at the data integral)."""
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.semilogx(t, scaled, "-o", ms=3)
    ax.set_xlabel("t - r")
    ax.set_ylabel(label)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path
