"""Figure rendering for run reports.

Each report kind has one figure: sampled paths against time, running
kernel estimates against sample size, per-endpoint inequality margins, or
the counting curve against its bounds.  Figures are a side channel for
humans; the delimited report stays the machine-readable artifact.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["render_figure"]

MAX_PATHS_SHOWN = 40


def _paths_figure(ax, payload):
    times = np.asarray(payload["times"])
    nodes = np.asarray(payload["nodes"])  # (n_paths, n_nodes, dim)
    for i in range(min(MAX_PATHS_SHOWN, nodes.shape[0])):
        ax.plot(times, nodes[i, :, 0], lw=0.7, alpha=0.6)
    ax.set_xlabel("t")
    ax.set_ylabel("x_1(t)")
    ax.set_title(f"{nodes.shape[0]} sampled paths (first component)")


def _kernel_figure(ax, payload):
    running = np.asarray(payload["running_abs"])
    counts = np.asarray(payload["running_counts"])
    ax.plot(counts, running, marker=".", label="|estimate|")
    val = abs(complex(payload["value_re"], payload["value_im"]))
    se = payload["std_error"]
    ax.axhline(val, color="k", lw=0.8)
    ax.fill_between(
        [counts[0], counts[-1]], val - 3 * se, val + 3 * se,
        alpha=0.15, color="gray", label="final +/- 3 SE",
    )
    ax.set_xlabel("paths")
    ax.set_ylabel("|kernel estimate|")
    ax.set_title("Monte Carlo convergence")
    ax.legend()


def _margin_figure(ax, payload):
    details = payload.get("details", [])
    pairs = [d for d in details if "slack" in d]
    if not pairs:
        ax.text(0.5, 0.5, "no per-endpoint details", ha="center")
        return
    idx = np.arange(len(pairs))
    slack = [d["slack"] for d in pairs]
    ax.bar(idx, slack, color=["tab:green" if s >= 0 else "tab:red" for s in slack])
    ax.axhline(0.0, color="k", lw=0.8)
    ax.set_xlabel("endpoint pair")
    ax.set_ylabel("slack (rhs + 3 SE - lhs)")
    ax.set_title(f"{payload['check']}: worst margin {payload['worst_margin']:.3g}")


def _ids_figure(ax, payload):
    e = np.asarray(payload["energies"])
    mean = np.asarray(payload["n_mean"])
    se = np.asarray(payload["n_se"])
    ax.errorbar(e, mean, yerr=3 * se, fmt=".-", lw=1, label="N(E), 3 SE")
    ax.plot(e, payload["bound_optimized"], "--", label="optimized bound")
    ax.plot(e, payload["bound_fixed_beta"], ":", label="fixed-beta bound")
    weyl = np.asarray(payload["weyl"], dtype=float)
    ok = np.isfinite(weyl)
    if ok.any():
        ax.plot(e[ok], weyl[ok], "-.", label="Weyl growth")
    positive = mean[mean > 0]
    if positive.size:
        ax.set_yscale("log")
        ax.set_ylim(bottom=max(positive.min() * 0.1, 1e-12))
    ax.set_xlabel("E")
    ax.set_ylabel("states per volume")
    ax.set_title("integrated density of states vs bounds")
    ax.legend()


def _oracle_figure(ax, payload):
    vals = np.asarray(payload["eigenvalues"])
    ax.step(vals, np.arange(1, vals.size + 1), where="post")
    ax.set_xlabel("E")
    ax.set_ylabel("eigenvalues below E")
    ax.set_title("lattice counting staircase")


def _moments_figure(ax, payload):
    z = [p["z_score"] for p in payload["probes"]]
    ax.bar(np.arange(len(z)), z)
    ax.axhline(4.0, color="tab:red", lw=0.8)
    ax.axhline(-4.0, color="tab:red", lw=0.8)
    ax.set_xlabel("probe")
    ax.set_ylabel("z-score")
    ax.set_title("moment probes vs targets")


_RENDERERS = {
    "paths": _paths_figure,
    "kernel": _kernel_figure,
    "verification": _margin_figure,
    "ids": _ids_figure,
    "oracle": _oracle_figure,
    "moments": _moments_figure,
}


def render_figure(kind: str, payload: dict, out_path: str) -> str:
    renderer = _RENDERERS.get(kind)
    if renderer is None:
        raise ValueError(f"no figure renderer for report kind {kind!r}")
    fig, ax = plt.subplots(figsize=(7, 4.5))
    renderer(ax, payload)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path
