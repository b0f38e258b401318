"""Report figures, rendered off-screen to PNG files."""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .cone import FiniteDiscrete  # noqa: E402


def _save(fig, directory, name):
    os.makedirs(directory, exist_ok=True)
    path = os.path.join(directory, name)
    fig.savefig(path, dpi=100)
    plt.close(fig)
    return path


def recovery_figure(result, directory, truth=None, name="recovery.png"):
    """Recovered ``tau`` and ``h`` (and the generator's, when known)."""
    fig, (ax_t, ax_h) = plt.subplots(1, 2, figsize=(10, 4))
    Y = result.codomain
    if isinstance(Y, FiniteDiscrete):
        n = Y.size
        X = result.domain
        grid = np.zeros((n, n))
        for i, y in enumerate(Y.points):
            grid[i, X.index(result.tau(y))] = 1.0
        ax_t.imshow(grid, cmap="Greys", interpolation="nearest")
        ax_t.set_xlabel("x index")
        ax_t.set_ylabel("y index")
        ax_t.set_title("recovered tau")
        ax_h.bar(range(n), [float(v) for v in result.h.values], color="tab:blue", label="recovered")
        if truth is not None:
            ax_h.plot(range(n), [float(truth.h(y)) for y in Y.points], "k.", label="generator")
        ax_h.set_xlabel("y index")
    else:
        ys = [s.y for s in result.samples]
        ax_t.plot(ys, [s.x for s in result.samples], "o", ms=4, label="recovered")
        ax_h.plot(ys, [s.h for s in result.samples], "o", ms=4, label="recovered")
        if truth is not None:
            fine = np.linspace(min(ys), max(ys), 400)
            ax_t.plot(fine, [truth.tau(y) for y in fine], "k-", lw=1, label="generator")
            ax_h.plot(fine, [truth.h(y) for y in fine], "k-", lw=1, label="generator")
        ax_t.set_xlabel("y")
        ax_t.set_ylabel("tau(y)")
        ax_h.set_xlabel("y")
        ax_t.legend()
    ax_h.set_ylabel("h(y)")
    ax_h.set_title(f"weight ({result.verdict}, residual {float(result.residual_max):.3g})")
    ax_h.legend()
    fig.tight_layout()
    return _save(fig, directory, name)


def check_figure(reports, directory, name="checks.png"):
    """Worst discrepancy per property; failing properties in red."""
    fig, ax = plt.subplots(figsize=(8, 4))
    labels = [r["property"] + (f"/{r['constants']['tuple_size']}"
                               if "tuple_size" in r.get("constants", {}) else "")
              for r in reports]
    values = [abs(float(_as_float(r["max_discrepancy"]))) for r in reports]
    colors = ["tab:green" if r["verdict"] == "pass" else "tab:red" for r in reports]
    ax.bar(range(len(reports)), values, color=colors)
    ax.set_xticks(range(len(reports)))
    ax.set_xticklabels(labels, rotation=30, ha="right")
    ax.set_ylabel("max discrepancy")
    if any(v > 0 for v in values):
        ax.set_yscale("symlog", linthresh=1e-12)
    fig.tight_layout()
    return _save(fig, directory, name)


def enumerate_figure(report, directory, name="enumerate.png"):
    fig, ax = plt.subplots(figsize=(5, 4))
    keys = ["passing_count", "monomial_count", "non_monomial_count"]
    ax.bar(["passing", "monomial", "non-monomial"], [report[k] for k in keys],
           color=["tab:blue", "tab:green", "tab:orange"])
    c = report["cone"]
    ax.set_title(f"{c['n']} points, values 0..{c['max']}")
    ax.set_ylabel("bijections")
    fig.tight_layout()
    return _save(fig, directory, name)


def _as_float(v):
    if isinstance(v, str):
        num, _, den = v.partition("/")
        return float(num) / float(den or 1)
    return float(v)
