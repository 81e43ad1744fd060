"""Figure rendering for the report path.

Every renderer takes plain data, writes one PNG, and returns the path.
The delimited reports remain the canonical artifacts; figures are views.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_STYLE = {
    "figure.figsize": (7.0, 4.2),
    "figure.dpi": 110,
    "savefig.dpi": 150,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 10,
    "axes.titlesize": 11,
    "legend.fontsize": 9,
}


def _new_axes(title: str, xlabel: str, ylabel: str):
    plt.rcParams.update(_STYLE)
    fig, ax = plt.subplots()
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    return fig, ax


def _save(fig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, bbox_inches="tight")
    plt.close(fig)
    return path


def render_char_bounds(rows_by_level: dict[int, list], path: str | Path) -> Path:
    """Measured character-sum magnitudes against their proven envelope, per level."""
    fig, ax = _new_axes(
        "Character-sum magnitudes vs. bound", "harmonic k", "magnitude (log scale)"
    )
    for level in sorted(rows_by_level):
        rows = sorted(rows_by_level[level], key=lambda r: r.k)
        ks = [r.k for r in rows if r.k > 0]
        sup = [r.grid_sup for r in rows if r.k > 0]
        bound = [min(r.bound_triangle, r.bound_analytic) for r in rows if r.k > 0]
        ax.plot(ks, sup, lw=1.0, label=f"measured, level {level}")
        ax.plot(ks, bound, lw=0.8, ls="--", label=f"bound, level {level}")
    ax.set_yscale("log")
    ax.legend(ncol=2)
    return _save(fig, path)


def render_deviation(qs, deviations, fit, path: str | Path) -> Path:
    """Block-sum deviation per level with the fitted exponential majorant."""
    fig, ax = _new_axes(
        "Block-sum deviation from the mean", "denominator q_n", "grid-sup deviation"
    )
    ax.semilogy(qs, deviations, "o-", label="measured")
    if fit is not None:
        grid = np.linspace(min(qs), max(qs), 200)
        ax.semilogy(grid, fit.scale * np.exp(-fit.rate * grid), "--",
                    label=f"majorant {fit.scale:.3g}*exp(-{fit.rate:.3g} q)")
    ax.legend()
    return _save(fig, path)


def render_near_return(rows_by_level: dict[int, list], path: str | Path) -> Path:
    """d_physical and d_integer against K, one pair of curves per level."""
    fig, ax = _new_axes("Near-return distances", "K", "distance")
    for level in sorted(rows_by_level):
        rows = rows_by_level[level]
        ks = [r[0] for r in rows]
        ax.plot(ks, [r[1] for r in rows], lw=1.0, label=f"physical, level {level}")
        ax.plot(ks, [r[2] for r in rows], lw=1.0, ls="--", label=f"integer, level {level}")
    ax.set_yscale("log")
    ax.legend(ncol=2)
    return _save(fig, path)


def render_experiment(reports, path: str | Path) -> Path:
    """Worst-case gaps and discrepancy across levels."""
    fig, ax = _new_axes("Prime-orbit experiment gaps", "level", "worst-case gap")
    ok = [r for r in reports if r.error is None]
    levels = [r.level for r in ok]
    for key, label in (
        ("gap_prime_residue", "|prime - residue|"),
        ("gap_prime_target", "|prime - target|"),
        ("gap_residue_target", "|residue - target|"),
        ("discrepancy", "box discrepancy"),
    ):
        ax.semilogy(levels, [r.summary[key] for r in ok], "o-", label=label)
    ax.set_xticks(levels)
    ax.legend()
    return _save(fig, path)


def render_orbit(xs, ss, roof, path: str | Path, *, title: str = "Prime-orbit sample") -> Path:
    """Scatter of sampled flow points under the roof graph."""
    fig, ax = _new_axes(title, "base x", "height s")
    grid = np.linspace(0.0, 1.0, 512)
    ax.plot(grid, roof.value(grid), "k-", lw=1.0, label="roof")
    ax.axhline(roof.min_value(), color="k", lw=0.6, ls=":", label="certified minimum")
    ax.plot(np.asarray(xs) % 1.0, ss, ".", ms=3, alpha=0.7, label="orbit points")
    ax.set_xlim(0, 1)
    ax.set_ylim(0, None)
    ax.legend()
    return _save(fig, path)
