# diagrams/persistence_plots.py
# Comments in English only

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")
# stable element ids in the SVG output
matplotlib.rcParams["svg.hashsalt"] = "tdalab"

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402
from matplotlib.axes import Axes  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402
from matplotlib.patches import Rectangle  # noqa: E402

from persistence import Barcode, Histogram, PersistenceDiagram  # noqa: E402


@dataclass
class MPLStyle:
    default_linewidth: float = 1.5
    font_size: int = 10
    degree_colors: Dict[int, str] = field(
        default_factory=lambda: {0: "tab:blue", 1: "tab:red", 2: "tab:green", 3: "tab:purple"}
    )

    def color(self, degree: int) -> str:
        return self.degree_colors.get(degree, "black")


def save_figure(fig: Figure, path: str | Path) -> Path:
    out_path = Path(path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    # fixed metadata keeps the SVG byte-stable across reruns
    fig.savefig(out_path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return out_path


def barcode_figure(
    bc: Barcode,
    clip: Optional[float] = None,
    max_bars_per_degree: int = 60,
    style: Optional[MPLStyle] = None,
) -> Tuple[Figure, Axes]:
    """Horizontal bars grouped by degree; the longest bars of each degree are drawn."""
    if style is None:
        style = MPLStyle()
    sign = -1.0 if bc.orientation_note == "superlevel-negated" else 1.0

    finite = [b for b in bc.bars if b.is_essential is False and b.death > b.birth]
    ends = [b.death for b in finite] + [b.birth for b in bc.bars]
    right = clip if clip is not None else (max(ends) if ends else 1.0)

    fig = plt.figure(figsize=(8.0, 6.0))
    ax = fig.add_subplot(111)

    row = 0
    for degree in range(bc.max_dim + 1):
        bars = [b for b in bc.by_degree(degree) if b.death > b.birth]
        bars.sort(key=lambda b: min(b.death, right) - b.birth, reverse=True)
        for bar in bars[:max_bars_per_degree]:
            end = min(bar.death, right)
            x0, x1 = sign * bar.birth, sign * end
            ax.plot([x0, x1], [row, row], linewidth=style.default_linewidth, color=style.color(degree))
            if bar.is_essential:
                ax.plot([x1], [row], marker=">" if sign > 0 else "<", color=style.color(degree))
            row += 1
        if bars:
            ax.axhline(row - 0.5, color="0.8", linewidth=0.5)

    ax.set_yticks([])
    ax.set_xlabel("level" if sign < 0 else "filtration value", fontsize=style.font_size)
    ax.set_title("barcode", fontsize=style.font_size)
    if sign < 0:
        ax.invert_xaxis()
    fig.tight_layout()
    return fig, ax


def diagram_figure(
    diagrams: Sequence[PersistenceDiagram],
    degrees: Sequence[int] = (0, 1),
    style: Optional[MPLStyle] = None,
) -> Tuple[Figure, Axes]:
    """Pooled finite points of several diagrams, one color per degree, with the diagonal."""
    if style is None:
        style = MPLStyle()
    frames = [d.finite() for d in diagrams if len(d) > 0]
    pooled = pd.concat(frames, ignore_index=True) if frames else pd.DataFrame(columns=["degree", "birth", "death"])

    fig = plt.figure(figsize=(6.0, 6.0))
    ax = fig.add_subplot(111)
    for degree in degrees:
        pts = pooled[pooled["degree"] == degree]
        if len(pts) == 0:
            continue
        ax.scatter(pts["birth"], pts["death"], s=2, alpha=0.3, color=style.color(degree), label=f"H{degree}")

    if len(pooled) > 0:
        lo = float(min(pooled["birth"].min(), pooled["death"].min()))
        hi = float(max(pooled["birth"].max(), pooled["death"].max()))
    else:
        lo, hi = 0.0, 1.0
    ax.plot([lo, hi], [lo, hi], color="black", linewidth=0.8)
    ax.set_xlabel("birth level", fontsize=style.font_size)
    ax.set_ylabel("death level", fontsize=style.font_size)
    ax.set_aspect("equal")
    if len(pooled) > 0:
        ax.legend(loc="lower right", fontsize=style.font_size)
    fig.tight_layout()
    return fig, ax


def curve_figure(
    frame: pd.DataFrame,
    x: str,
    y: str,
    expected: Optional[str] = None,
    se: Optional[str] = None,
    title: str = "",
    style: Optional[MPLStyle] = None,
) -> Tuple[Figure, Axes]:
    """Monte Carlo mean with +/- 2 SE band against the closed form."""
    if style is None:
        style = MPLStyle()
    shown = frame[np.isfinite(frame[x].to_numpy(dtype=float))]

    fig = plt.figure(figsize=(7.0, 4.5))
    ax = fig.add_subplot(111)
    ax.plot(shown[x], shown[y], marker="o", markersize=3, color="tab:blue", label="Monte Carlo")
    if se is not None:
        band = 2.0 * shown[se].to_numpy(dtype=float)
        ax.fill_between(shown[x], shown[y] - band, shown[y] + band, color="tab:blue", alpha=0.2)
    if expected is not None:
        ax.plot(shown[x], shown[expected], color="black", linewidth=style.default_linewidth, label="closed form")
    ax.set_xlabel(x, fontsize=style.font_size)
    ax.set_ylabel(y, fontsize=style.font_size)
    if title:
        ax.set_title(title, fontsize=style.font_size)
    ax.legend(fontsize=style.font_size)
    fig.tight_layout()
    return fig, ax


def histogram_figure(
    births: Histogram,
    deaths: Histogram,
    degree: int,
    style: Optional[MPLStyle] = None,
) -> Tuple[Figure, Axes]:
    if style is None:
        style = MPLStyle()
    fig = plt.figure(figsize=(7.0, 4.5))
    ax = fig.add_subplot(111)
    for hist, color, label in ((births, "tab:blue", "birth"), (deaths, "tab:red", "death")):
        if hist.counts.size == 0:
            continue
        widths = np.diff(hist.edges)
        for left, width, count in zip(hist.edges[:-1], widths, hist.counts):
            ax.add_patch(Rectangle((left, 0.0), width, count, facecolor=color, alpha=0.35, edgecolor="none"))
        ax.plot([], [], color=color, linewidth=6, alpha=0.35, label=label)
    ax.autoscale_view()
    ax.set_xlabel("level", fontsize=style.font_size)
    ax.set_ylabel("count", fontsize=style.font_size)
    ax.set_title(f"H{degree} birth and death marginals", fontsize=style.font_size)
    ax.legend(fontsize=style.font_size)
    fig.tight_layout()
    return fig, ax
