# persistence.py
# Comments in English only
"""Z2 persistent homology of filtered complexes, Betti numbers and persistence diagrams."""

from __future__ import annotations

import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np
import pandas as pd
from numpy.typing import NDArray

from complexes import Cell, FilteredComplex, validate_entrance_field
from config.settings import BRUTE_FORCE_CELL_CAP, HISTOGRAM_BIN_WIDTH
from field_sim import GridField, local_maxima_values, local_minima_values
from validation.errors import TdaInputError, TdaSizeError

logger = logging.getLogger(__name__)

DIAGRAM_COLUMNS: Tuple[str, ...] = ("degree", "birth", "death", "essential")


# ============================================================
# Bars and barcodes
# ============================================================

@dataclass(frozen=True)
class Bar:
    birth: float
    death: float
    degree: int

    def __post_init__(self) -> None:
        if self.degree < 0:
            raise TdaInputError(f"bar degree must be >= 0 (got {self.degree}).")
        if not self.birth <= self.death:
            raise TdaInputError(f"bar birth {self.birth} is after its death {self.death}.")

    @property
    def is_essential(self) -> bool:
        return math.isinf(self.death)

    @property
    def length(self) -> float:
        return self.death - self.birth

    def clipped_length(self, level: float) -> float:
        if self.birth > level:
            return 0.0
        return min(self.death, level) - self.birth


@dataclass(frozen=True)
class Barcode:
    """Multiset of bars in filtration time (negated values for superlevel filtrations)."""

    bars: Tuple[Bar, ...]
    orientation_note: str = "sublevel"
    max_dim: int = 0
    n_cells: int = 0

    def __len__(self) -> int:
        return len(self.bars)

    def by_degree(self, degree: int) -> List[Bar]:
        return [b for b in self.bars if b.degree == degree]

    def essential(self) -> List[Bar]:
        return [b for b in self.bars if b.is_essential]

    def finite(self, include_zero_length: bool = True) -> List[Bar]:
        return [
            b for b in self.bars
            if b.is_essential is False and (include_zero_length or b.death > b.birth)
        ]

    def longest(self, degree: int, count: int = 2, clip: float = math.inf) -> List[float]:
        """Lengths of the ``count`` longest degree-k bars, essential bars cut at ``clip``."""
        lengths = sorted((min(b.death, clip) - b.birth for b in self.by_degree(degree)), reverse=True)
        return lengths[:count]

    def clipped(self, level: float) -> "Barcode":
        """Bars born by ``level`` with deaths cut at ``level``."""
        bars = tuple(Bar(b.birth, min(b.death, level), b.degree) for b in self.bars if b.birth <= level)
        return Barcode(bars, self.orientation_note, self.max_dim, self.n_cells)


@dataclass(frozen=True)
class BettiVector:
    values: Tuple[int, ...]

    def __getitem__(self, k: int) -> int:
        return self.values[k] if 0 <= k < len(self.values) else 0

    def __len__(self) -> int:
        return len(self.values)

    def euler_characteristic(self) -> int:
        return sum(((-1) ** k) * b for k, b in enumerate(self.values))


# ============================================================
# Reduction
# ============================================================

def reduce(fc: FilteredComplex) -> Barcode:
    """Standard column reduction with clearing, highest dimension first."""
    validate_entrance_field(fc)

    order = fc.reduction_order()
    n = len(order)
    position = np.empty(n, dtype=np.int64)
    position[order] = np.arange(n)
    dims = fc.dims[order]
    entrance = fc.entrance[order]
    cells = fc.cells

    pivot_owner: Dict[int, int] = {}
    reduced: Dict[int, Set[int]] = {}
    paired = np.zeros(n, dtype=bool)
    pairs: List[Tuple[int, int]] = []

    max_dim = fc.max_dim
    for degree in range(max_dim, 0, -1):
        for j in np.flatnonzero(dims == degree).tolist():
            if paired[j]:
                # cleared: already a pivot row of a higher-dimensional column
                continue
            column = {int(position[f]) for f in cells[int(order[j])].boundary}
            while column:
                low = max(column)
                owner = pivot_owner.get(low)
                if owner is None:
                    break
                column ^= reduced[owner]
            if column:
                low = max(column)
                pivot_owner[low] = j
                reduced[j] = column
                paired[low] = True
                paired[j] = True
                pairs.append((low, j))

    bars = [Bar(float(entrance[lo]), float(entrance[hi]), int(dims[lo])) for lo, hi in pairs]
    bars += [Bar(float(entrance[i]), math.inf, int(dims[i])) for i in np.flatnonzero(~paired).tolist()]
    bars.sort(key=lambda b: (b.degree, b.birth, b.death))
    logger.debug("reduced %d cells: %d finite pairs, %d essential", n, len(pairs), n - 2 * len(pairs))
    return Barcode(tuple(bars), fc.orientation_note, max_dim, n)


# ============================================================
# Betti numbers
# ============================================================

def _z2_rank(columns: List[int]) -> int:
    # columns as integer bitmasks; elimination keyed by the highest set bit
    basis: Dict[int, int] = {}
    for col in columns:
        while col:
            top = col.bit_length() - 1
            if top not in basis:
                basis[top] = col
                break
            col ^= basis[top]
    return len(basis)


def brute_force_betti(
    cells: Sequence[Cell], max_dim: Optional[int] = None, cap: int = BRUTE_FORCE_CELL_CAP
) -> BettiVector:
    """Betti numbers from boundary-matrix ranks; oracle for small complexes."""
    if len(cells) > cap:
        raise TdaSizeError(f"{len(cells)} cells exceed the brute-force cap of {cap}.")
    top = max((c.dim for c in cells), default=0)
    if max_dim is None:
        max_dim = top

    ids = {c.id for c in cells}
    index_in_dim: Dict[int, int] = {}
    by_dim: Dict[int, List[Cell]] = defaultdict(list)
    for cell in sorted(cells, key=lambda c: (c.dim, c.id)):
        missing = [f for f in cell.boundary if f not in ids]
        if missing:
            raise TdaInputError(f"cell {cell.id} has faces {missing} outside the complex.")
        index_in_dim[cell.id] = len(by_dim[cell.dim])
        by_dim[cell.dim].append(cell)

    ranks = [0] * (top + 2)
    for d in range(1, top + 1):
        columns = []
        for cell in by_dim[d]:
            mask = 0
            for f in cell.boundary:
                mask ^= 1 << index_in_dim[f]
            columns.append(mask)
        ranks[d] = _z2_rank(columns)

    betti = [len(by_dim[k]) - ranks[k] - ranks[k + 1] if k <= top else 0 for k in range(max_dim + 1)]
    return BettiVector(tuple(betti))


def betti_at(bc: Barcode, t: float, max_dim: Optional[int] = None) -> BettiVector:
    """Number of bars alive at filtration time t (birth <= t < death) per degree."""
    if max_dim is None:
        max_dim = bc.max_dim
    counts = [0] * (max_dim + 1)
    for bar in bc.bars:
        if bar.degree <= max_dim and bar.birth <= t < bar.death:
            counts[bar.degree] += 1
    return BettiVector(tuple(counts))


def persistent_betti(bc: Barcode, t: float, p: float, max_dim: Optional[int] = None) -> BettiVector:
    """Classes born by t that are still alive at t + p."""
    if p < 0:
        raise TdaInputError("persistence window p must be >= 0.")
    if max_dim is None:
        max_dim = bc.max_dim
    counts = [0] * (max_dim + 1)
    for bar in bc.bars:
        if bar.degree <= max_dim and bar.birth <= t and bar.death > t + p:
            counts[bar.degree] += 1
    return BettiVector(tuple(counts))


def betti_curve(bc: Barcode, times: Iterable[float]) -> pd.DataFrame:
    rows = []
    for t in times:
        betti = betti_at(bc, float(t))
        rows.append({"t": float(t), **{f"b{k}": betti[k] for k in range(len(betti))}})
    return pd.DataFrame(rows)


def barcode_euler_char(bc: Barcode, level: float) -> float:
    """Sum over bars of (-1)^degree times the bar length cut at ``level``."""
    if not math.isfinite(level):
        raise TdaInputError(f"clip level must be finite (got {level}).")
    if len(bc.bars) == 0:
        return 0.0
    births = np.fromiter((b.birth for b in bc.bars), dtype=float, count=len(bc.bars))
    deaths = np.fromiter((b.death for b in bc.bars), dtype=float, count=len(bc.bars))
    signs = np.fromiter((1.0 if b.degree % 2 == 0 else -1.0 for b in bc.bars), dtype=float, count=len(bc.bars))
    alive = births <= level
    lengths = np.minimum(deaths[alive], level) - births[alive]
    return float(np.sum(signs[alive] * lengths))


# ============================================================
# Diagrams
# ============================================================

@dataclass(frozen=True, eq=False)
class PersistenceDiagram:
    """Points in level units; for superlevel filtrations birth > death."""

    points: pd.DataFrame
    orientation_note: str = "sublevel"

    def __len__(self) -> int:
        return len(self.points)

    def degree(self, k: int) -> pd.DataFrame:
        return self.points[self.points["degree"] == k]

    def finite(self) -> pd.DataFrame:
        return self.points[self.points["essential"] == False]  # noqa: E712


def diagram(bc: Barcode, include_zero_length: bool = False) -> PersistenceDiagram:
    sign = -1.0 if bc.orientation_note == "superlevel-negated" else 1.0
    rows = [
        (b.degree, sign * b.birth, sign * b.death, b.is_essential)
        for b in bc.bars
        if include_zero_length or b.death > b.birth
    ]
    frame = pd.DataFrame(rows, columns=list(DIAGRAM_COLUMNS))
    frame = frame.astype({"degree": "int64", "birth": "float64", "death": "float64", "essential": "bool"})
    return PersistenceDiagram(frame, bc.orientation_note)


@dataclass(frozen=True)
class Histogram:
    edges: NDArray
    counts: NDArray

    @property
    def total(self) -> int:
        return int(np.sum(self.counts))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"left": self.edges[:-1], "right": self.edges[1:], "count": self.counts})


def _histogram(values: NDArray, bin_width: float) -> Histogram:
    if values.size == 0:
        return Histogram(np.empty(0), np.empty(0, dtype=np.int64))
    lo = math.floor(float(values.min()) / bin_width)
    hi = math.floor(float(values.max()) / bin_width) + 1
    edges = bin_width * np.arange(lo, hi + 1)
    counts, _ = np.histogram(values, bins=edges)
    return Histogram(edges, counts)


def birth_death_marginals(
    diagrams: Sequence[PersistenceDiagram],
    degree: int,
    bin_width: float = HISTOGRAM_BIN_WIDTH,
) -> Tuple[Histogram, Histogram]:
    """Histograms of births and deaths of finite degree-k points pooled over diagrams."""
    if bin_width <= 0:
        raise TdaInputError("bin_width must be positive.")
    frames = [d.finite() for d in diagrams]
    frames = [f[f["degree"] == degree] for f in frames if len(f) > 0]
    if len(frames) == 0:
        empty = np.empty(0)
        return _histogram(empty, bin_width), _histogram(empty, bin_width)
    pooled = pd.concat(frames, ignore_index=True)
    return (
        _histogram(pooled["birth"].to_numpy(), bin_width),
        _histogram(pooled["death"].to_numpy(), bin_width),
    )


@dataclass(frozen=True)
class ExtremaCheck:
    births_match: bool
    deaths_match: bool
    n_maxima: int
    n_minima: int

    @property
    def passed(self) -> bool:
        return self.births_match and self.deaths_match


def extrema_correspondence(field_: GridField, bc: Barcode) -> ExtremaCheck:
    """Compare superlevel H0 births with local maxima and top-degree deaths with local minima.

    On a torus the global minimum closes the top class instead of killing a
    (dim-1)-cycle, so essential top-degree births are counted with the deaths.
    """
    if bc.orientation_note != "superlevel-negated":
        raise TdaInputError("extrema correspondence is stated for superlevel barcodes.")
    dim = field_.spec.dim
    dg = diagram(bc).points

    births = np.sort(dg.loc[dg["degree"] == 0, "birth"].to_numpy())
    top = dg[(dg["degree"] == dim - 1) & (dg["essential"] == False)]  # noqa: E712
    deaths = top["death"].to_numpy()
    if field_.spec.is_torus:
        closing = dg[(dg["degree"] == dim) & (dg["essential"] == True)]  # noqa: E712
        deaths = np.concatenate([deaths, closing["birth"].to_numpy()])
    deaths = np.sort(deaths)

    maxima = local_maxima_values(field_)
    minima = local_minima_values(field_)
    return ExtremaCheck(
        births_match=bool(np.array_equal(births, maxima)),
        deaths_match=bool(np.array_equal(deaths, minima)),
        n_maxima=int(maxima.size),
        n_minima=int(minima.size),
    )


def write_diagram_csv(dg: PersistenceDiagram, path: str | Path) -> Path:
    out_path = Path(path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    dg.points.to_csv(out_path, index=False, float_format="%.17g")
    return out_path


def read_diagram_csv(path: str | Path, orientation_note: str = "sublevel") -> PersistenceDiagram:
    frame = pd.read_csv(path)
    missing = [c for c in DIAGRAM_COLUMNS if c not in frame.columns]
    if missing:
        raise TdaInputError(f"diagram file '{path}' lacks columns {missing}.")
    frame["essential"] = frame["essential"].astype(bool)
    return PersistenceDiagram(frame[list(DIAGRAM_COLUMNS)], orientation_note)
