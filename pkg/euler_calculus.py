# euler_calculus.py
# Comments in English only
"""Euler characteristics, EC curves and Euler integrals over cubical grids.

Two conventions for integrating a real-valued field are provided:

* ``closed``: lower integral over superlevel sets of f and sublevel sets of -f, built
  from closed excursion sets. Cell c contributes (-1)^dim [max(e_c, 0) - max(-E_c, 0)]
  where e_c, E_c are the min and max of f over the cell's vertices. Gives
  integral(x) = integral(1 - x) = 1 on [0, 1].
* ``open``: integral_0^inf [chi(M) - chi(f <= u)] du - integral_0^inf chi(f <= -u) du,
  i.e. the complements of closed sublevel sets. Cell c contributes (-1)^dim E_c.
  This is the convention in which the clipped-barcode identity and the Gaussian
  expectation formulas hold exactly; integral(x) = 0 on [0, 1].
"""

from __future__ import annotations

import functools
import itertools
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from numpy.typing import NDArray

from complexes import Cell, build_cubical_complex, cell_vertex_extremes, sublevel_filtration
from config.settings import IDENTITY_RELATIVE_TOLERANCE
from field_sim import GridField, GridSpec
from persistence import Barcode, barcode_euler_char, reduce
from validation.errors import TdaConsistencyError, TdaInputError, TdaSizeError

logger = logging.getLogger(__name__)

CONVENTIONS: Tuple[str, ...] = ("closed", "open")
CUBE_UNION_CELL_CAP: int = 2**24


# ============================================================
# Euler characteristics
# ============================================================

@dataclass(frozen=True)
class OpenCellComplex:
    """Counts of open cells per dimension (cells need not be face-closed)."""

    counts: Mapping[int, int]

    def __post_init__(self) -> None:
        if any(int(k) < 0 or int(v) < 0 for k, v in self.counts.items()):
            raise TdaInputError("open cell counts need nonnegative dimensions and counts.")


def euler_char_lf(oc: OpenCellComplex) -> int:
    return sum(((-1) ** int(k)) * int(v) for k, v in oc.counts.items())


def euler_char_closed(cells: Iterable[Cell], check_closed: bool = False) -> int:
    cell_list = list(cells)
    if check_closed:
        ids = {c.id for c in cell_list}
        for cell in cell_list:
            if any(f not in ids for f in cell.boundary):
                raise TdaInputError(f"cell {cell.id} has a face outside the complex.")
    return sum(1 if c.dim % 2 == 0 else -1 for c in cell_list)


# ============================================================
# EC curves
# ============================================================

@dataclass(frozen=True, eq=False)
class ECCurve:
    """Piecewise-constant integer curve.

    ``superlevel``: values[i] holds on (b[i-1], b[i]], values[0] on (-inf, b[0]] and
    values[m] on (b[m-1], inf).  ``sublevel``: values[i] holds on [b[i-1], b[i]).
    """

    breakpoints: NDArray
    values: NDArray
    kind: str = "superlevel"

    def __post_init__(self) -> None:
        b = np.asarray(self.breakpoints, dtype=float)
        v = np.asarray(self.values, dtype=np.int64)
        if v.size != b.size + 1:
            raise TdaInputError("an EC curve needs one more value than breakpoints.")
        if b.size > 1 and np.any(np.diff(b) <= 0):
            raise TdaInputError("EC curve breakpoints must be strictly increasing.")
        if self.kind not in ("superlevel", "sublevel"):
            raise TdaInputError(f"unknown EC curve kind '{self.kind}'.")
        object.__setattr__(self, "breakpoints", b)
        object.__setattr__(self, "values", v)

    def __call__(self, u: float | NDArray) -> NDArray:
        side = "left" if self.kind == "superlevel" else "right"
        idx = np.searchsorted(self.breakpoints, np.asarray(u, dtype=float), side=side)
        return self.values[idx]

    def integrate(self, lo: float, hi: float) -> float:
        """Exact integral over [lo, hi]; pieces where the curve is 0 contribute nothing."""
        if hi < lo:
            return -self.integrate(hi, lo)
        edges = np.concatenate([[-np.inf], self.breakpoints, [np.inf]])
        left = np.maximum(edges[:-1], lo)
        right = np.minimum(edges[1:], hi)
        active = (self.values != 0) & (right > left)
        widths = right[active] - left[active]
        if np.any(np.isinf(widths)):
            raise TdaInputError(f"EC curve is nonzero on an unbounded part of [{lo}, {hi}].")
        return float(np.sum(self.values[active] * widths))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"u": self.breakpoints, "chi": self(self.breakpoints)})


def _signed_weights(levels: NDArray, signs: NDArray) -> Tuple[NDArray, NDArray]:
    breakpoints, inverse = np.unique(levels, return_inverse=True)
    weights = np.bincount(inverse.reshape(-1), weights=signs, minlength=breakpoints.size)
    return breakpoints, np.rint(weights).astype(np.int64)


def _superlevel_curve(levels: NDArray, signs: NDArray) -> ECCurve:
    breakpoints, weights = _signed_weights(levels, signs)
    suffix = np.cumsum(weights[::-1])[::-1]
    return ECCurve(breakpoints, np.concatenate([suffix, [0]]), "superlevel")


def _sublevel_curve(levels: NDArray, signs: NDArray) -> ECCurve:
    breakpoints, weights = _signed_weights(levels, signs)
    return ECCurve(breakpoints, np.concatenate([[0], np.cumsum(weights)]), "sublevel")


def _cell_signs(dims: NDArray) -> NDArray:
    return np.where(dims % 2 == 0, 1.0, -1.0)


def ec_curve_superlevel(field_: GridField) -> ECCurve:
    """u -> chi(f >= u), a cell belonging when its min vertex value is >= u."""
    dims, mins, _ = cell_vertex_extremes(field_)
    return _superlevel_curve(mins, _cell_signs(dims))


def ec_curve_sublevel(field_: GridField) -> ECCurve:
    """u -> chi(f <= u), a cell belonging when its max vertex value is <= u."""
    dims, _, maxs = cell_vertex_extremes(field_)
    return _sublevel_curve(maxs, _cell_signs(dims))


# ============================================================
# Euler integrals
# ============================================================

def _agree(stepwise: float, per_cell: float, scale: float, what: str) -> None:
    if abs(stepwise - per_cell) > IDENTITY_RELATIVE_TOLERANCE * max(1.0, scale):
        raise TdaConsistencyError(
            f"{what}: level-set sweep gives {stepwise!r}, cell sum gives {per_cell!r}."
        )


def _open_integral(levels: NDArray, signs: NDArray) -> float:
    """Open-convention integral of a cell function given its values and cell signs."""
    per_cell = float(np.sum(signs * levels))
    curve = _sublevel_curve(levels, signs)
    total = int(np.rint(np.sum(signs)))
    complement = ECCurve(curve.breakpoints, total - curve.values, "sublevel")
    stepwise = complement.integrate(0.0, math.inf) - curve.integrate(-math.inf, 0.0)
    _agree(stepwise, per_cell, float(np.sum(np.abs(levels))), "open Euler integral")
    return per_cell


def euler_integral_real(field_: GridField, convention: str = "closed") -> float:
    if convention not in CONVENTIONS:
        raise TdaInputError(f"convention must be one of {CONVENTIONS}.")
    dims, mins, maxs = cell_vertex_extremes(field_)
    signs = _cell_signs(dims)

    if convention == "open":
        return _open_integral(maxs, signs)

    per_cell = float(np.sum(signs * (np.maximum(mins, 0.0) - np.maximum(-maxs, 0.0))))
    upper = _superlevel_curve(mins, signs)
    lower = _sublevel_curve(maxs, signs)
    stepwise = upper.integrate(0.0, math.inf) - lower.integrate(-math.inf, 0.0)
    _agree(stepwise, per_cell, float(np.sum(np.abs(mins)) + np.sum(np.abs(maxs))), "closed Euler integral")
    return per_cell


# ---------------- Constructible functions ----------------

@dataclass(frozen=True, eq=False)
class ConstructibleField:
    """Integer function on the cells of a cubical grid."""

    spec: GridSpec
    values: NDArray

    def __post_init__(self) -> None:
        arr = np.asarray(self.values)
        n_cells = len(build_cubical_complex(self.spec))
        if arr.shape != (n_cells,):
            raise TdaInputError(f"constructible field needs one value per cell ({n_cells}).")
        if np.issubdtype(arr.dtype, np.integer) is False:
            if np.any(arr != np.rint(arr)):
                raise TdaInputError("constructible field values must be integers.")
        arr = arr.astype(np.int64)
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @classmethod
    def zero(cls, spec: GridSpec) -> "ConstructibleField":
        return cls(spec, np.zeros(len(build_cubical_complex(spec)), dtype=np.int64))

    @classmethod
    def from_supports(
        cls, spec: GridSpec, supports: Sequence[FrozenSet[int]], weights: Optional[Sequence[int]] = None
    ) -> "ConstructibleField":
        values = np.zeros(len(build_cubical_complex(spec)), dtype=np.int64)
        weights = [1] * len(supports) if weights is None else list(weights)
        for support, weight in zip(supports, weights):
            values[np.fromiter(support, dtype=np.int64, count=len(support))] += int(weight)
        return cls(spec, values)

    @classmethod
    def from_vertex_values(cls, spec: GridSpec, vertex_values: NDArray) -> "ConstructibleField":
        """Cell value chosen so {h >= s} and {h <= -s} are the closed vertex level sets."""
        v = np.asarray(vertex_values, dtype=np.int64).reshape(-1)
        if v.size != spec.n_points:
            raise TdaInputError("vertex values must have one entry per grid point.")
        per_vertex = v[build_cubical_complex(spec).vertex_matrix]
        low, high = per_vertex.min(axis=1), per_vertex.max(axis=1)
        values = np.where(low >= 1, low, np.where(high <= -1, high, 0))
        return cls(spec, values)


def euler_integral_constructible(h: ConstructibleField) -> int:
    """Sum over levels s >= 1 of chi(h >= s) - chi(h <= -s)."""
    signs = build_cubical_complex(h.spec).signs
    total = 0
    for s in range(1, int(max(h.values.max(initial=0), 0)) + 1):
        total += int(signs[h.values >= s].sum())
    for s in range(1, int(max(-h.values.min(initial=0), 0)) + 1):
        total -= int(signs[h.values <= -s].sum())
    return total


def euler_integral_signal_plus_noise(h: ConstructibleField, noise: GridField) -> float:
    """Open-convention integral of h + f; additive in its two parts."""
    if h.spec != noise.spec:
        raise TdaInputError("signal and noise must live on the same grid.")
    dims, _, maxs = cell_vertex_extremes(noise)
    signs = _cell_signs(dims)
    combined = _open_integral(h.values + maxs, signs)
    parts = euler_integral_constructible(h) + _open_integral(maxs, signs)
    _agree(combined, parts, float(np.sum(np.abs(maxs)) + np.sum(np.abs(h.values))), "signal-plus-noise integral")
    return combined


# ---------------- Targets ----------------

def support_from_vertices(spec: GridSpec, vertex_mask: NDArray) -> FrozenSet[int]:
    """Full subcomplex on the marked vertices: every cell whose vertices are all marked."""
    mask = np.asarray(vertex_mask, dtype=bool).reshape(-1)
    if mask.size != spec.n_points:
        raise TdaInputError("vertex mask must have one entry per grid point.")
    inside = mask[build_cubical_complex(spec).vertex_matrix].all(axis=1)
    return frozenset(np.flatnonzero(inside).tolist())


def rectangle_support(spec: GridSpec, lo: Sequence[int], hi: Sequence[int]) -> FrozenSet[int]:
    """Closed index box lo <= index <= hi (inclusive, no wrap)."""
    if len(lo) != spec.dim or len(hi) != spec.dim:
        raise TdaInputError("rectangle corners need one index per axis.")
    for a, (l, h) in enumerate(zip(lo, hi)):
        if not (0 <= l <= h < spec.sizes[a]):
            raise TdaInputError(f"rectangle bounds {l}..{h} outside axis {a}.")
    grid_index = np.indices(spec.shape)
    mask = np.ones(spec.shape, dtype=bool)
    for a in range(spec.dim):
        mask &= (grid_index[a] >= lo[a]) & (grid_index[a] <= hi[a])
    return support_from_vertices(spec, mask)


def disc_support(spec: GridSpec, center: Sequence[float], radius: float) -> FrozenSet[int]:
    """Grid points within Euclidean ``radius`` of ``center`` (physical coordinates)."""
    if len(center) != spec.dim or radius < 0:
        raise TdaInputError("disc needs one center coordinate per axis and radius >= 0.")
    sq = np.zeros(spec.shape)
    for a in range(spec.dim):
        delta = np.abs(spec.coordinates(a) - float(center[a]))
        if spec.is_torus:
            delta = np.minimum(delta, spec.side - delta)
        shape = [1] * spec.dim
        shape[a] = spec.sizes[a]
        sq = sq + (delta**2).reshape(shape)
    return support_from_vertices(spec, sq <= radius * radius)


def _support_euler_char(spec: GridSpec, support: FrozenSet[int]) -> int:
    cubical = build_cubical_complex(spec)
    cells = [cubical.cells[i] for i in support]
    return euler_char_closed(cells, check_closed=True)


@dataclass(frozen=True)
class TargetScene:
    domain: GridSpec
    supports: Tuple[FrozenSet[int], ...]
    gamma: int = 1
    descriptions: Tuple[Dict[str, Any], ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        if int(self.gamma) == 0:
            raise TdaInputError("gamma must be nonzero.")
        object.__setattr__(self, "supports", tuple(frozenset(s) for s in self.supports))
        for k, support in enumerate(self.supports):
            if len(support) == 0:
                raise TdaInputError(f"target {k} has an empty support.")
            chi = _support_euler_char(self.domain, support)
            if chi != self.gamma:
                raise TdaInputError(f"target {k} has Euler characteristic {chi}, expected {self.gamma}.")

    def signal(self) -> ConstructibleField:
        return ConstructibleField.from_supports(self.domain, self.supports)


def count_targets(scene: TargetScene) -> int:
    total = euler_integral_constructible(scene.signal())
    count, remainder = divmod(total, scene.gamma)
    if remainder != 0:
        raise TdaConsistencyError(f"Euler integral {total} is not a multiple of gamma={scene.gamma}.")
    return int(count)


def _support_from_description(spec: GridSpec, target: Mapping[str, Any]) -> FrozenSet[int]:
    shape = target.get("shape")
    if shape == "rectangle":
        return rectangle_support(spec, target["lo"], target["hi"])
    if shape == "disc":
        return disc_support(spec, target["center"], float(target["radius"]))
    raise TdaInputError(f"unknown target shape '{shape}'.")


def scene_from_description(description: Mapping[str, Any]) -> TargetScene:
    try:
        grid = description["grid"]
        spec = GridSpec(
            dim=int(grid["dim"]),
            sizes=tuple(grid["sizes"]),
            side=float(grid.get("side", 1.0)),
            topology=grid.get("topology", "box"),
        )
        targets = list(description.get("targets", []))
        supports = tuple(_support_from_description(spec, t) for t in targets)
    except (KeyError, TypeError) as exc:
        raise TdaInputError(f"malformed target scene: {exc}") from exc
    return TargetScene(spec, supports, int(description.get("gamma", 1)), tuple(dict(t) for t in targets))


def load_target_scene(path: str | Path) -> TargetScene:
    try:
        description = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise TdaInputError(f"target scene '{path}' is not valid JSON: {exc}") from exc
    return scene_from_description(description)


def _grid_description(spec: GridSpec) -> Dict[str, Any]:
    return {"dim": spec.dim, "sizes": list(spec.sizes), "side": spec.side, "topology": spec.topology}


def write_target_scene(scene: TargetScene, path: str | Path) -> Path:
    description = {
        "grid": _grid_description(scene.domain),
        "gamma": scene.gamma,
        "targets": list(scene.descriptions),
    }
    out_path = Path(path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text(json.dumps(description, indent=2), encoding="utf-8")
    return out_path


# ============================================================
# Barcode identity
# ============================================================

def barcode_identity_check(field_: GridField, barcode: Optional[Barcode] = None) -> Tuple[float, float]:
    """(chi of the barcode clipped at max f, max f * chi(M) - open integral of f).

    ``barcode`` may be passed when the sublevel barcode of ``field_`` is already known.
    """
    if barcode is None:
        barcode = reduce(sublevel_filtration(field_))
    elif barcode.orientation_note != "sublevel":
        raise TdaInputError("the barcode identity is stated for sublevel barcodes.")
    f_max = float(field_.values.max())
    lhs = barcode_euler_char(barcode, f_max)
    chi_m = build_cubical_complex(field_.spec).euler_characteristic()
    rhs = f_max * chi_m - euler_integral_real(field_, "open")
    return lhs, rhs


# ============================================================
# Unions of cubes on the flat torus
# ============================================================

def torus_cube_union_euler_char(centers: NDArray, half_width: float, size: int) -> int:
    """chi of the union of L-infinity balls on the unit d-torus, rasterized on a size^d grid.

    Each ball is the full subcomplex on the grid points within ``half_width`` of its
    center, a product of arcs, so every cell-type mask is an outer product of
    per-axis vertex and edge masks.
    """
    pts = np.atleast_2d(np.asarray(centers, dtype=float))
    n, dim = pts.shape
    if size < 3 or half_width <= 0:
        raise TdaInputError("torus rasterization needs size >= 3 and a positive half-width.")
    if size**dim > CUBE_UNION_CELL_CAP:
        raise TdaSizeError(f"a {size}^{dim} torus grid exceeds {CUBE_UNION_CELL_CAP} points.")

    coords = np.arange(size) / size
    vertex_masks: List[List[NDArray]] = []
    edge_masks: List[List[NDArray]] = []
    for center in pts:
        v_axes, e_axes = [], []
        for axis in range(dim):
            delta = np.abs(coords - center[axis] % 1.0)
            delta = np.minimum(delta, 1.0 - delta)
            inside = delta <= half_width
            v_axes.append(inside)
            e_axes.append(inside & np.roll(inside, -1))
        vertex_masks.append(v_axes)
        edge_masks.append(e_axes)

    total = 0
    for k in range(dim + 1):
        for subset in itertools.combinations(range(dim), k):
            union = np.zeros((size,) * dim, dtype=bool)
            for b in range(n):
                factors = [edge_masks[b][a] if a in subset else vertex_masks[b][a] for a in range(dim)]
                union |= functools.reduce(np.multiply.outer, factors).astype(bool)
            total += (-1) ** k * int(np.count_nonzero(union))
    return total


def random_rectangle_scene(spec: GridSpec, rng: np.random.Generator, count: int) -> TargetScene:
    """``count`` axis-aligned index boxes (possibly overlapping), extents up to a quarter axis."""
    targets = []
    for _ in range(count):
        lo, hi = [], []
        for n in spec.sizes:
            extent = int(rng.integers(0, max(1, n // 4)))
            start = int(rng.integers(0, n - extent))
            lo.append(start)
            hi.append(start + extent)
        targets.append({"shape": "rectangle", "lo": lo, "hi": hi})
    return scene_from_description({"grid": _grid_description(spec), "gamma": 1, "targets": targets})


def write_ec_curve_csv(frame: pd.DataFrame, path: str | Path) -> Path:
    out_path = Path(path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(out_path, index=False, float_format="%.10g")
    return out_path
