# complexes.py
# Comments in English only
"""Cell complexes with a filtration order: cubical grids, Vietoris-Rips and Cech."""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from pathlib import Path
from typing import Dict, FrozenSet, List, Sequence, Tuple

import numpy as np
import pandas as pd
from numpy.typing import NDArray
from scipy.spatial.distance import cdist, pdist, squareform

from config.settings import POINT_CLOUD_CAP
from field_sim import GridField, GridSpec
from validation.errors import TdaInputError, TdaSizeError
from validation.validators import validate_point_cloud_inputs

logger = logging.getLogger(__name__)

ORIENTATION_NOTES: Tuple[str, ...] = ("sublevel", "superlevel-negated", "scale")


# ============================================================
# Cells and filtrations
# ============================================================

@dataclass(frozen=True)
class Cell:
    id: int
    dim: int
    boundary: Tuple[int, ...]
    vertices: Tuple[int, ...]


@dataclass(frozen=True, eq=False)
class FilteredComplex:
    """Cells with entrance times; cell ids equal their position in ``cells``.

    Superlevel filtrations are stored negated (entrance = -value) with
    orientation_note "superlevel-negated". Rips and Cech filtrations are indexed
    by radius and carry "scale".
    """

    cells: Tuple[Cell, ...]
    entrance: NDArray
    orientation_note: str = "sublevel"

    def __post_init__(self) -> None:
        cells = tuple(self.cells)
        entrance = np.array(self.entrance, dtype=float).reshape(-1)
        if entrance.size != len(cells):
            raise TdaInputError(f"{len(cells)} cells but {entrance.size} entrance values.")
        if np.any(np.isnan(entrance)):
            raise TdaInputError("entrance values must not be NaN.")
        if self.orientation_note not in ORIENTATION_NOTES:
            raise TdaInputError(f"orientation_note must be one of {ORIENTATION_NOTES}.")
        for position, cell in enumerate(cells):
            if cell.id != position:
                raise TdaInputError(f"cell at position {position} has id {cell.id}.")
        entrance.setflags(write=False)
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "entrance", entrance)

    def __len__(self) -> int:
        return len(self.cells)

    @cached_property
    def dims(self) -> NDArray:
        return np.fromiter((c.dim for c in self.cells), dtype=np.int64, count=len(self.cells))

    @property
    def max_dim(self) -> int:
        return int(self.dims.max()) if len(self.cells) > 0 else 0

    def reduction_order(self) -> NDArray:
        """Cell ids sorted by (entrance, dim, id)."""
        ids = np.arange(len(self.cells))
        return np.lexsort((ids, self.dims, self.entrance))

    def monotonicity_violations(self, limit: int | None = None) -> List[Tuple[int, int]]:
        """(face, coface) pairs where the face enters strictly after its coface."""
        found: List[Tuple[int, int]] = []
        for cell in self.cells:
            t = self.entrance[cell.id]
            for face in cell.boundary:
                if face < 0 or face >= len(self.cells):
                    raise TdaInputError(f"cell {cell.id} has unknown face {face}.")
                if self.entrance[face] > t:
                    found.append((face, cell.id))
                    if limit is not None and len(found) >= limit:
                        return found
        return found

    def with_entrance(self, entrance: NDArray, orientation_note: str) -> "FilteredComplex":
        return FilteredComplex(self.cells, entrance, orientation_note)


# ============================================================
# Cubical complexes on grids
# ============================================================

@dataclass(frozen=True, eq=False)
class CubicalComplex:
    spec: GridSpec
    cells: Tuple[Cell, ...]
    dims: NDArray
    # one row per cell, vertex ids padded by repeating the first vertex
    vertex_matrix: NDArray

    def __len__(self) -> int:
        return len(self.cells)

    @property
    def signs(self) -> NDArray:
        return np.where(self.dims % 2 == 0, 1, -1)

    def euler_characteristic(self) -> int:
        return int(self.signs.sum())


def _axis_subsets(dim: int) -> List[Tuple[int, ...]]:
    return [s for k in range(dim + 1) for s in itertools.combinations(range(dim), k)]


@lru_cache(maxsize=8)
def build_cubical_complex(spec: GridSpec) -> CubicalComplex:
    """All cubes of the grid; torus indices wrap, so the complex is a flat torus."""
    dim = spec.dim
    shape = spec.shape
    torus = spec.is_torus
    n_corners = 2**dim

    # a cell is (anchor, axis subset); ids are contiguous per subset, subsets sorted by size
    blocks: Dict[Tuple[int, ...], Tuple[int, Tuple[int, ...]]] = {}
    next_id = 0
    for subset in _axis_subsets(dim):
        anchor_shape = tuple(
            n - 1 if (axis in subset and torus is False) else n for axis, n in enumerate(shape)
        )
        blocks[subset] = (next_id, anchor_shape)
        next_id += int(np.prod(anchor_shape))

    vertex_matrix = np.empty((next_id, n_corners), dtype=np.int64)
    dims = np.empty(next_id, dtype=np.int64)
    cells: List[Cell] = []

    for subset in _axis_subsets(dim):
        start, anchor_shape = blocks[subset]
        anchors = np.indices(anchor_shape).reshape(dim, -1)
        count = anchors.shape[1]

        corners = []
        for mask in range(2 ** len(subset)):
            coords = anchors.copy()
            for bit, axis in enumerate(subset):
                if (mask >> bit) & 1:
                    coords[axis] += 1
            if torus:
                coords %= np.array(shape)[:, None]
            corners.append(np.ravel_multi_index(tuple(coords), shape))
        corner_block = np.stack(corners, axis=1)
        padded = np.repeat(corner_block[:, :1], n_corners, axis=1)
        padded[:, : corner_block.shape[1]] = corner_block
        vertex_matrix[start : start + count] = padded
        dims[start : start + count] = len(subset)

        faces = []
        for axis in subset:
            face_subset = tuple(a for a in subset if a != axis)
            face_start, face_shape = blocks[face_subset]
            upper = anchors.copy()
            upper[axis] += 1
            if torus:
                upper[axis] %= shape[axis]
            faces.append(face_start + np.ravel_multi_index(tuple(anchors), face_shape))
            faces.append(face_start + np.ravel_multi_index(tuple(upper), face_shape))
        face_block = np.stack(faces, axis=1) if faces else np.empty((count, 0), dtype=np.int64)

        face_rows = face_block.tolist()
        corner_rows = corner_block.tolist()
        for offset in range(count):
            cells.append(
                Cell(
                    id=start + offset,
                    dim=len(subset),
                    boundary=tuple(face_rows[offset]),
                    vertices=tuple(sorted(corner_rows[offset])),
                )
            )

    vertex_matrix.setflags(write=False)
    dims.setflags(write=False)
    logger.debug("cubical complex for %s %s: %d cells", spec.topology, spec.sizes, next_id)
    return CubicalComplex(spec=spec, cells=tuple(cells), dims=dims, vertex_matrix=vertex_matrix)


def cell_vertex_extremes(field: GridField) -> Tuple[NDArray, NDArray, NDArray]:
    """(dims, min over vertices, max over vertices) for every cell of the field's grid."""
    cubical = build_cubical_complex(field.spec)
    per_vertex = field.values[cubical.vertex_matrix]
    return cubical.dims, per_vertex.min(axis=1), per_vertex.max(axis=1)


def sublevel_filtration(field: GridField) -> FilteredComplex:
    cubical = build_cubical_complex(field.spec)
    entrance = field.values[cubical.vertex_matrix].max(axis=1)
    return FilteredComplex(cubical.cells, entrance, "sublevel")


def superlevel_filtration(field: GridField) -> FilteredComplex:
    cubical = build_cubical_complex(field.spec)
    entrance = (-field.values)[cubical.vertex_matrix].max(axis=1)
    return FilteredComplex(cubical.cells, entrance, "superlevel-negated")


# ============================================================
# Point clouds
# ============================================================

@dataclass(frozen=True, eq=False)
class PointCloud:
    points: NDArray
    metric: str = "L2"

    def __post_init__(self) -> None:
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2:
            raise TdaInputError("points must be an (n, d) array.")
        check = validate_point_cloud_inputs(
            pts.shape[0], pts.shape[1], self.metric, bool(np.all(np.isfinite(pts)))
        )
        if check.is_valid is False:
            raise TdaInputError(check.message())
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def dim(self) -> int:
        return int(self.points.shape[1])

    @property
    def n_points(self) -> int:
        return int(self.points.shape[0])

    @property
    def scipy_metric(self) -> str:
        return "euclidean" if self.metric == "L2" else "chebyshev"

    def distances(self) -> NDArray:
        if self.n_points == 1:
            return np.zeros((1, 1))
        return squareform(pdist(self.points, self.scipy_metric))

    def subset(self, indices: Sequence[int]) -> "PointCloud":
        return PointCloud(self.points[np.asarray(indices, dtype=np.int64)], self.metric)


def maxmin_subsample(cloud: PointCloud, count: int, start: int = 0) -> Tuple[NDArray, float]:
    """Greedy farthest-point landmarks and the distance from the cloud to them.

    Each new landmark is the point farthest from those already chosen, so the
    landmarks are pairwise at least the returned covering radius apart.
    A ``count`` of 0 or at least the cloud size keeps every point.
    """
    if count < 0:
        raise TdaInputError("landmark count must be >= 0.")
    if not (0 <= start < cloud.n_points):
        raise TdaInputError(f"start index {start} outside the cloud.")
    if count == 0 or count >= cloud.n_points:
        return np.arange(cloud.n_points), 0.0

    chosen = [int(start)]
    nearest = cdist(cloud.points, cloud.points[[start]], cloud.scipy_metric)[:, 0]
    for _ in range(count - 1):
        far = int(np.argmax(nearest))
        chosen.append(far)
        nearest = np.minimum(nearest, cdist(cloud.points, cloud.points[[far]], cloud.scipy_metric)[:, 0])
    return np.asarray(chosen, dtype=np.int64), float(nearest.max())


def _enumerate_cliques(distances: NDArray, maxdim: int, diameter: float) -> List[List[Tuple[int, ...]]]:
    n = distances.shape[0]
    close = distances <= diameter
    upper = [frozenset(int(j) for j in np.flatnonzero(close[i, i + 1 :]) + i + 1) for i in range(n)]

    by_dim: List[List[Tuple[int, ...]]] = [[(i,) for i in range(n)]]
    frontier = [((i,), upper[i]) for i in range(n)]
    for _ in range(maxdim):
        grown = []
        for verts, candidates in frontier:
            for j in sorted(candidates):
                grown.append((verts + (j,), candidates & upper[j]))
        by_dim.append([verts for verts, _ in grown])
        frontier = grown
    return by_dim


def _simplicial_complex(
    simplices_by_dim: Sequence[Sequence[Tuple[int, ...]]],
    entrance_by_dim: Sequence[NDArray],
    orientation_note: str = "scale",
) -> FilteredComplex:
    ids: Dict[Tuple[int, ...], int] = {}
    cells: List[Cell] = []
    for dim, simplices in enumerate(simplices_by_dim):
        for verts in simplices:
            if dim == 0:
                boundary: Tuple[int, ...] = ()
            else:
                boundary = tuple(ids[verts[:k] + verts[k + 1 :]] for k in range(dim + 1))
            ids[verts] = len(cells)
            cells.append(Cell(id=len(cells), dim=dim, boundary=boundary, vertices=verts))
    entrance = np.concatenate([np.asarray(e, dtype=float) for e in entrance_by_dim])
    return FilteredComplex(tuple(cells), entrance, orientation_note)


def _check_cloud_size(cloud: PointCloud, cap: int) -> None:
    if cloud.n_points > cap:
        raise TdaSizeError(f"point cloud has {cloud.n_points} points, above the cap of {cap}.")


def _pairwise_max(distances: NDArray, simplices: Sequence[Tuple[int, ...]]) -> NDArray:
    if len(simplices) == 0:
        return np.empty(0)
    verts = np.asarray(simplices, dtype=np.int64)
    best = np.zeros(len(verts))
    for i, j in itertools.combinations(range(verts.shape[1]), 2):
        best = np.maximum(best, distances[verts[:, i], verts[:, j]])
    return best


def rips_filtration(
    cloud: PointCloud,
    maxdim: int,
    max_radius: float = math.inf,
    cap: int = POINT_CLOUD_CAP,
) -> FilteredComplex:
    """Vietoris-Rips complex up to ``maxdim``; a simplex enters at half its diameter.

    Simplices entering after ``max_radius`` are left out, so bars alive at that
    radius come out essential.
    """
    if maxdim < 0:
        raise TdaInputError("maxdim must be >= 0.")
    _check_cloud_size(cloud, cap)
    distances = cloud.distances()
    simplices = _enumerate_cliques(distances, maxdim, 2.0 * max_radius)
    entrance = [np.zeros(cloud.n_points)] + [
        _pairwise_max(distances, layer) / 2.0 for layer in simplices[1:]
    ]
    logger.debug("rips complex: %s simplices per dimension", [len(s) for s in simplices])
    return _simplicial_complex(simplices, entrance)


# ---------------- Minimum enclosing balls ----------------

def _ball_through(boundary_points: List[NDArray], ambient_dim: int) -> Tuple[NDArray, float]:
    if len(boundary_points) == 0:
        return np.zeros(ambient_dim), -1.0
    base = boundary_points[0]
    if len(boundary_points) == 1:
        return base.copy(), 0.0
    directions = np.array([p - base for p in boundary_points[1:]])
    gram = directions @ directions.T
    rhs = 0.5 * np.sum(directions * directions, axis=1)
    try:
        weights = np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError:
        weights = np.linalg.lstsq(gram, rhs, rcond=None)[0]
    center = base + weights @ directions
    radius = max(float(np.linalg.norm(p - center)) for p in boundary_points)
    return center, radius


def _welzl(points: NDArray, count: int, boundary_points: List[NDArray]) -> Tuple[NDArray, float]:
    if count == 0 or len(boundary_points) == points.shape[1] + 1:
        return _ball_through(boundary_points, points.shape[1])
    candidate = points[count - 1]
    center, radius = _welzl(points, count - 1, boundary_points)
    if radius >= 0 and float(np.linalg.norm(candidate - center)) <= radius * (1 + 1e-12) + 1e-15:
        return center, radius
    return _welzl(points, count - 1, boundary_points + [candidate])


def minimum_enclosing_ball(points: NDArray) -> Tuple[NDArray, float]:
    """Smallest Euclidean ball containing every row of ``points``: (center, radius)."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise TdaInputError("minimum_enclosing_ball needs a non-empty (k, d) array.")
    return _welzl(pts, pts.shape[0], [])


def _cech_radii(cloud: PointCloud, simplices: Sequence[Tuple[int, ...]], distances: NDArray) -> NDArray:
    if len(simplices) == 0:
        return np.empty(0)
    half_diameter = _pairwise_max(distances, simplices) / 2.0
    # L-infinity balls are boxes: they meet iff every coordinate spread is at most 2r
    if cloud.metric == "Linf" or len(simplices[0]) == 2:
        return half_diameter
    radii = np.array([minimum_enclosing_ball(cloud.points[list(s)])[1] for s in simplices])
    # rounding in the ball solve must not put a simplex before its edges
    return np.maximum(radii, half_diameter)


def cech_filtration(
    cloud: PointCloud,
    maxdim: int,
    max_radius: float = math.inf,
    cap: int = POINT_CLOUD_CAP,
) -> FilteredComplex:
    """Cech complex: a simplex enters at the radius of the smallest ball enclosing it."""
    if maxdim < 0:
        raise TdaInputError("maxdim must be >= 0.")
    _check_cloud_size(cloud, cap)
    distances = cloud.distances()
    candidates = _enumerate_cliques(distances, maxdim, 2.0 * max_radius)

    kept: List[List[Tuple[int, ...]]] = [candidates[0]]
    entrance: List[NDArray] = [np.zeros(cloud.n_points)]
    for layer in candidates[1:]:
        radii = _cech_radii(cloud, layer, distances)
        keep = radii <= max_radius
        # dropping a simplex also drops its cofaces since their radii are no smaller
        alive = set(kept[-1])
        chosen = [s for s, ok in zip(layer, keep) if ok and all(s[:k] + s[k + 1 :] in alive for k in range(len(s)))]
        chosen_set = set(chosen)
        kept.append(chosen)
        entrance.append(np.array([r for s, r in zip(layer, radii) if s in chosen_set]))
    return _simplicial_complex(kept, entrance)


def interleaving_violations(
    cloud: PointCloud, maxdim: int, max_radius: float = math.inf, tolerance: float = 1e-12
) -> List[Tuple[Tuple[int, ...], float, float]]:
    """Simplices breaking rips <= cech <= sqrt(2d/(d+1)) * rips (L2) or rips == cech (Linf)."""
    rips = rips_filtration(cloud, maxdim, max_radius)
    cech = cech_filtration(cloud, maxdim, max_radius)
    cech_time = {cell.vertices: cech.entrance[cell.id] for cell in cech.cells}
    factor = math.sqrt(2.0 * cloud.dim / (cloud.dim + 1.0))

    violations = []
    for cell in rips.cells:
        r = float(rips.entrance[cell.id])
        c = cech_time.get(cell.vertices)
        if c is None:
            continue
        c = float(c)
        if cloud.metric == "Linf":
            bad = c != r
        else:
            slack = tolerance * max(1.0, r)
            bad = c < r - slack or c > factor * r + slack
        if bad:
            violations.append((cell.vertices, r, c))
    return violations


# ============================================================
# Generic helpers
# ============================================================

def monotone_completion(
    raw: NDArray, cells: Sequence[Cell], orientation_note: str = "sublevel"
) -> FilteredComplex:
    """Lift every entrance time to the max over its faces so faces never enter late."""
    raw_arr = np.array(raw, dtype=float).reshape(-1)
    if raw_arr.size != len(cells):
        raise TdaInputError(f"{len(cells)} cells but {raw_arr.size} raw values.")
    completed = raw_arr.copy()
    for cell in sorted(cells, key=lambda c: c.dim):
        if cell.boundary:
            completed[cell.id] = max(completed[cell.id], max(completed[f] for f in cell.boundary))
    return FilteredComplex(tuple(cells), completed, orientation_note)


def complex_at(fc: FilteredComplex, t: float) -> FrozenSet[int]:
    return frozenset(np.flatnonzero(fc.entrance <= t).tolist())


def validate_entrance_field(fc: FilteredComplex) -> None:
    """Raise TdaInputError naming the first face that enters after one of its cofaces."""
    violations = fc.monotonicity_violations(limit=1)
    if violations:
        face, coface = violations[0]
        raise TdaInputError(
            f"entrance of face {face} ({fc.entrance[face]:.6g}) is later than "
            f"coface {coface} ({fc.entrance[coface]:.6g})."
        )


# ============================================================
# Files
# ============================================================

def write_filtration(fc: FilteredComplex, path: str | Path) -> Path:
    """One line per cell in reduction order: id,dim,entrance,face ids."""
    lines = [f"# orientation={fc.orientation_note}"]
    for cid in fc.reduction_order():
        cell = fc.cells[int(cid)]
        fields = [str(cell.id), str(cell.dim), format(float(fc.entrance[cell.id]), ".17g")]
        fields += [str(f) for f in cell.boundary]
        lines.append(",".join(fields))
    out_path = Path(path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return out_path


def read_filtration(path: str | Path) -> FilteredComplex:
    orientation = "sublevel"
    rows: Dict[int, Tuple[int, float, Tuple[int, ...]]] = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line == "":
            continue
        if line.startswith("#"):
            if "orientation=" in line:
                orientation = line.split("orientation=", 1)[1].strip()
            continue
        parts = line.split(",")
        try:
            cid, dim, value = int(parts[0]), int(parts[1]), float(parts[2])
            faces = tuple(int(p) for p in parts[3:])
        except (IndexError, ValueError) as exc:
            raise TdaInputError(f"malformed filtration line '{line}'.") from exc
        rows[cid] = (dim, value, faces)

    if sorted(rows) != list(range(len(rows))):
        raise TdaInputError("filtration cell ids must be 0..n-1.")

    vertices: Dict[int, Tuple[int, ...]] = {}
    for cid in sorted(rows, key=lambda c: rows[c][0]):
        dim, _, faces = rows[cid]
        if dim == 0:
            vertices[cid] = (cid,)
        else:
            vertices[cid] = tuple(sorted(set(itertools.chain.from_iterable(vertices[f] for f in faces))))
    cells = tuple(Cell(id=c, dim=rows[c][0], boundary=rows[c][2], vertices=vertices[c]) for c in range(len(rows)))
    entrance = np.array([rows[c][1] for c in range(len(rows))])
    return FilteredComplex(cells, entrance, orientation)


def read_point_cloud_csv(path: str | Path, metric: str = "L2") -> PointCloud:
    frame = pd.read_csv(path, header=None, comment="#")
    numeric = frame.apply(pd.to_numeric, errors="coerce")
    if numeric.isna().any().any():
        raise TdaInputError(f"point cloud file '{path}' has non-numeric entries.")
    return PointCloud(numeric.to_numpy(dtype=float), metric)


def write_point_cloud_csv(cloud: PointCloud, path: str | Path) -> Path:
    out_path = Path(path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(cloud.points).to_csv(out_path, header=False, index=False, float_format="%.17g")
    return out_path
