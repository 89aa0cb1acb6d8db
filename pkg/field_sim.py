# field_sim.py
# Comments in English only
"""Stationary unit-variance Gaussian fields on regular grids over boxes and flat tori."""

from __future__ import annotations

import itertools
import logging
import warnings
from dataclasses import dataclass
from functools import lru_cache, reduce
from pathlib import Path
from typing import Callable, List, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray
from scipy import linalg

from config.settings import CHOLESKY_CAP, CIRCULANT_NEGATIVE_TOLERANCE, JITTER_SCHEDULE
from validation.errors import TdaInputError, TdaNumericError, TdaSizeError
from validation.validators import validate_covariance_inputs, validate_grid_inputs

logger = logging.getLogger(__name__)

_MASK64 = (1 << 64) - 1
SAMPLING_METHODS: Tuple[str, ...] = ("auto", "separable", "dense", "circulant")


class CirculantFallbackWarning(UserWarning):
    """Emitted when the torus embedding is not nonnegative definite and Cholesky is used instead."""


# ============================================================
# Domain types
# ============================================================

@dataclass(frozen=True)
class CovarianceModel:
    alpha: float
    kind: str = "squared-exponential"

    def __post_init__(self) -> None:
        check = validate_covariance_inputs(self.kind, self.alpha)
        if check.is_valid is False:
            raise TdaInputError(check.message())
        object.__setattr__(self, "alpha", float(self.alpha))

    def from_sq_distance(self, sq_distance: NDArray | float) -> NDArray:
        """R evaluated at lags given by their squared Euclidean length."""
        return np.exp(-self.alpha * np.asarray(sq_distance, dtype=float))

    def __call__(self, lag: NDArray | float) -> NDArray:
        lag_arr = np.asarray(lag, dtype=float)
        if lag_arr.ndim == 0:
            return self.from_sq_distance(lag_arr * lag_arr)
        return self.from_sq_distance(np.sum(lag_arr * lag_arr, axis=-1))


@dataclass(frozen=True)
class GridSpec:
    dim: int
    sizes: Tuple[int, ...]
    side: float = 1.0
    topology: str = "box"

    def __post_init__(self) -> None:
        sizes = tuple(self.sizes)
        check = validate_grid_inputs(int(self.dim), sizes, self.side, self.topology)
        if check.is_valid is False:
            raise TdaInputError(check.message())
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "sizes", tuple(int(n) for n in sizes))
        object.__setattr__(self, "side", float(self.side))

    @classmethod
    def cube(cls, size: int, dim: int = 2, side: float = 1.0, topology: str = "box") -> "GridSpec":
        return cls(dim=dim, sizes=(size,) * dim, side=side, topology=topology)

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.sizes

    @property
    def n_points(self) -> int:
        return int(np.prod(self.sizes))

    @property
    def is_torus(self) -> bool:
        return self.topology == "torus"

    @property
    def spacings(self) -> Tuple[float, ...]:
        if self.is_torus:
            return tuple(self.side / n for n in self.sizes)
        return tuple(self.side / (n - 1) for n in self.sizes)

    def coordinates(self, axis: int) -> NDArray:
        n = self.sizes[axis]
        if self.is_torus:
            return np.arange(n, dtype=float) * (self.side / n)
        return np.linspace(0.0, self.side, n)

    def axis_lags(self, axis: int) -> NDArray:
        """Matrix of absolute per-axis lags; minimal wrap distance on a torus."""
        coords = self.coordinates(axis)
        lags = np.abs(np.subtract.outer(coords, coords))
        if self.is_torus:
            lags = np.minimum(lags, self.side - lags)
        return lags

    def lags_from_origin(self, axis: int) -> NDArray:
        coords = self.coordinates(axis)
        if self.is_torus:
            return np.minimum(coords, self.side - coords)
        return coords


@dataclass(frozen=True, eq=False)
class GridField:
    spec: GridSpec
    values: NDArray

    def __post_init__(self) -> None:
        arr = np.array(self.values, dtype=float).reshape(-1)
        if arr.size != self.spec.n_points:
            raise TdaInputError(
                f"field has {arr.size} values but the grid has {self.spec.n_points} points."
            )
        if not np.all(np.isfinite(arr)):
            raise TdaInputError("field values must be finite.")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @classmethod
    def constant(cls, spec: GridSpec, value: float) -> "GridField":
        return cls(spec, np.full(spec.n_points, float(value)))

    @property
    def grid(self) -> NDArray:
        return self.values.reshape(self.spec.shape)

    def negated(self) -> "GridField":
        return GridField(self.spec, -self.values)

    def apply(self, fn: Callable[[NDArray], NDArray]) -> "GridField":
        return GridField(self.spec, fn(self.values))


# ============================================================
# Seeds
# ============================================================

def splitmix64(x: int) -> int:
    z = (int(x) + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def realization_seed(base_seed: int, index: int) -> int:
    return (int(base_seed) ^ splitmix64(index)) & _MASK64


def make_rng(seed: int) -> np.random.Generator:
    seed = int(seed)
    if not (0 <= seed <= _MASK64):
        raise TdaInputError(f"seed must be a 64-bit unsigned integer (got {seed}).")
    return np.random.default_rng(seed)


# ============================================================
# Covariance geometry
# ============================================================

def second_spectral_moment(model: CovarianceModel) -> float:
    # -d^2/dx^2 exp(-alpha x^2) at 0
    return 2.0 * model.alpha


def _axis_covariances(spec: GridSpec, model: CovarianceModel) -> List[NDArray]:
    return [model.from_sq_distance(spec.axis_lags(a) ** 2) for a in range(spec.dim)]


def covariance_matrix(spec: GridSpec, model: CovarianceModel, cap: int = CHOLESKY_CAP) -> NDArray:
    """Dense Gram matrix R(p - q) over all grid points in row-major order."""
    if spec.n_points > cap:
        raise TdaSizeError(
            f"grid has {spec.n_points} points, above the dense covariance cap of {cap}."
        )
    # squared-exponential is a product over axes, so the Gram matrix is a Kronecker product
    return reduce(np.kron, _axis_covariances(spec, model))


def _cholesky_with_jitter(matrix: NDArray, label: str) -> NDArray:
    eye = np.eye(matrix.shape[0])
    for jitter in JITTER_SCHEDULE:
        try:
            factor = linalg.cholesky(matrix + jitter * eye, lower=True, check_finite=False)
        except linalg.LinAlgError:
            logger.debug("Cholesky of %s failed with jitter %.0e", label, jitter)
            continue
        if jitter > JITTER_SCHEDULE[0]:
            logger.info("Cholesky of %s needed jitter %.0e", label, jitter)
        return factor
    raise TdaNumericError(
        f"covariance of {label} is not positive definite after jitter {JITTER_SCHEDULE[-1]:.0e}."
    )


@lru_cache(maxsize=32)
def _axis_cholesky(size: int, side: float, topology: str, model: CovarianceModel) -> NDArray:
    axis_spec = GridSpec(dim=1, sizes=(size,), side=side, topology=topology)
    factor = _cholesky_with_jitter(_axis_covariances(axis_spec, model)[0], f"axis of {size} points")
    factor.setflags(write=False)
    return factor


@lru_cache(maxsize=4)
def _dense_cholesky(spec: GridSpec, model: CovarianceModel, cap: int) -> NDArray:
    factor = _cholesky_with_jitter(covariance_matrix(spec, model, cap), f"{spec.sizes} grid")
    factor.setflags(write=False)
    return factor


@lru_cache(maxsize=8)
def _circulant_eigenvalues(spec: GridSpec, model: CovarianceModel) -> NDArray:
    first_row = reduce(
        np.multiply.outer,
        [model.from_sq_distance(spec.lags_from_origin(a) ** 2) for a in range(spec.dim)],
    )
    eigenvalues = np.fft.fftn(np.asarray(first_row).reshape(spec.shape)).real
    eigenvalues.setflags(write=False)
    return eigenvalues


# ============================================================
# Sampling
# ============================================================

def _sample_separable(spec: GridSpec, model: CovarianceModel, rng: np.random.Generator) -> NDArray:
    out = rng.standard_normal(spec.shape)
    for axis, size in enumerate(spec.sizes):
        factor = _axis_cholesky(size, spec.side, spec.topology, model)
        out = np.moveaxis(np.tensordot(factor, out, axes=([1], [axis])), 0, axis)
    return out.reshape(-1)


def _sample_dense(spec: GridSpec, model: CovarianceModel, rng: np.random.Generator, cap: int) -> NDArray:
    if spec.n_points > cap:
        raise TdaSizeError(
            f"grid has {spec.n_points} points, above the dense Cholesky cap of {cap}."
        )
    return _dense_cholesky(spec, model, cap) @ rng.standard_normal(spec.n_points)


def _sample_circulant(spec: GridSpec, model: CovarianceModel, rng: np.random.Generator, cap: int) -> NDArray:
    if spec.is_torus is False:
        raise TdaInputError("circulant embedding applies to torus grids only.")

    eigenvalues = _circulant_eigenvalues(spec, model)
    scale = float(np.max(eigenvalues))
    most_negative = float(np.min(eigenvalues))
    if most_negative < -CIRCULANT_NEGATIVE_TOLERANCE * scale:
        message = (
            f"circulant embedding of {spec.sizes} torus has eigenvalue {most_negative:.3e}; "
            "falling back to Cholesky."
        )
        logger.warning(message)
        warnings.warn(message, CirculantFallbackWarning, stacklevel=3)
        if spec.n_points > cap:
            raise TdaNumericError(message + f" Grid exceeds the Cholesky cap of {cap}.")
        return _sample_dense(spec, model, rng, cap)

    root = np.sqrt(np.clip(eigenvalues, 0.0, None))
    noise = rng.standard_normal(spec.shape) + 1j * rng.standard_normal(spec.shape)
    # real part of U sqrt(Lambda) (xi1 + i xi2) has covariance exactly C
    sample = np.fft.fftn(root * noise) / np.sqrt(spec.n_points)
    return sample.real.reshape(-1)


def sample_field(
    spec: GridSpec,
    model: CovarianceModel,
    seed: int,
    method: str = "auto",
    cap: int = CHOLESKY_CAP,
) -> GridField:
    """Draw one exact sample of the field.

    ``auto`` picks the circulant embedding on tori and the separable Cholesky on boxes.
    The separable path is the Cholesky factor of covariance_matrix written as a Kronecker
    product of per-axis factors, so it has no point cap.
    """
    if method not in SAMPLING_METHODS:
        raise TdaInputError(f"unknown sampling method '{method}'.")
    rng = make_rng(seed)
    if method == "auto":
        method = "circulant" if spec.is_torus else "separable"

    if method == "separable":
        values = _sample_separable(spec, model, rng)
    elif method == "dense":
        values = _sample_dense(spec, model, rng, cap)
    else:
        values = _sample_circulant(spec, model, rng, cap)
    return GridField(spec, values)


# ============================================================
# QA
# ============================================================

def _lag_products(stack: NDArray, axis: int, step: int, torus: bool) -> NDArray:
    # stack has the realization index on axis 0
    if torus:
        return stack * np.roll(stack, -step, axis=axis + 1)
    n = stack.shape[axis + 1]
    head = np.take(stack, np.arange(0, n - step), axis=axis + 1)
    tail = np.take(stack, np.arange(step, n), axis=axis + 1)
    return head * tail


def empirical_cov_check(fields: Sequence[GridField], model: CovarianceModel) -> float:
    """Max |empirical - model| covariance over lags {0, h, 2h} along every axis."""
    if len(fields) < 100:
        raise TdaInputError(f"empirical_cov_check needs at least 100 fields (got {len(fields)}).")
    spec = fields[0].spec
    if any(f.spec != spec for f in fields):
        raise TdaInputError("all fields must share one grid spec.")

    stack = np.stack([f.grid for f in fields])
    deviations = [abs(float(np.mean(stack * stack)) - 1.0)]
    for axis in range(spec.dim):
        h = spec.spacings[axis]
        for step in (1, 2):
            if spec.is_torus is False and spec.sizes[axis] <= step:
                continue
            empirical = float(np.mean(_lag_products(stack, axis, step, spec.is_torus)))
            deviations.append(abs(empirical - float(model(step * h))))
    return max(deviations)


# ============================================================
# Grid-local extrema
# ============================================================

def _neighbor_offsets(dim: int, diagonal: bool) -> List[Tuple[int, ...]]:
    if diagonal:
        return [o for o in itertools.product((-1, 0, 1), repeat=dim) if any(o)]
    offsets = []
    for axis in range(dim):
        for sign in (-1, 1):
            offset = [0] * dim
            offset[axis] = sign
            offsets.append(tuple(offset))
    return offsets


def _neighbor_values(grid: NDArray, offset: Tuple[int, ...], torus: bool, fill: float) -> NDArray:
    if torus:
        return np.roll(grid, shift=tuple(-o for o in offset), axis=tuple(range(grid.ndim)))
    padded = np.pad(grid, 1, mode="constant", constant_values=fill)
    window = tuple(slice(1 + o, 1 + o + n) for o, n in zip(offset, grid.shape))
    return padded[window]


def local_maxima_values(field: GridField) -> NDArray:
    """Sorted values at vertices strictly above all 2N edge-neighbors."""
    grid = field.grid
    is_max = np.ones(grid.shape, dtype=bool)
    for offset in _neighbor_offsets(field.spec.dim, diagonal=False):
        is_max &= grid > _neighbor_values(grid, offset, field.spec.is_torus, -np.inf)
    return np.sort(grid[is_max])


def local_minima_values(field: GridField) -> NDArray:
    """Sorted values at vertices strictly below all 3^N - 1 neighbors (interior only on boxes)."""
    grid = field.grid
    is_min = np.ones(grid.shape, dtype=bool)
    for offset in _neighbor_offsets(field.spec.dim, diagonal=True):
        is_min &= grid < _neighbor_values(grid, offset, field.spec.is_torus, -np.inf)
    # boundary vertices compare against -inf padding and drop out
    return np.sort(grid[is_min])


# ============================================================
# Snapshot file
# ============================================================

def write_field_snapshot(field: GridField, path: str | Path) -> Path:
    spec = field.spec
    header = ",".join(
        [str(spec.dim)] + [str(n) for n in spec.sizes] + [format(spec.side, ".17g"), spec.topology]
    )
    lines = [header] + [format(float(v), ".17g") for v in field.values]
    out_path = Path(path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return out_path


def read_field_snapshot(path: str | Path) -> GridField:
    lines = Path(path).read_text(encoding="utf-8").split()
    if len(lines) == 0:
        raise TdaInputError(f"snapshot file '{path}' is empty.")
    header = lines[0].split(",")
    try:
        dim = int(header[0])
        sizes = tuple(int(n) for n in header[1 : 1 + dim])
        side = float(header[1 + dim])
        topology = header[2 + dim]
        values = np.array([float(v) for v in lines[1:]])
    except (IndexError, ValueError) as exc:
        raise TdaInputError(f"malformed snapshot file '{path}': {exc}") from exc
    return GridField(GridSpec(dim=dim, sizes=sizes, side=side, topology=topology), values)
