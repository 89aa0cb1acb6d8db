# validation/validators.py
# Comments in English only

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

from config.settings import (
    EXPERIMENT_KEYS,
    SUPPORTED_COVARIANCE_KINDS,
    SUPPORTED_METRICS,
    SUPPORTED_TOPOLOGIES,
)


@dataclass
class ValidationResult:
    is_valid: bool
    errors: List[str] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)

    def message(self) -> str:
        return "; ".join(self.errors)


def _finalize(errors: List[str], warnings: List[str]) -> ValidationResult:
    return ValidationResult(is_valid=(len(errors) == 0), errors=errors, warnings=warnings)


# ---------------- Field geometry ----------------

def validate_grid_inputs(dim: int, sizes: Sequence[int], side: float, topology: str) -> ValidationResult:
    """Check a grid description without constructing it.

    Returns ValidationResult instead of raising, so callers decide how to report.
    """
    errors: List[str] = []
    warnings: List[str] = []

    if dim not in (1, 2, 3):
        errors.append(f"dim must be 1, 2 or 3 (got {dim}).")
    if len(sizes) != dim:
        errors.append(f"sizes must have one entry per axis (dim={dim}, got {len(sizes)}).")
    for n in sizes:
        if int(n) != n or n < 2:
            errors.append(f"every axis needs at least 2 points (got {n}).")
            break
    if not (isinstance(side, (int, float)) and math.isfinite(side) and side > 0):
        errors.append(f"side must be a finite positive length (got {side}).")
    if topology not in SUPPORTED_TOPOLOGIES:
        errors.append(f"topology must be one of {SUPPORTED_TOPOLOGIES} (got '{topology}').")

    if topology == "torus" and any(int(n) < 3 for n in sizes if int(n) == n):
        warnings.append("torus axes with 2 points give doubled edges between the same vertices.")

    return _finalize(errors, warnings)


def validate_covariance_inputs(kind: str, alpha: float) -> ValidationResult:
    errors: List[str] = []
    if kind not in SUPPORTED_COVARIANCE_KINDS:
        errors.append(f"covariance kind '{kind}' is not supported.")
    if not (isinstance(alpha, (int, float)) and math.isfinite(alpha) and alpha > 0):
        errors.append(f"alpha must be a finite positive real (got {alpha}).")
    return _finalize(errors, [])


def validate_point_cloud_inputs(n_points: int, dim: int, metric: str, all_finite: bool) -> ValidationResult:
    errors: List[str] = []
    if n_points < 1:
        errors.append("a point cloud needs at least one point.")
    if dim < 1:
        errors.append("ambient dimension must be >= 1.")
    if metric not in SUPPORTED_METRICS:
        errors.append(f"metric must be one of {SUPPORTED_METRICS} (got '{metric}').")
    if all_finite is False:
        errors.append("point coordinates must be finite.")
    return _finalize(errors, [])


# ---------------- Experiment configuration ----------------

def _as_int(data: Dict[str, Any], key: str, errors: List[str]) -> Optional[int]:
    if key not in data:
        return None
    try:
        return int(data[key])
    except (TypeError, ValueError):
        errors.append(f"{key} must be an integer.")
        return None


def _as_float(data: Dict[str, Any], key: str, errors: List[str]) -> Optional[float]:
    if key not in data:
        return None
    try:
        return float(data[key])
    except (TypeError, ValueError):
        errors.append(f"{key} must be a real number.")
        return None


def validate_experiment_inputs(data: Dict[str, Any]) -> ValidationResult:
    """Validate the already-typed experiment dictionary assembled by the config loader."""
    errors: List[str] = []
    warnings: List[str] = []

    experiment = data.get("experiment")
    if experiment not in EXPERIMENT_KEYS:
        errors.append(f"Unsupported experiment '{experiment}'.")

    runs = _as_int(data, "runs", errors)
    if runs is not None and runs < 1:
        errors.append("runs must be >= 1.")

    seed = _as_int(data, "seed", errors)
    if seed is not None and not (0 <= seed < 2**64):
        errors.append("seed must be a 64-bit unsigned integer.")

    n_jobs = _as_int(data, "n_jobs", errors)
    if n_jobs is not None and n_jobs == 0:
        errors.append("n_jobs must be nonzero (use -1 for all cores).")

    levels = data.get("levels")
    if levels is not None:
        values = list(levels)
        if any(math.isnan(v) for v in values):
            errors.append("levels must not contain NaN.")
        elif values != sorted(values):
            errors.append("levels must be sorted ascending.")
        if experiment == "barcode-ec" and any(v == math.inf for v in values):
            errors.append("barcode-ec clip levels must be finite or -inf.")

    tau = _as_float(data, "tau", errors)
    if tau is not None and not (0.0 < tau < 1.0):
        errors.append("tau must lie in (0, 1).")

    n_balls = _as_int(data, "n_balls", errors)
    if n_balls is not None and n_balls < 1:
        errors.append("n_balls must be >= 1.")

    inner = _as_float(data, "inner_radius", errors)
    outer = _as_float(data, "outer_radius", errors)
    if inner is not None and outer is not None and not (0.0 <= inner < outer):
        errors.append("annulus radii must satisfy 0 <= inner_radius < outer_radius.")

    landmarks = _as_int(data, "landmarks", errors)
    if landmarks is not None and landmarks < 0:
        errors.append("landmarks must be >= 0 (0 keeps every point).")

    metric = data.get("metric")
    if metric is not None and metric not in SUPPORTED_METRICS:
        errors.append(f"metric must be one of {SUPPORTED_METRICS}.")

    if experiment == "torus-coverage" and data.get("topology", "torus") != "torus":
        warnings.append("torus-coverage always runs on a flat torus; grid topology is ignored.")

    if runs is not None and runs < 2000 and data.get("smoke") is not True:
        warnings.append("runs < 2000: z-score checks are reported but not enforced.")

    return _finalize(errors, warnings)
