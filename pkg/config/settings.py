# config/settings.py
# Comments in English only

from __future__ import annotations

from typing import Tuple

# ============================================================
# Field simulation
# ============================================================
SUPPORTED_TOPOLOGIES: Tuple[str, ...] = ("box", "torus")
SUPPORTED_COVARIANCE_KINDS: Tuple[str, ...] = ("squared-exponential",)

CHOLESKY_CAP: int = 4096
JITTER_SCHEDULE: Tuple[float, ...] = (1e-12, 1e-11, 1e-10)
CIRCULANT_NEGATIVE_TOLERANCE: float = 1e-10

DEFAULT_ALPHA: float = 100.0
DEFAULT_SIDE: float = 1.0
DEFAULT_GRID_SIZE = {1: 256, 2: 64, 3: 32}

# ============================================================
# Complexes and persistence
# ============================================================
SUPPORTED_METRICS: Tuple[str, ...] = ("L2", "Linf")
POINT_CLOUD_CAP: int = 512
BRUTE_FORCE_CELL_CAP: int = 5000

# ============================================================
# Closed forms
# ============================================================
QUADRATURE_HALF_WIDTH: float = 12.0
QUADRATURE_TOLERANCE: float = 1e-9
GAUSS_HERMITE_NODES: int = 64

# ============================================================
# Harness
# ============================================================
EXPERIMENT_KEYS: Tuple[str, ...] = (
    "ec-curve",
    "euler-integral",
    "barcode-ec",
    "diagrams",
    "torus-coverage",
    "annulus",
    "targets",
)

DEFAULT_RUNS: int = 2000
MIN_RUNS_FOR_Z_CHECKS: int = 2000
SMOKE_RUNS: int = 100
SMOKE_TRIALS: int = 10
SMOKE_COVERAGE_SIZE: int = 128
SMOKE_SCENES: int = 20
Z_THRESHOLD: float = 3.0
HISTOGRAM_BIN_WIDTH: float = 0.1
IDENTITY_RELATIVE_TOLERANCE: float = 1e-9
ANNULUS_SUCCESS_RATE: float = 0.95
DOMINANCE_RATIO: float = 3.0

DEFAULT_LEVELS: Tuple[float, ...] = tuple(-3.0 + 0.5 * k for k in range(13))
DEFAULT_BARCODE_LEVELS: Tuple[float, ...] = (-4.0, -1.0, 0.0, 1.0, 2.0)
