# config/experiment_config.py
# Comments in English only

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Dict, Mapping, Optional, Tuple

from config.paths import RESULTS_DIR
from config.settings import (
    DEFAULT_ALPHA,
    DEFAULT_BARCODE_LEVELS,
    DEFAULT_GRID_SIZE,
    DEFAULT_LEVELS,
    DEFAULT_RUNS,
    DEFAULT_SIDE,
    HISTOGRAM_BIN_WIDTH,
    MIN_RUNS_FOR_Z_CHECKS,
    SMOKE_COVERAGE_SIZE,
    SMOKE_RUNS,
    SMOKE_SCENES,
    SMOKE_TRIALS,
    Z_THRESHOLD,
)
from field_sim import CovarianceModel, GridSpec
from validation.errors import ConfigError, TdaInputError
from validation.validators import validate_experiment_inputs

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    grid: GridSpec
    model: CovarianceModel
    runs: int = DEFAULT_RUNS
    base_seed: int = 0
    levels: Tuple[float, ...] = DEFAULT_LEVELS
    output_dir: Path = RESULTS_DIR
    n_jobs: int = 1
    smoke: bool = False
    # euler-integral
    transform: str = "identity"
    # torus-coverage
    n_balls: int = 5
    tau: float = 0.3
    coverage_dim: int = 2
    coverage_size: int = 512
    # annulus
    n_points: int = 500
    inner_radius: float = 0.5
    outer_radius: float = 1.0
    max_radius: float = 0.5
    landmarks: int = 100
    metric: str = "L2"
    trials: int = 100
    # targets
    n_scenes: int = 100
    max_targets: int = 10
    noisy_targets: int = 3
    # artifacts
    write_xlsx: bool = False
    write_report: bool = False
    bin_width: float = HISTOGRAM_BIN_WIDTH
    z_threshold: float = Z_THRESHOLD
    extra: Dict[str, Any] = field(default_factory=dict, compare=False)

    @property
    def enforce_z(self) -> bool:
        """z-score checks fail a run only at full scale or under the smoke profile."""
        return self.smoke or self.runs >= MIN_RUNS_FOR_Z_CHECKS

    def with_smoke(self) -> "ExperimentConfig":
        return replace(
            self,
            smoke=True,
            runs=min(self.runs, SMOKE_RUNS),
            trials=min(self.trials, SMOKE_TRIALS),
            coverage_size=min(self.coverage_size, SMOKE_COVERAGE_SIZE),
            n_scenes=min(self.n_scenes, SMOKE_SCENES),
        )


# ---------------- key = value parsing ----------------

def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"'{text}' is not a boolean")


def _parse_float(text: str) -> float:
    return float(text.strip())


def parse_levels(text: str) -> Tuple[float, ...]:
    """Comma list ("-1, 0, 1") or inclusive range ("-3:3:0.5")."""
    text = text.strip()
    if ":" in text:
        start, stop, step = (float(p) for p in text.split(":"))
        if step <= 0:
            raise ValueError("level step must be positive")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(round(start + k * step, 12) for k in range(count))
    return tuple(float(p) for p in text.split(",") if p.strip() != "")


def _parse_sizes(text: str) -> Tuple[int, ...]:
    return tuple(int(p) for p in text.split(",") if p.strip() != "")


_PARSERS: Dict[str, Callable[[str], Any]] = {
    "experiment": str.strip,
    "dim": int,
    "size": _parse_sizes,
    "side": _parse_float,
    "topology": str.strip,
    "alpha": _parse_float,
    "runs": int,
    "seed": int,
    "levels": parse_levels,
    "output_dir": lambda t: Path(t.strip()),
    "n_jobs": int,
    "smoke": _parse_bool,
    "transform": str.strip,
    "n_balls": int,
    "tau": _parse_float,
    "coverage_dim": int,
    "coverage_size": int,
    "n_points": int,
    "inner_radius": _parse_float,
    "outer_radius": _parse_float,
    "max_radius": _parse_float,
    "landmarks": int,
    "metric": str.strip,
    "trials": int,
    "n_scenes": int,
    "max_targets": int,
    "noisy_targets": int,
    "write_xlsx": _parse_bool,
    "write_report": _parse_bool,
    "bin_width": _parse_float,
}

CONFIG_KEYS: Tuple[str, ...] = tuple(_PARSERS)


def parse_config_text(text: str, source: str = "<config>") -> Dict[str, Any]:
    values: Dict[str, Any] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line == "":
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{number}: expected 'key = value', got '{raw.strip()}'.")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _PARSERS:
            raise ConfigError(f"{source}:{number}: unknown key '{key}'.")
        try:
            values[key] = _PARSERS[key](value)
        except ValueError as exc:
            raise ConfigError(f"{source}:{number}: bad value for '{key}': {exc}") from exc
    return values


def _coerce_override(key: str, value: Any) -> Any:
    if key not in _PARSERS:
        raise ConfigError(f"unknown override '{key}'.")
    if isinstance(value, str):
        try:
            return _PARSERS[key](value)
        except ValueError as exc:
            raise ConfigError(f"bad override for '{key}': {exc}") from exc
    return value


def build_experiment_config(values: Mapping[str, Any]) -> ExperimentConfig:
    """Turn parsed key/value pairs into a validated ExperimentConfig."""
    data = dict(values)
    experiment = data.get("experiment")
    dim = int(data.get("dim", 2))
    sizes = data.get("size", (DEFAULT_GRID_SIZE.get(dim, 32),))
    if isinstance(sizes, int):
        sizes = (sizes,)
    if len(sizes) == 1:
        sizes = tuple(sizes) * dim

    default_levels = DEFAULT_BARCODE_LEVELS if experiment == "barcode-ec" else DEFAULT_LEVELS
    data.setdefault("levels", default_levels)
    data.setdefault("output_dir", RESULTS_DIR / str(experiment))

    check = validate_experiment_inputs(data)
    if check.is_valid is False:
        raise ConfigError(check.message())
    for warning in check.warnings:
        logger.warning("config: %s", warning)

    try:
        grid = GridSpec(
            dim=dim,
            sizes=tuple(sizes),
            side=float(data.get("side", DEFAULT_SIDE)),
            topology=str(data.get("topology", "box")),
        )
        model = CovarianceModel(alpha=float(data.get("alpha", DEFAULT_ALPHA)))
    except TdaInputError as exc:
        raise ConfigError(str(exc)) from exc

    passthrough = {
        k: v
        for k, v in data.items()
        if k not in ("experiment", "dim", "size", "side", "topology", "alpha", "seed", "levels")
    }
    cfg = ExperimentConfig(
        experiment=str(experiment),
        grid=grid,
        model=model,
        base_seed=int(data.get("seed", 0)),
        levels=tuple(float(u) for u in data["levels"]),
        **passthrough,
    )
    if cfg.smoke:
        cfg = cfg.with_smoke()
    return cfg


def load_experiment_config(
    path: Optional[str | Path],
    overrides: Optional[Mapping[str, Any]] = None,
) -> ExperimentConfig:
    """Read a key = value config file (optional) and apply CLI overrides on top."""
    values: Dict[str, Any] = {}
    if path is not None:
        config_path = Path(path)
        if config_path.exists() is False:
            raise ConfigError(f"config file '{config_path}' does not exist.")
        values = parse_config_text(config_path.read_text(encoding="utf-8"), str(config_path))

    for key, value in (overrides or {}).items():
        if value is None:
            continue
        values[key] = _coerce_override(key, value)

    cfg = build_experiment_config(values)
    logger.info(
        "experiment = %s, grid = %s %s, runs = %s, seed = %s",
        cfg.experiment, cfg.grid.topology, cfg.grid.sizes, cfg.runs, cfg.base_seed,
    )
    return cfg
