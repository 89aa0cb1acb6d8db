# Comments in English only
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, Tuple

from config.experiment_config import ExperimentConfig
from experiments import (
    ExperimentReport,
    run_annulus_experiment,
    run_barcode_ec_experiment,
    run_diagram_experiment,
    run_ec_curve_experiment,
    run_euler_integral_experiment,
    run_target_experiment,
    run_torus_coverage_experiment,
)


@dataclass(frozen=True)
class ExperimentEntry:
    key: str
    label: str
    run_fn: Callable[[ExperimentConfig], ExperimentReport]
    artifacts: Tuple[str, ...]

    def run(self, cfg: ExperimentConfig) -> ExperimentReport:
        """Run the experiment after checking the config names it."""
        if cfg.experiment != self.key:
            raise KeyError(f"Config is for '{cfg.experiment}', not '{self.key}'.")
        return self.run_fn(cfg)


def get_experiment_entries() -> Dict[str, ExperimentEntry]:
    return {
        "ec-curve": ExperimentEntry(
            key="ec-curve",
            label="Mean Euler characteristic of excursion sets",
            run_fn=run_ec_curve_experiment,
            artifacts=("summary.csv", "curve.csv", "curve.svg"),
        ),
        "euler-integral": ExperimentEntry(
            key="euler-integral",
            label="Mean Euler integral of a transformed field",
            run_fn=run_euler_integral_experiment,
            artifacts=("summary.csv",),
        ),
        "barcode-ec": ExperimentEntry(
            key="barcode-ec",
            label="Mean Euler characteristic of clipped sublevel barcodes",
            run_fn=run_barcode_ec_experiment,
            artifacts=("summary.csv",),
        ),
        "diagrams": ExperimentEntry(
            key="diagrams",
            label="Superlevel persistence diagrams and extrema",
            run_fn=run_diagram_experiment,
            artifacts=("summary.csv", "diagram_H0.csv", "marginals_H0.csv", "diagram.svg", "barcode.svg"),
        ),
        "torus-coverage": ExperimentEntry(
            key="torus-coverage",
            label="Euler characteristic of random cube unions on the torus",
            run_fn=run_torus_coverage_experiment,
            artifacts=("summary.csv",),
        ),
        "annulus": ExperimentEntry(
            key="annulus",
            label="Annulus recovery from a Rips barcode",
            run_fn=run_annulus_experiment,
            artifacts=("summary.csv", "trials.csv", "barcode.svg"),
        ),
        "targets": ExperimentEntry(
            key="targets",
            label="Target counting by Euler integration",
            run_fn=run_target_experiment,
            artifacts=("summary.csv", "scene_000.json", "noisy_scene.json"),
        ),
    }


def get_experiment_entry(key: str) -> ExperimentEntry:
    entries = get_experiment_entries()
    if key not in entries:
        raise KeyError(f"Experiment '{key}' is not supported.")
    return entries[key]
