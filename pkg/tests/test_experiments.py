# tests/test_experiments.py
# Comments in English only
from __future__ import annotations

import json
import math

import numpy as np
import pandas as pd
import pytest

from config.experiment_config import build_experiment_config
from config.settings import ANNULUS_SUCCESS_RATE, EXPERIMENT_KEYS
from experiment_registry import get_experiment_entries, get_experiment_entry
from experiments import (
    ANNULUS_TRIAL_COLUMNS,
    SUMMARY_COLUMNS,
    CheckResult,
    ExperimentReport,
    MonteCarloSummary,
    dominates,
    run_annulus_experiment,
    run_barcode_ec_experiment,
    run_diagram_experiment,
    run_ec_curve_experiment,
    run_euler_integral_experiment,
    run_target_experiment,
    run_torus_coverage_experiment,
    sample_annulus,
    summary_statistics,
    z_score,
)
from validation.errors import ConfigError


def _config(experiment, out_dir, **values):
    base = {
        "experiment": experiment,
        "dim": 2,
        "size": (8,),
        "alpha": 10.0,
        "runs": 6,
        "seed": 42,
        "output_dir": out_dir,
    }
    base.update(values)
    return build_experiment_config(base)


# ---------------- Summary helpers ----------------

def test_summary_statistics():
    mean, se, n = summary_statistics([1.0, 2.0, 3.0, 4.0])
    assert mean == pytest.approx(2.5)
    assert se == pytest.approx(np.std([1, 2, 3, 4], ddof=1) / 2.0)
    assert n == 4
    assert summary_statistics([7.0]) == (7.0, 0.0, 1)
    assert summary_statistics([])[2] == 0


def test_z_score_cases():
    assert z_score(1.0, 0.5, 0.0) == pytest.approx(2.0)
    assert z_score(1.0, 0.0, 1.0 + 1e-14) == 0.0
    assert z_score(2.0, 0.0, 1.0) == math.inf
    assert z_score(0.0, 0.0, 1.0) == -math.inf
    assert math.isnan(z_score(1.0, 0.1, None))


def test_monte_carlo_summary():
    summary = MonteCarloSummary()
    summary.add("ec", "u=0", [1.0, 1.0, 1.0], 1.0)
    summary.add("volume", "u=0", [0.2, 0.4])
    frame = summary.to_frame()
    assert tuple(frame.columns) == SUMMARY_COLUMNS
    assert frame["runs"].tolist() == [3, 2]

    checks = summary.z_checks(3.0, enforced=False)
    assert len(checks) == 1
    assert checks[0].passed and checks[0].enforced is False


def test_report_passes_on_enforced_checks_only():
    report = ExperimentReport(
        "ec-curve",
        pd.DataFrame(),
        [CheckResult("a", True), CheckResult("b", False, enforced=False)],
        [],
    )
    assert report.passed
    report.checks.append(CheckResult("c", False))
    assert report.passed is False
    assert [c.name for c in report.failed_checks()] == ["c"]


def test_dominates():
    assert dominates([1.0])
    assert dominates([1.0, 0.2])
    assert dominates([1.0, 0.5]) is False
    assert dominates([]) is False


def test_sample_annulus_stays_in_the_ring():
    points = sample_annulus(np.random.default_rng(0), 200, 0.5, 1.0)
    radii = np.hypot(points[:, 0], points[:, 1])
    assert points.shape == (200, 2)
    assert np.all((radii >= 0.5 - 1e-12) & (radii <= 1.0 + 1e-12))


# ---------------- Registry ----------------

def test_registry_covers_every_experiment():
    assert tuple(get_experiment_entries()) == EXPERIMENT_KEYS
    with pytest.raises(KeyError):
        get_experiment_entry("heat-map")


def test_registry_rejects_foreign_config(out_dir):
    cfg = _config("ec-curve", out_dir)
    with pytest.raises(KeyError):
        get_experiment_entry("diagrams").run(cfg)


def test_runner_rejects_foreign_config(out_dir):
    with pytest.raises(ConfigError):
        run_diagram_experiment(_config("ec-curve", out_dir))


# ---------------- Experiments ----------------

def test_ec_curve_experiment(out_dir):
    cfg = _config("ec-curve", out_dir, levels=(-1.0, 0.0, 1.0), write_xlsx=True, write_report=True)
    report = run_ec_curve_experiment(cfg)

    assert report.passed  # z checks are not enforced at 6 runs
    assert report.summary["quantity"].tolist() == ["ec"] * 3 + ["L2"] * 3
    for name in ("summary.csv", "curve.csv", "curve.svg", "summary.xlsx", "report.tex"):
        assert (out_dir / name).exists()
    curve = pd.read_csv(out_dir / "curve.csv")
    assert list(curve.columns) == ["u", "mean_chi", "se", "expected"]


def test_ec_curve_is_reproducible(tmp_path):
    first = run_ec_curve_experiment(_config("ec-curve", tmp_path / "a", levels=(0.0,)))
    second = run_ec_curve_experiment(_config("ec-curve", tmp_path / "b", levels=(0.0,)))
    pd.testing.assert_frame_equal(first.summary, second.summary)


@pytest.mark.slow
def test_results_do_not_depend_on_n_jobs(tmp_path):
    serial = run_ec_curve_experiment(_config("ec-curve", tmp_path / "a", levels=(0.0,)))
    parallel = run_ec_curve_experiment(_config("ec-curve", tmp_path / "b", levels=(0.0,), n_jobs=2))
    pd.testing.assert_frame_equal(serial.summary, parallel.summary)


def test_euler_integral_experiment(out_dir):
    report = run_euler_integral_experiment(_config("euler-integral", out_dir, transform="square"))
    assert report.summary["param"].tolist() == ["G=square,open", "G=square,closed"]
    assert math.isnan(report.summary["closed_form"].iloc[1])
    assert report.parameters["transform"] == "square"


def test_euler_integral_rejects_unknown_transform(out_dir):
    with pytest.raises(ConfigError):
        run_euler_integral_experiment(_config("euler-integral", out_dir, transform="sine"))


@pytest.mark.parametrize("topology, side", [("box", 1.0), ("torus", 2.0)])
def test_barcode_ec_experiment(out_dir, topology, side):
    cfg = _config("barcode-ec", out_dir, topology=topology, side=side, levels=(-math.inf, 0.0, 1.0))
    report = run_barcode_ec_experiment(cfg)

    identity = [c for c in report.checks if c.name == "barcode identity at max f"]
    assert identity and identity[0].passed and identity[0].enforced
    first = report.summary.iloc[0]
    assert first["param"] == "a=-inf"
    assert first["mean"] == 0.0 and first["closed_form"] == 0.0
    assert report.passed


def test_diagram_experiment(out_dir):
    report = run_diagram_experiment(_config("diagrams", out_dir, runs=4))
    assert report.passed
    names = {c.name for c in report.checks}
    assert {"H0 births equal the local maxima", "H1 deaths equal the local minima"} <= names

    points = pd.read_csv(out_dir / "diagram_H0.csv")
    assert list(points.columns) == ["run", "birth", "death", "essential"]
    assert set(points["run"]) == {0, 1, 2, 3}
    for name in ("marginals_H0.csv", "marginals_H0.svg", "diagram.svg", "barcode.svg"):
        assert (out_dir / name).exists()


def test_diagram_extrema_checks_are_not_enforced_on_torus(out_dir):
    report = run_diagram_experiment(_config("diagrams", out_dir, runs=2, topology="torus", side=2.0))
    extrema = [c for c in report.checks if "local" in c.name]
    assert extrema and all(c.enforced is False for c in extrema)


def test_torus_coverage_experiment(out_dir):
    cfg = _config("torus-coverage", out_dir, runs=20, n_balls=3, tau=0.3, coverage_size=64)
    report = run_torus_coverage_experiment(cfg)
    row = report.summary.iloc[0]
    assert row["param"] == "n=3,d=2,tau=0.3"
    assert row["closed_form"] == pytest.approx(3 - 12 * 0.3 + 9 * 0.3**2)
    circle = [c for c in report.checks if c.name.startswith("circle polynomial")]
    assert circle[0].passed
    assert "coverage scale" in report.parameters


def test_annulus_experiment(out_dir):
    cfg = _config("annulus", out_dir, n_points=40, trials=3, max_radius=0.3, metric="Linf")
    report = run_annulus_experiment(cfg)

    trials = pd.read_csv(out_dir / "trials.csv")
    assert len(trials) == 3
    assert (out_dir / "barcode.svg").exists()
    rate = [c for c in report.checks if c.name.startswith("success rate")]
    assert rate[0].enforced is False
    linf = [c for c in report.checks if c.name == "Linf Cech and Rips barcodes coincide"]
    assert linf and linf[0].passed


@pytest.mark.slow
def test_annulus_recovery_rate_with_landmarks(out_dir):
    cfg = _config("annulus", out_dir, n_points=500, landmarks=100, max_radius=0.5, trials=20, n_jobs=-1)
    report = run_annulus_experiment(cfg)

    trials = pd.read_csv(out_dir / "trials.csv")
    assert list(trials.columns) == ["trial", *ANNULUS_TRIAL_COLUMNS]
    assert np.allclose(trials["h0_longest"], 0.5)
    assert trials["success"].mean() >= ANNULUS_SUCCESS_RATE
    assert report.parameters["landmarks"] == 100


def test_target_experiment(out_dir):
    cfg = _config("targets", out_dir, size=(16,), runs=5, n_scenes=8, max_targets=5, noisy_targets=2)
    report = run_target_experiment(cfg)

    checks = {c.name: c for c in report.checks}
    assert checks["noiseless scenes are counted exactly"].passed
    assert checks["empty scene counts zero targets"].passed
    assert report.summary["quantity"].tolist() == ["exact_recovery", "s_hat"]
    assert report.summary["closed_form"].iloc[1] == 2.0

    scene = json.loads((out_dir / "noisy_scene.json").read_text(encoding="utf-8"))
    assert len(scene["targets"]) == 2
    assert (out_dir / "scene_000.json").exists()
