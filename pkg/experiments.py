# experiments.py
# Comments in English only
"""Monte Carlo experiments that compare simulated topology with closed-form expectations.

Each ``run_*`` function takes an ExperimentConfig, writes its artifacts into
``cfg.output_dir`` and returns an ExperimentReport. Realizations are independent
and seeded by ``realization_seed(cfg.base_seed, i)``, so results do not depend on
``n_jobs``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from numpy.typing import NDArray

from closed_forms import (
    TransformSpec,
    coverage_polynomial,
    coverage_scale,
    expected_barcode_ec,
    expected_ec_excursion,
    expected_euler_integral,
    expected_lk_excursion,
    get_transform,
    lk_for_grid,
    torus_coverage_expectation,
)
from complexes import (
    PointCloud,
    build_cubical_complex,
    cech_filtration,
    cell_vertex_extremes,
    maxmin_subsample,
    rips_filtration,
    sublevel_filtration,
    superlevel_filtration,
)
from config.experiment_config import ExperimentConfig
from config.paths import ensure_directories
from config.settings import ANNULUS_SUCCESS_RATE, DOMINANCE_RATIO, IDENTITY_RELATIVE_TOLERANCE
from diagrams.persistence_plots import barcode_figure, curve_figure, diagram_figure, histogram_figure, save_figure
from euler_calculus import (
    TargetScene,
    count_targets,
    euler_integral_real,
    euler_integral_signal_plus_noise,
    random_rectangle_scene,
    torus_cube_union_euler_char,
    write_ec_curve_csv,
    write_target_scene,
)
from field_sim import make_rng, realization_seed, sample_field
from persistence import PersistenceDiagram, barcode_euler_char, birth_death_marginals, diagram, extrema_correspondence, reduce
from reports.latex_report_generator import LatexReportGenerator
from reports.table_export import write_csv, write_excel
from validation.errors import ConfigError

logger = logging.getLogger(__name__)

_SQRT_2PI = math.sqrt(2.0 * math.pi)
SUMMARY_COLUMNS: Tuple[str, ...] = ("quantity", "param", "mean", "se", "runs", "closed_form", "z")


# ============================================================
# Results
# ============================================================

@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""
    # non-enforced checks are reported but never fail the run
    enforced: bool = True


@dataclass
class ExperimentReport:
    experiment: str
    summary: pd.DataFrame
    checks: List[CheckResult]
    artifacts: List[Path]
    parameters: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if c.enforced)

    def failed_checks(self) -> List[CheckResult]:
        return [c for c in self.checks if c.enforced and not c.passed]


def summary_statistics(samples: Sequence[float] | NDArray) -> Tuple[float, float, int]:
    """(mean, standard error, count); a single sample has SE 0."""
    values = np.asarray(samples, dtype=float).reshape(-1)
    if values.size == 0:
        return math.nan, math.nan, 0
    mean = float(values.mean())
    se = float(values.std(ddof=1) / math.sqrt(values.size)) if values.size > 1 else 0.0
    return mean, se, int(values.size)


def z_score(mean: float, se: float, closed_form: Optional[float]) -> float:
    if closed_form is None or math.isnan(mean):
        return math.nan
    delta = mean - closed_form
    # constant samples carry rounding noise only
    if abs(delta) <= 1e-12 * max(1.0, abs(closed_form)):
        return 0.0
    if se > 0:
        return delta / se
    return math.copysign(math.inf, delta)


class MonteCarloSummary:
    """Rows of (quantity, param, mean, se, runs, closed_form, z)."""

    def __init__(self) -> None:
        self._rows: List[Dict[str, Any]] = []

    def add(
        self,
        quantity: str,
        param: str,
        samples: Sequence[float] | NDArray,
        closed_form: Optional[float] = None,
    ) -> Dict[str, Any]:
        mean, se, count = summary_statistics(samples)
        row = {
            "quantity": quantity,
            "param": param,
            "mean": mean,
            "se": se,
            "runs": count,
            "closed_form": math.nan if closed_form is None else float(closed_form),
            "z": z_score(mean, se, closed_form),
        }
        self._rows.append(row)
        return row

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self._rows, columns=list(SUMMARY_COLUMNS))
        return frame.astype({"runs": "int64"})

    def z_checks(self, threshold: float, enforced: bool) -> List[CheckResult]:
        checks: List[CheckResult] = []
        for row in self._rows:
            if math.isnan(row["closed_form"]):
                continue
            z = row["z"]
            checks.append(
                CheckResult(
                    name=f"{row['quantity']} {row['param']}: |z| <= {threshold:g}",
                    passed=bool(abs(z) <= threshold),
                    detail=f"mean={row['mean']:.6g} closed={row['closed_form']:.6g} z={z:.3g}",
                    enforced=enforced,
                )
            )
        return checks


# ============================================================
# Realization runner
# ============================================================

def run_realizations(
    worker: Callable[..., Any],
    cfg: ExperimentConfig,
    count: Optional[int] = None,
    *args: Any,
) -> List[Any]:
    """Call ``worker(cfg, seed_i, *args)`` for i < count, results in index order."""
    count = cfg.runs if count is None else int(count)
    seeds = [realization_seed(cfg.base_seed, i) for i in range(count)]
    if cfg.n_jobs == 1:
        return [worker(cfg, seed, *args) for seed in seeds]
    logger.info("running %d realizations on %d jobs", count, cfg.n_jobs)
    return Parallel(n_jobs=cfg.n_jobs)(delayed(worker)(cfg, seed, *args) for seed in seeds)


def _level_label(u: float) -> str:
    return f"u={u:g}"


def _config_parameters(cfg: ExperimentConfig) -> Dict[str, Any]:
    return {
        "grid": f"{cfg.grid.topology} {'x'.join(str(n) for n in cfg.grid.sizes)} side={cfg.grid.side:g}",
        "alpha": cfg.model.alpha,
        "runs": cfg.runs,
        "seed": cfg.base_seed,
        "smoke": cfg.smoke,
        "z checks enforced": cfg.enforce_z,
    }


def _require(cfg: ExperimentConfig, experiment: str) -> Path:
    if cfg.experiment != experiment:
        raise ConfigError(f"config is for '{cfg.experiment}', not '{experiment}'.")
    return ensure_directories(cfg.output_dir)


def _finish(
    cfg: ExperimentConfig,
    out_dir: Path,
    summary: pd.DataFrame,
    checks: List[CheckResult],
    artifacts: List[Path],
    parameters: Dict[str, Any],
) -> ExperimentReport:
    artifacts = [write_csv(summary, out_dir / "summary.csv")] + list(artifacts)
    if cfg.write_xlsx:
        artifacts.append(write_excel(summary, out_dir / "summary.xlsx"))

    report = ExperimentReport(cfg.experiment, summary, checks, artifacts, parameters)
    if cfg.write_report:
        report.artifacts.append(LatexReportGenerator().generate(report, out_dir))

    for check in checks:
        if check.passed:
            logger.info("check passed: %s", check.name)
        elif check.enforced:
            logger.error("check FAILED: %s (%s)", check.name, check.detail)
        else:
            logger.warning("check not enforced, outside tolerance: %s (%s)", check.name, check.detail)
    return report


# ============================================================
# ec-curve
# ============================================================

def _ec_curve_realization(cfg: ExperimentConfig, seed: int) -> Tuple[NDArray, NDArray]:
    f = sample_field(cfg.grid, cfg.model, seed)
    dims, mins, _ = cell_vertex_extremes(f)
    signs = np.where(dims % 2 == 0, 1, -1)
    levels = np.asarray(cfg.levels, dtype=float)
    chi = np.array([int(signs[mins >= u].sum()) for u in levels], dtype=float)
    fraction = np.array([float(np.mean(f.values >= u)) for u in levels])
    return chi, fraction


def run_ec_curve_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Mean chi and top Lipschitz-Killing curvature of excursion sets against the closed forms."""
    out_dir = _require(cfg, "ec-curve")
    levels = np.asarray(cfg.levels, dtype=float)
    results = run_realizations(_ec_curve_realization, cfg)
    chi = np.vstack([r[0] for r in results])
    fraction = np.vstack([r[1] for r in results])

    lk = lk_for_grid(cfg.grid, cfg.model)
    top = cfg.grid.dim
    summary = MonteCarloSummary()
    expected = []
    for k, u in enumerate(levels):
        closed = float(expected_ec_excursion(u, lk))
        expected.append(closed)
        summary.add("ec", _level_label(u), chi[:, k], closed)
    for k, u in enumerate(levels):
        summary.add(f"L{top}", _level_label(u), lk[top] * fraction[:, k], float(expected_lk_excursion(top, u, lk)))

    stats = [summary_statistics(chi[:, k]) for k in range(levels.size)]
    curve = pd.DataFrame(
        {
            "u": levels,
            "mean_chi": [s[0] for s in stats],
            "se": [s[1] for s in stats],
            "expected": expected,
        }
    )
    artifacts = [write_ec_curve_csv(curve, out_dir / "curve.csv")]
    fig, _ = curve_figure(curve, "u", "mean_chi", "expected", "se", title="mean Euler characteristic of {f >= u}")
    artifacts.append(save_figure(fig, out_dir / "curve.svg"))

    frame = summary.to_frame()
    checks = summary.z_checks(cfg.z_threshold, cfg.enforce_z)
    parameters = _config_parameters(cfg) | {"L": ", ".join(f"{v:.6g}" for v in lk.values)}
    return _finish(cfg, out_dir, frame, checks, artifacts, parameters)


# ============================================================
# euler-integral
# ============================================================

def _euler_integral_realization(cfg: ExperimentConfig, seed: int) -> Tuple[float, float]:
    transform = get_transform(cfg.transform)
    g = sample_field(cfg.grid, cfg.model, seed).apply(transform.G)
    return euler_integral_real(g, "open"), euler_integral_real(g, "closed")


def _transform_or_error(label: str) -> TransformSpec:
    try:
        return get_transform(label)
    except KeyError as exc:
        raise ConfigError(str(exc)) from exc


def run_euler_integral_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Mean open-convention integral of G(f) d chi against the closed form."""
    out_dir = _require(cfg, "euler-integral")
    transform = _transform_or_error(cfg.transform)
    lk = lk_for_grid(cfg.grid, cfg.model)
    results = np.asarray(run_realizations(_euler_integral_realization, cfg), dtype=float).reshape(-1, 2)

    summary = MonteCarloSummary()
    summary.add("euler_integral", f"G={transform.label},open", results[:, 0], expected_euler_integral(transform, lk))
    summary.add("euler_integral", f"G={transform.label},closed", results[:, 1])

    frame = summary.to_frame()
    checks = summary.z_checks(cfg.z_threshold, cfg.enforce_z)
    parameters = _config_parameters(cfg) | {"transform": transform.label}
    return _finish(cfg, out_dir, frame, checks, [], parameters)


# ============================================================
# barcode-ec
# ============================================================

def _barcode_ec_realization(cfg: ExperimentConfig, seed: int) -> Tuple[NDArray, float]:
    f = sample_field(cfg.grid, cfg.model, seed)
    bc = reduce(sublevel_filtration(f))
    values = np.array(
        [0.0 if a == -math.inf else barcode_euler_char(bc, a) for a in cfg.levels], dtype=float
    )
    # barcode clipped at max f against max f * chi(M) - open integral of f
    f_max = float(f.values.max())
    lhs = barcode_euler_char(bc, f_max)
    chi_m = build_cubical_complex(cfg.grid).euler_characteristic()
    rhs = f_max * chi_m - euler_integral_real(f, "open")
    residual = abs(lhs - rhs) / max(1.0, abs(lhs), abs(rhs))
    return values, residual


def run_barcode_ec_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Mean chi of sublevel barcodes clipped at each level against the closed form."""
    out_dir = _require(cfg, "barcode-ec")
    results = run_realizations(_barcode_ec_realization, cfg)
    values = np.vstack([r[0] for r in results])
    residuals = np.array([r[1] for r in results])

    lk = lk_for_grid(cfg.grid, cfg.model)
    chi_m = build_cubical_complex(cfg.grid).euler_characteristic()
    summary = MonteCarloSummary()
    for k, a in enumerate(cfg.levels):
        summary.add("barcode_ec", f"a={a:g}", values[:, k], expected_barcode_ec(a, lk, chi_m))

    frame = summary.to_frame()
    checks = summary.z_checks(cfg.z_threshold, cfg.enforce_z)
    worst = float(residuals.max()) if residuals.size else 0.0
    checks.append(
        CheckResult(
            name="barcode identity at max f",
            passed=worst <= IDENTITY_RELATIVE_TOLERANCE,
            detail=f"max relative residual {worst:.3g}",
        )
    )
    return _finish(cfg, out_dir, frame, checks, [], _config_parameters(cfg) | {"chi(M)": chi_m})


# ============================================================
# diagrams
# ============================================================

def _diagram_realization(cfg: ExperimentConfig, seed: int) -> Tuple[pd.DataFrame, bool, bool]:
    f = sample_field(cfg.grid, cfg.model, seed)
    bc = reduce(superlevel_filtration(f))
    check = extrema_correspondence(f, bc)
    return diagram(bc).points, check.births_match, check.deaths_match


def run_diagram_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Pooled superlevel persistence diagrams, their marginals and the extrema correspondence."""
    out_dir = _require(cfg, "diagrams")
    results = run_realizations(_diagram_realization, cfg)
    top = cfg.grid.dim
    diagrams = [PersistenceDiagram(points, "superlevel-negated") for points, _, _ in results]

    pooled = pd.concat(
        [points.assign(run=i) for i, (points, _, _) in enumerate(results)], ignore_index=True
    )
    summary = MonteCarloSummary()
    artifacts: List[Path] = []
    for k in range(top + 1):
        points = pooled[pooled["degree"] == k][["run", "birth", "death", "essential"]]
        if k == top and len(points) == 0:
            continue
        artifacts.append(write_csv(points, out_dir / f"diagram_H{k}.csv"))

        per_run = np.array([int(np.sum(p["degree"] == k)) for p, _, _ in results], dtype=float)
        summary.add(f"H{k}_points", "per run", per_run)
        finite = points[points["essential"] == False]  # noqa: E712
        if len(finite) > 0:
            summary.add(f"H{k}_birth", "finite points", finite["birth"].to_numpy())
            summary.add(f"H{k}_death", "finite points", finite["death"].to_numpy())

        births, deaths = birth_death_marginals(diagrams, k, cfg.bin_width)
        marginals = pd.concat(
            [births.to_frame().assign(kind="birth"), deaths.to_frame().assign(kind="death")],
            ignore_index=True,
        )[["kind", "left", "right", "count"]]
        artifacts.append(write_csv(marginals, out_dir / f"marginals_H{k}.csv"))
        fig, _ = histogram_figure(births, deaths, k)
        artifacts.append(save_figure(fig, out_dir / f"marginals_H{k}.svg"))

    fig, _ = diagram_figure(diagrams, degrees=tuple(range(top + 1)))
    artifacts.append(save_figure(fig, out_dir / "diagram.svg"))
    first = reduce(superlevel_filtration(sample_field(cfg.grid, cfg.model, realization_seed(cfg.base_seed, 0))))
    fig, _ = barcode_figure(first)
    artifacts.append(save_figure(fig, out_dir / "barcode.svg"))

    h0 = pooled[(pooled["degree"] == 0) & (pooled["essential"] == False)]  # noqa: E712
    births_ok = sum(1 for _, b, _ in results if b)
    deaths_ok = sum(1 for _, _, d in results if d)
    on_box = not cfg.grid.is_torus
    checks = [
        CheckResult(
            name="superlevel H0 points have birth > death",
            passed=bool(np.all(h0["birth"].to_numpy() > h0["death"].to_numpy())),
            detail=f"{len(h0)} finite H0 points",
        ),
        CheckResult(
            name="H0 births equal the local maxima",
            passed=births_ok == len(results),
            detail=f"{births_ok}/{len(results)} realizations",
            enforced=on_box,
        ),
        CheckResult(
            name=f"H{top - 1} deaths equal the local minima",
            passed=deaths_ok == len(results),
            detail=f"{deaths_ok}/{len(results)} realizations",
            enforced=on_box,
        ),
    ]
    return _finish(cfg, out_dir, summary.to_frame(), checks, artifacts, _config_parameters(cfg))


# ============================================================
# torus-coverage
# ============================================================

def _coverage_realization(cfg: ExperimentConfig, seed: int, half_width: float) -> int:
    rng = make_rng(seed)
    centers = rng.random((cfg.n_balls, cfg.coverage_dim))
    return torus_cube_union_euler_char(centers, half_width, cfg.coverage_size)


def run_torus_coverage_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Mean chi of a union of random cubes of volume tau on the flat torus."""
    out_dir = _require(cfg, "torus-coverage")
    n, d, tau = cfg.n_balls, cfg.coverage_dim, cfg.tau
    half_width = tau ** (1.0 / d) / 2.0
    samples = np.asarray(run_realizations(_coverage_realization, cfg, None, half_width), dtype=float)

    summary = MonteCarloSummary()
    summary.add("coverage", f"n={n},d={d},tau={tau:g}", samples, torus_coverage_expectation(n, d, tau))
    frame = summary.to_frame()
    checks = summary.z_checks(cfg.z_threshold, cfg.enforce_z)

    gaps = n * (1.0 - tau) ** (n - 1)
    circle = coverage_polynomial(n, 1)(tau)
    checks.append(
        CheckResult(
            name="circle polynomial equals the expected gap count",
            passed=abs(circle - gaps) <= 1e-12 * max(1.0, abs(gaps)),
            detail=f"{circle:.12g} vs {gaps:.12g}",
        )
    )
    parameters = _config_parameters(cfg) | {
        "cubes": n,
        "torus dim": d,
        "tau": tau,
        "raster": cfg.coverage_size,
        "coverage scale": f"{coverage_scale(tau):.6g}",
    }
    return _finish(cfg, out_dir, frame, checks, [], parameters)


# ============================================================
# annulus
# ============================================================

ANNULUS_TRIAL_COLUMNS: Tuple[str, ...] = (
    "success", "h0_longest", "h0_second", "h1_longest", "h1_second", "covering_radius", "cech_matches_rips",
)


def sample_annulus(rng: np.random.Generator, n: int, inner: float, outer: float) -> NDArray:
    """Uniform points on the planar annulus inner <= |x| <= outer."""
    radius = np.sqrt(rng.uniform(inner * inner, outer * outer, size=n))
    theta = rng.uniform(0.0, 2.0 * math.pi, size=n)
    return np.column_stack([radius * np.cos(theta), radius * np.sin(theta)])


def dominates(lengths: Sequence[float], ratio: float = DOMINANCE_RATIO) -> bool:
    """True when the longest bar exceeds ``ratio`` times the second longest."""
    if len(lengths) == 0 or lengths[0] <= 0:
        return False
    if len(lengths) == 1:
        return True
    return lengths[0] > ratio * lengths[1]


def _annulus_cloud(cfg: ExperimentConfig, rng: np.random.Generator) -> Tuple[PointCloud, float]:
    """Sampled annulus thinned to ``cfg.landmarks`` maxmin landmarks, with their covering radius."""
    cloud = PointCloud(sample_annulus(rng, cfg.n_points, cfg.inner_radius, cfg.outer_radius), cfg.metric)
    chosen, covering = maxmin_subsample(cloud, cfg.landmarks)
    return cloud.subset(chosen), covering


def _annulus_realization(cfg: ExperimentConfig, seed: int) -> Dict[str, Any]:
    cloud, covering = _annulus_cloud(cfg, make_rng(seed))
    bc = reduce(rips_filtration(cloud, 2, cfg.max_radius))
    h0 = bc.longest(0, 2, clip=cfg.max_radius)
    h1 = bc.longest(1, 2, clip=cfg.max_radius)
    row: Dict[str, Any] = {
        "success": dominates(h0) and dominates(h1),
        "h0_longest": h0[0] if h0 else 0.0,
        "h0_second": h0[1] if len(h0) > 1 else 0.0,
        "h1_longest": h1[0] if h1 else 0.0,
        "h1_second": h1[1] if len(h1) > 1 else 0.0,
        "covering_radius": covering,
        "cech_matches_rips": True,
    }
    if cfg.metric == "Linf":
        row["cech_matches_rips"] = reduce(cech_filtration(cloud, 2, cfg.max_radius)).bars == bc.bars
    return row


def run_annulus_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Does one dominant H0 bar and one dominant H1 bar recover the annulus?"""
    out_dir = _require(cfg, "annulus")
    rows = run_realizations(_annulus_realization, cfg, cfg.trials)
    trials = pd.DataFrame(rows, columns=ANNULUS_TRIAL_COLUMNS)
    trials.insert(0, "trial", np.arange(len(trials)))

    summary = MonteCarloSummary()
    success = trials["success"].to_numpy(dtype=float)
    summary.add("success_rate", f"n={cfg.n_points}", success)
    summary.add("h1_longest", f"clip={cfg.max_radius:g}", trials["h1_longest"].to_numpy())
    summary.add("h1_second", f"clip={cfg.max_radius:g}", trials["h1_second"].to_numpy())
    summary.add("covering_radius", f"landmarks={cfg.landmarks}", trials["covering_radius"].to_numpy())

    artifacts = [write_csv(trials, out_dir / "trials.csv")]
    cloud, _ = _annulus_cloud(cfg, make_rng(realization_seed(cfg.base_seed, 0)))
    fig, _ = barcode_figure(reduce(rips_filtration(cloud, 2, cfg.max_radius)), clip=cfg.max_radius)
    artifacts.append(save_figure(fig, out_dir / "barcode.svg"))

    rate = float(success.mean()) if success.size else 0.0
    checks = [
        CheckResult(
            name=f"success rate >= {ANNULUS_SUCCESS_RATE:g}",
            passed=rate >= ANNULUS_SUCCESS_RATE,
            detail=f"{int(success.sum())}/{success.size} trials",
            enforced=success.size >= 100,
        )
    ]
    if cfg.metric == "Linf":
        matches = int(trials["cech_matches_rips"].sum())
        checks.append(
            CheckResult(
                name="Linf Cech and Rips barcodes coincide",
                passed=matches == len(trials),
                detail=f"{matches}/{len(trials)} trials",
            )
        )
    parameters = _config_parameters(cfg) | {
        "points": cfg.n_points,
        "annulus": f"{cfg.inner_radius:g} <= r <= {cfg.outer_radius:g}",
        "max radius": cfg.max_radius,
        "landmarks": cfg.landmarks,
        "metric": cfg.metric,
        "trials": cfg.trials,
    }
    return _finish(cfg, out_dir, summary.to_frame(), checks, artifacts, parameters)


# ============================================================
# targets
# ============================================================

def _noisy_target_realization(cfg: ExperimentConfig, seed: int, scene: TargetScene) -> float:
    noise = sample_field(cfg.grid, cfg.model, seed)
    y = euler_integral_signal_plus_noise(scene.signal(), noise)
    lk = lk_for_grid(cfg.grid, cfg.model)
    # the noise contributes -L1 / sqrt(2 pi) in expectation
    return y + lk[1] / _SQRT_2PI


def run_target_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Exact target counts from noiseless scenes, and an unbiased estimate under Gaussian noise."""
    out_dir = _require(cfg, "targets")
    rng = make_rng(cfg.base_seed)
    summary = MonteCarloSummary()
    artifacts: List[Path] = []

    exact = []
    first_scene: Optional[TargetScene] = None
    for _ in range(cfg.n_scenes):
        count = int(rng.integers(0, cfg.max_targets + 1))
        scene = random_rectangle_scene(cfg.grid, rng, count)
        if first_scene is None:
            first_scene = scene
        exact.append(count_targets(scene) == count)
    exact_arr = np.asarray(exact, dtype=float)
    summary.add("exact_recovery", f"scenes={cfg.n_scenes}", exact_arr)
    if first_scene is not None:
        artifacts.append(write_target_scene(first_scene, out_dir / "scene_000.json"))

    empty = TargetScene(cfg.grid, ())
    noisy_scene = random_rectangle_scene(cfg.grid, rng, cfg.noisy_targets)
    artifacts.append(write_target_scene(noisy_scene, out_dir / "noisy_scene.json"))
    true_total = cfg.noisy_targets * noisy_scene.gamma
    estimates = run_realizations(_noisy_target_realization, cfg, None, noisy_scene)
    summary.add("s_hat", f"targets={cfg.noisy_targets}", estimates, float(true_total))

    frame = summary.to_frame()
    checks = [
        CheckResult(
            name="noiseless scenes are counted exactly",
            passed=bool(np.all(exact_arr == 1.0)),
            detail=f"{int(exact_arr.sum())}/{exact_arr.size} scenes",
        ),
        CheckResult(name="empty scene counts zero targets", passed=count_targets(empty) == 0),
    ]
    checks.extend(summary.z_checks(cfg.z_threshold, cfg.enforce_z))
    parameters = _config_parameters(cfg) | {
        "scenes": cfg.n_scenes,
        "max targets": cfg.max_targets,
        "noisy targets": cfg.noisy_targets,
    }
    return _finish(cfg, out_dir, frame, checks, artifacts, parameters)
