# tests/test_euler_calculus.py
# Comments in English only
from __future__ import annotations

import math

import numpy as np
import pandas as pd
import pytest

from complexes import build_cubical_complex, complex_at, superlevel_filtration
from euler_calculus import (
    ConstructibleField,
    ECCurve,
    OpenCellComplex,
    TargetScene,
    barcode_identity_check,
    count_targets,
    disc_support,
    ec_curve_sublevel,
    ec_curve_superlevel,
    euler_char_closed,
    euler_char_lf,
    euler_integral_constructible,
    euler_integral_real,
    euler_integral_signal_plus_noise,
    load_target_scene,
    random_rectangle_scene,
    rectangle_support,
    scene_from_description,
    support_from_vertices,
    torus_cube_union_euler_char,
    write_ec_curve_csv,
    write_target_scene,
)
from field_sim import GridField, GridSpec
from persistence import brute_force_betti, reduce
from validation.errors import TdaInputError, TdaSizeError


# ---------------- Euler characteristics ----------------

def test_euler_char_lf_counts_open_cells():
    assert euler_char_lf(OpenCellComplex({0: 2, 1: 1})) == 1
    assert euler_char_lf(OpenCellComplex({1: 1})) == -1
    assert euler_char_lf(OpenCellComplex({0: 4, 1: 4, 2: 1})) == 1


def test_open_cell_counts_must_be_nonnegative():
    with pytest.raises(TdaInputError):
        OpenCellComplex({0: -1})


def test_euler_char_closed_checks_faces():
    spec = GridSpec(dim=1, sizes=(4,))
    cubical = build_cubical_complex(spec)
    assert euler_char_closed(cubical.cells, check_closed=True) == 1

    edges = [c for c in cubical.cells if c.dim == 1]
    # edges alone are not face-closed
    assert euler_char_closed(edges) == -len(edges)
    with pytest.raises(TdaInputError):
        euler_char_closed(edges, check_closed=True)


# ---------------- EC curves ----------------

def test_superlevel_curve_of_ramp(ramp_1d):
    curve = ec_curve_superlevel(ramp_1d)
    assert curve(-5.0) == 1
    assert curve(0.5) == 1
    assert curve(1.0) == 1
    assert curve(1.01) == 0
    assert curve.integrate(0.0, math.inf) == pytest.approx(1.0)


def test_sublevel_curve_of_ramp(ramp_1d):
    curve = ec_curve_sublevel(ramp_1d)
    assert curve(-0.01) == 0
    assert curve(0.0) == 1
    assert curve(3.0) == 1


def test_curve_integral_over_unbounded_support_raises(ramp_1d):
    with pytest.raises(TdaInputError):
        ec_curve_superlevel(ramp_1d).integrate(-math.inf, 0.0)


def test_superlevel_curve_below_the_minimum_is_chi_of_domain(box_field, torus_field):
    assert ec_curve_superlevel(box_field)(box_field.values.min() - 1.0) == 1
    assert ec_curve_superlevel(torus_field)(torus_field.values.min() - 1.0) == 0


@pytest.mark.parametrize("fixture", ["box_field", "torus_field"])
def test_superlevel_curve_is_the_betti_alternating_sum(fixture, request):
    f = request.getfixturevalue(fixture)
    fc = superlevel_filtration(f)
    curve = ec_curve_superlevel(f)
    levels = np.concatenate([np.quantile(f.values, [0.0, 0.2, 0.5, 0.8, 1.0]), [f.values.max() + 1.0]])
    for u in levels:
        cells = [fc.cells[i] for i in sorted(complex_at(fc, -float(u)))]
        assert curve(float(u)) == brute_force_betti(cells, max_dim=2).euler_characteristic()


def test_curve_validation():
    with pytest.raises(TdaInputError):
        ECCurve(np.array([0.0, 1.0]), np.array([1, 0]))
    with pytest.raises(TdaInputError):
        ECCurve(np.array([1.0, 0.0]), np.array([1, 0, 0]))
    with pytest.raises(TdaInputError):
        ECCurve(np.array([0.0]), np.array([1, 0]), kind="middle")


def test_curve_frame_and_csv(ramp_1d, tmp_path):
    frame = ec_curve_superlevel(ramp_1d).to_frame()
    assert list(frame.columns) == ["u", "chi"]
    assert frame["chi"].tolist() == [1, 1, 1, 1, 1]

    path = write_ec_curve_csv(frame, tmp_path / "nested" / "curve.csv")
    back = pd.read_csv(path)
    assert np.allclose(back["u"], frame["u"])


# ---------------- Euler integrals of real functions ----------------

def test_ramp_integrals(ramp_1d):
    assert euler_integral_real(ramp_1d, "closed") == pytest.approx(1.0)
    assert euler_integral_real(ramp_1d, "open") == pytest.approx(0.0)

    flipped = ramp_1d.apply(lambda v: 1.0 - v)
    assert euler_integral_real(flipped, "closed") == pytest.approx(1.0)
    assert euler_integral_real(flipped, "open") == pytest.approx(0.0)


def test_closed_integral_is_odd(box_field):
    assert euler_integral_real(box_field.negated(), "closed") == pytest.approx(
        -euler_integral_real(box_field, "closed")
    )


@pytest.mark.parametrize("value", [-1.5, 0.0, 2.0])
def test_open_integral_of_constant(small_box, small_torus, value):
    assert euler_integral_real(GridField.constant(small_box, value), "open") == pytest.approx(value)
    assert euler_integral_real(GridField.constant(small_torus, value), "open") == pytest.approx(0.0)


@pytest.mark.parametrize("convention", ["closed", "open"])
@pytest.mark.parametrize("c", [0.5, 3.0])
def test_integral_scales_with_positive_factors(box_field, convention, c):
    scaled = box_field.apply(lambda v: c * v)
    assert euler_integral_real(scaled, convention) == pytest.approx(c * euler_integral_real(box_field, convention))


@pytest.mark.parametrize("fixture, chi", [("box_field", 1), ("torus_field", 0)])
def test_open_integral_shifts_by_the_domain_euler_characteristic(fixture, chi, request):
    f = request.getfixturevalue(fixture)
    shifted = f.apply(lambda v: v + 0.7)
    assert euler_integral_real(shifted, "open") == pytest.approx(euler_integral_real(f, "open") + 0.7 * chi)


def test_unknown_convention(ramp_1d):
    with pytest.raises(TdaInputError):
        euler_integral_real(ramp_1d, "half-open")


# ---------------- Constructible functions ----------------

def test_rectangle_counts_once(small_box):
    support = rectangle_support(small_box, (1, 1), (3, 4))
    h = ConstructibleField.from_supports(small_box, [support])
    assert euler_integral_constructible(h) == 1


def test_overlapping_rectangles_still_add(small_box):
    a = rectangle_support(small_box, (0, 0), (4, 4))
    b = rectangle_support(small_box, (2, 2), (6, 6))
    assert euler_integral_constructible(ConstructibleField.from_supports(small_box, [a, b])) == 2
    assert euler_integral_constructible(ConstructibleField.from_supports(small_box, [a, b], [2, -1])) == 1


def test_rectangle_bounds(small_box):
    with pytest.raises(TdaInputError):
        rectangle_support(small_box, (0, 0), (8, 2))
    with pytest.raises(TdaInputError):
        rectangle_support(small_box, (3,), (4,))


def test_disc_wraps_on_torus():
    spec = GridSpec.cube(size=10, dim=2, topology="torus")
    support = disc_support(spec, (0.0, 0.0), 0.15)
    vertices = [i for i in support if build_cubical_complex(spec).cells[i].dim == 0]
    assert len(vertices) == 9
    assert euler_integral_constructible(ConstructibleField.from_supports(spec, [support])) == 1


def test_from_vertex_values_matches_supports(small_box):
    mask = np.zeros(small_box.shape, dtype=int)
    mask[2:5, 1:4] = 1
    from_vertices = ConstructibleField.from_vertex_values(small_box, mask)
    from_support = ConstructibleField.from_supports(small_box, [support_from_vertices(small_box, mask)])
    assert np.array_equal(from_vertices.values, from_support.values)

    assert euler_integral_constructible(ConstructibleField.from_vertex_values(small_box, -mask)) == -1


def test_constructible_values_must_be_integers(small_box):
    n_cells = len(build_cubical_complex(small_box))
    with pytest.raises(TdaInputError):
        ConstructibleField(small_box, np.full(n_cells, 0.5))
    with pytest.raises(TdaInputError):
        ConstructibleField(small_box, np.zeros(3))
    assert euler_integral_constructible(ConstructibleField.zero(small_box)) == 0


def test_signal_plus_noise_is_additive(small_box, box_field):
    support = rectangle_support(small_box, (1, 1), (3, 3))
    h = ConstructibleField.from_supports(small_box, [support])

    assert euler_integral_signal_plus_noise(h, GridField.constant(small_box, 0.0)) == pytest.approx(1.0)
    expected = 1.0 + euler_integral_real(box_field, "open")
    assert euler_integral_signal_plus_noise(h, box_field) == pytest.approx(expected)


def test_signal_and_noise_must_share_a_grid(small_box, torus_field):
    with pytest.raises(TdaInputError):
        euler_integral_signal_plus_noise(ConstructibleField.zero(small_box), torus_field)


# ---------------- Targets ----------------

def _ring_mask(spec: GridSpec) -> np.ndarray:
    mask = np.zeros(spec.shape, dtype=bool)
    mask[1:4, 1:4] = True
    mask[2, 2] = False
    return mask


def test_target_scene_rejects_wrong_euler_characteristic():
    spec = GridSpec.cube(size=7, dim=2)
    ring = support_from_vertices(spec, _ring_mask(spec))
    with pytest.raises(TdaInputError):
        TargetScene(spec, (ring,))


def test_target_scene_rejects_zero_gamma_and_empty_support(small_box):
    support = rectangle_support(small_box, (0, 0), (1, 1))
    with pytest.raises(TdaInputError):
        TargetScene(small_box, (support,), gamma=0)
    with pytest.raises(TdaInputError):
        TargetScene(small_box, (frozenset(),))


def test_count_with_gamma_two():
    spec = GridSpec.cube(size=7, dim=2)
    mask = np.zeros(spec.shape, dtype=bool)
    mask[1, 1] = mask[4, 4] = True
    pair = support_from_vertices(spec, mask)
    scene = TargetScene(spec, (pair, pair, pair), gamma=2)
    assert count_targets(scene) == 3


def test_scene_file_roundtrip(tmp_path):
    description = {
        "grid": {"dim": 2, "sizes": [12, 12]},
        "targets": [
            {"shape": "rectangle", "lo": [1, 1], "hi": [3, 5]},
            {"shape": "disc", "center": [0.7, 0.7], "radius": 0.12},
        ],
    }
    scene = scene_from_description(description)
    assert count_targets(scene) == 2

    path = write_target_scene(scene, tmp_path / "scene.json")
    loaded = load_target_scene(path)
    assert loaded == scene
    assert count_targets(loaded) == 2


_BOXES = [((1, 1), (3, 4)), ((2, 3), (5, 5)), ((6, 1), (6, 2)), ((0, 6), (1, 6)), ((4, 4), (4, 4))]


def _box_scene(size, offset=(0, 0), factor=1):
    targets = [
        {
            "shape": "rectangle",
            "lo": [factor * (a + o) for a, o in zip(lo, offset)],
            "hi": [factor * (b + o) for b, o in zip(hi, offset)],
        }
        for lo, hi in _BOXES
    ]
    return scene_from_description({"grid": {"dim": 2, "sizes": [size, size]}, "targets": targets})


@pytest.mark.parametrize("offset", [(0, 0), (3, 4), (5, 0)])
def test_count_is_invariant_under_translation(offset):
    assert count_targets(_box_scene(12, offset)) == len(_BOXES)


def test_count_is_invariant_under_grid_refinement():
    coarse = _box_scene(12)
    fine = _box_scene(23, factor=2)
    assert count_targets(fine) == count_targets(coarse) == len(_BOXES)


def test_empty_scene_counts_zero():
    scene = scene_from_description({"grid": {"dim": 2, "sizes": [6, 6]}, "targets": []})
    assert count_targets(scene) == 0


@pytest.mark.parametrize(
    "description",
    [
        {"targets": []},
        {"grid": {"dim": 2, "sizes": [6, 6]}, "targets": [{"shape": "triangle"}]},
        {"grid": {"dim": 2, "sizes": [6, 6]}, "targets": [{"shape": "rectangle", "lo": [0, 0]}]},
    ],
)
def test_malformed_scene(description):
    with pytest.raises(TdaInputError):
        scene_from_description(description)


def test_scene_file_must_be_json(tmp_path):
    path = tmp_path / "scene.json"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(TdaInputError):
        load_target_scene(path)


@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_random_rectangles_are_counted_exactly(seed):
    spec = GridSpec.cube(size=16, dim=2)
    scene = random_rectangle_scene(spec, np.random.default_rng(seed), count=6)
    assert len(scene.supports) == 6
    assert count_targets(scene) == 6


# ---------------- Barcode identity ----------------

@pytest.mark.parametrize("fixture", ["box_field", "torus_field"])
def test_barcode_identity(fixture, request):
    f = request.getfixturevalue(fixture)
    lhs, rhs = barcode_identity_check(f)
    assert lhs == pytest.approx(rhs, abs=1e-9)


def test_barcode_identity_needs_sublevel_barcode(box_field):
    with pytest.raises(TdaInputError):
        barcode_identity_check(box_field, reduce(superlevel_filtration(box_field)))


# ---------------- Cube unions on the torus ----------------

def test_single_cube_is_contractible():
    assert torus_cube_union_euler_char(np.array([[0.5, 0.5]]), 0.1, 50) == 1


def test_disjoint_cubes_add():
    centers = np.array([[0.2, 0.2], [0.7, 0.7]])
    assert torus_cube_union_euler_char(centers, 0.05, 40) == 2


def test_cube_covering_everything_is_the_torus():
    assert torus_cube_union_euler_char(np.array([[0.5, 0.5]]), 0.5, 20) == 0


def test_cube_union_rejects_bad_input():
    with pytest.raises(TdaInputError):
        torus_cube_union_euler_char(np.array([[0.5, 0.5]]), 0.1, 2)
    with pytest.raises(TdaInputError):
        torus_cube_union_euler_char(np.array([[0.5, 0.5]]), 0.0, 10)
    with pytest.raises(TdaSizeError):
        torus_cube_union_euler_char(np.array([[0.5, 0.5]]), 0.1, 5000)
