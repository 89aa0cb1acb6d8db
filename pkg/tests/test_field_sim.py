# tests/test_field_sim.py
# Comments in English only
from __future__ import annotations

import math
import warnings

import numpy as np
import pytest

import field_sim
from field_sim import (
    CirculantFallbackWarning,
    CovarianceModel,
    GridField,
    GridSpec,
    covariance_matrix,
    empirical_cov_check,
    local_maxima_values,
    local_minima_values,
    read_field_snapshot,
    realization_seed,
    sample_field,
    second_spectral_moment,
    splitmix64,
    write_field_snapshot,
)
from validation.errors import TdaInputError, TdaNumericError, TdaSizeError


# ---------------- Domain types ----------------

def test_covariance_is_one_at_zero_lag(model):
    assert model(0.0) == pytest.approx(1.0)
    assert model(np.array([0.3, 0.4])) == pytest.approx(math.exp(-10.0 * 0.25))


def test_covariance_rejects_non_positive_alpha():
    with pytest.raises(TdaInputError):
        CovarianceModel(alpha=0.0)


def test_second_spectral_moment_is_two_alpha():
    assert second_spectral_moment(CovarianceModel(alpha=100.0)) == pytest.approx(200.0)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"dim": 4, "sizes": (2, 2, 2, 2)},
        {"dim": 2, "sizes": (8,)},
        {"dim": 2, "sizes": (8, 1)},
        {"dim": 2, "sizes": (8, 8), "side": -1.0},
        {"dim": 2, "sizes": (8, 8), "topology": "sphere"},
    ],
)
def test_grid_spec_validation(kwargs):
    with pytest.raises(TdaInputError):
        GridSpec(**kwargs)


def test_box_and_torus_coordinates():
    box = GridSpec(dim=1, sizes=(5,))
    torus = GridSpec(dim=1, sizes=(4,), topology="torus")
    np.testing.assert_allclose(box.coordinates(0), [0.0, 0.25, 0.5, 0.75, 1.0])
    np.testing.assert_allclose(torus.coordinates(0), [0.0, 0.25, 0.5, 0.75])
    # wrapped lag between first and last torus point is one spacing
    assert torus.axis_lags(0)[0, 3] == pytest.approx(0.25)
    assert box.spacings == (0.25,)
    assert torus.spacings == (0.25,)


def test_grid_field_is_read_only(box_field):
    with pytest.raises(ValueError):
        box_field.values[0] = 0.0


def test_grid_field_rejects_wrong_size_and_nan(small_box):
    with pytest.raises(TdaInputError):
        GridField(small_box, np.zeros(10))
    values = np.zeros(small_box.n_points)
    values[3] = np.nan
    with pytest.raises(TdaInputError):
        GridField(small_box, values)


# ---------------- Seeds ----------------

def test_splitmix64_reference_value():
    # first output of the splitmix64 stream seeded with 0
    assert splitmix64(0) == 0xE220A8397B1DCDAF


def test_realization_seeds_are_distinct_and_64_bit():
    seeds = {realization_seed(2024, i) for i in range(1000)}
    assert len(seeds) == 1000
    assert all(0 <= s < 2**64 for s in seeds)


def test_sampling_is_deterministic(small_box, model):
    a = sample_field(small_box, model, seed=7)
    b = sample_field(small_box, model, seed=7)
    c = sample_field(small_box, model, seed=8)
    np.testing.assert_array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)


# ---------------- Sampling ----------------

def test_covariance_matrix_is_kronecker_of_axes(small_box, model):
    cov = covariance_matrix(small_box, model)
    assert cov.shape == (64, 64)
    np.testing.assert_allclose(np.diag(cov), 1.0)
    # points (0, 0) and (1, 1) are one spacing apart along each axis
    h = small_box.spacings[0]
    assert cov[0, 9] == pytest.approx(math.exp(-10.0 * 2 * h * h))


def test_covariance_matrix_cap(model):
    with pytest.raises(TdaSizeError):
        covariance_matrix(GridSpec.cube(size=70, dim=2), model)


def test_separable_and_dense_samplers_agree(small_box, model):
    separable = sample_field(small_box, model, seed=3, method="separable")
    dense = sample_field(small_box, model, seed=3, method="dense")
    np.testing.assert_allclose(separable.values, dense.values, atol=1e-6)


def test_unknown_sampling_method(small_box, model):
    with pytest.raises(TdaInputError):
        sample_field(small_box, model, seed=0, method="spectral")


def test_circulant_requires_torus(small_box, model):
    with pytest.raises(TdaInputError):
        sample_field(small_box, model, seed=0, method="circulant")


def test_empirical_covariance_box(small_box, model):
    fields = [sample_field(small_box, model, seed=s) for s in range(300)]
    assert empirical_cov_check(fields, model) < 0.1


def test_empirical_covariance_torus(small_torus, model):
    fields = [sample_field(small_torus, model, seed=s) for s in range(300)]
    assert empirical_cov_check(fields, model) < 0.1


def test_empirical_covariance_needs_enough_fields(small_box, model):
    with pytest.raises(TdaInputError):
        empirical_cov_check([sample_field(small_box, model, seed=0)] * 10, model)


def test_circulant_fallback_warns_and_uses_cholesky(monkeypatch, small_torus, model):
    bad = np.ones(small_torus.shape)
    bad[0, 1] = -0.5
    monkeypatch.setattr(field_sim, "_circulant_eigenvalues", lambda spec, m: bad)
    with pytest.warns(CirculantFallbackWarning):
        f = sample_field(small_torus, model, seed=1)
    dense = sample_field(small_torus, model, seed=1, method="dense")
    np.testing.assert_array_equal(f.values, dense.values)


def test_circulant_fallback_over_cap_raises(monkeypatch, small_torus, model):
    bad = np.ones(small_torus.shape)
    bad[0, 1] = -0.5
    monkeypatch.setattr(field_sim, "_circulant_eigenvalues", lambda spec, m: bad)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", CirculantFallbackWarning)
        with pytest.raises(TdaNumericError):
            sample_field(small_torus, model, seed=1, cap=16)


# ---------------- Extrema ----------------

def test_local_extrema_on_a_bump():
    spec = GridSpec.cube(size=5, dim=2)
    x = np.linspace(-1.0, 1.0, 5)
    bump = np.exp(-np.add.outer(x**2, x**2))
    f = GridField(spec, bump.reshape(-1))
    np.testing.assert_allclose(local_maxima_values(f), [1.0])
    # the bump has no interior minimum
    assert local_minima_values(f).size == 0
    np.testing.assert_allclose(local_minima_values(f.negated()), [-1.0])


def test_local_minima_wrap_on_torus():
    spec = GridSpec(dim=1, sizes=(6,), topology="torus")
    f = GridField(spec, np.array([0.0, 1.0, 2.0, 3.0, 2.5, 1.5]))
    np.testing.assert_allclose(local_minima_values(f), [0.0])
    np.testing.assert_allclose(local_maxima_values(f), [3.0])


# ---------------- Snapshot ----------------

def test_snapshot_file(tmp_path, torus_field):
    path = write_field_snapshot(torus_field, tmp_path / "field.txt")
    back = read_field_snapshot(path)
    assert back.spec == torus_field.spec
    np.testing.assert_array_equal(back.values, torus_field.values)


def test_malformed_snapshot(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("2,8\n0.1\n", encoding="utf-8")
    with pytest.raises(TdaInputError):
        read_field_snapshot(path)
