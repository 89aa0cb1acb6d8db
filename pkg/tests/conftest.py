# tests/conftest.py
# Comments in English only
from __future__ import annotations

import numpy as np
import pytest

from field_sim import CovarianceModel, GridField, GridSpec, sample_field


@pytest.fixture
def model() -> CovarianceModel:
    return CovarianceModel(alpha=10.0)


@pytest.fixture
def small_box() -> GridSpec:
    return GridSpec.cube(size=8, dim=2)


@pytest.fixture
def small_torus() -> GridSpec:
    # side 2 keeps the wrapped covariance positive definite at alpha = 10
    return GridSpec.cube(size=8, dim=2, side=2.0, topology="torus")


@pytest.fixture
def box_field(small_box: GridSpec, model: CovarianceModel) -> GridField:
    return sample_field(small_box, model, seed=12345)


@pytest.fixture
def torus_field(small_torus: GridSpec, model: CovarianceModel) -> GridField:
    return sample_field(small_torus, model, seed=12345)


@pytest.fixture
def ramp_1d() -> GridField:
    """f(x) = x on five points of [0, 1]."""
    spec = GridSpec(dim=1, sizes=(5,))
    return GridField(spec, np.linspace(0.0, 1.0, 5))


@pytest.fixture
def out_dir(tmp_path):
    target = tmp_path / "out"
    target.mkdir()
    return target
