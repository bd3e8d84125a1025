import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mg_selseg.errors import DimensionError, NumericError
from mg_selseg.grid import Field2D, build_hierarchy, interpolate, largest_crop, restrict

import oracles

even = st.integers(1, 6).map(lambda k: 2 * k)


def test_field_spacing_and_validation():
    f = Field2D(np.zeros((8, 4)))
    assert (f.n, f.m) == (8, 4)
    assert abs(f.hx * f.n - 1) < 1e-12 and abs(f.hy * f.m - 1) < 1e-12
    with pytest.raises(NumericError):
        Field2D(np.array([[0.0, np.nan]]))
    with pytest.raises(DimensionError):
        Field2D(np.zeros(5))


def test_restrict_constant():
    assert np.allclose(restrict(np.full((8, 6), 3.25)), 3.25, rtol=0, atol=1e-15)


def test_restrict_impulse_centre_weight():
    # interior pixel (2, 2) in 1-based numbering is the centre of coarse pixel (1, 1)
    f = np.zeros((4, 4))
    f[1, 1] = 16.0
    assert restrict(f)[0, 0] == 4.0


def test_restrict_matches_dense_oracle():
    f = np.random.default_rng(0).normal(size=(8, 8))
    assert np.max(np.abs(restrict(f) - oracles.restrict_dense(f))) < 1e-12


def test_restrict_rejects_odd():
    with pytest.raises(DimensionError):
        restrict(np.zeros((6, 5)))


def test_restrict_accepts_field():
    out = restrict(Field2D(np.ones((4, 4))))
    assert isinstance(out, Field2D) and out.values.shape == (2, 2)


def test_interpolate_constant():
    assert np.all(interpolate(np.full((3, 5), -2.0)) == -2.0)


def test_interpolate_edge_replication():
    c = np.array([[0.0, 0.0], [0.0, 4.0]])
    fine = interpolate(c)
    assert np.max(np.abs(fine - oracles.interpolate_dense(c))) < 1e-12
    assert fine[3, 3] == 4.0
    assert fine[2, 2] == 1.0
    assert fine[0, 0] == 0.0


def test_interpolate_ramp_copies_nodes():
    x = np.arange(6.0)[:, None] * np.ones((1, 4))
    fine = interpolate(x)
    assert np.array_equal(fine[1::2, 1::2], x)
    assert np.allclose(np.diff(fine[1:, 0]), 0.5)


def test_interpolate_rejects_tiny():
    with pytest.raises(DimensionError):
        interpolate(np.zeros((1, 4)))


def test_hierarchy_six_levels():
    h = build_hierarchy(1024, 1024, 32)
    assert [n for n, _ in h.levels] == [1024, 512, 256, 128, 64, 32]


def test_hierarchy_single_level():
    assert build_hierarchy(32, 32, 32).levels == [(32, 32)]


def test_hierarchy_rectangular():
    assert build_hierarchy(96, 64, 32).levels == [(96, 64), (48, 32)]


def test_hierarchy_suggests_crop():
    with pytest.raises(DimensionError, match="largest valid crop is 200x128"):
        build_hierarchy(200, 130, 32)
    assert largest_crop(200, 130, 32) == (200, 128)
    assert len(build_hierarchy(200, 128, 32)) == 3


@settings(max_examples=60, deadline=None)
@given(n=even, m=even, seed=st.integers(0, 2**31))
def test_restrict_oracle_and_linearity(n, m, seed):
    rng = np.random.default_rng(seed)
    u, v = rng.normal(size=(2, n, m))
    a, b = rng.normal(size=2)
    assert np.max(np.abs(restrict(u) - oracles.restrict_dense(u))) < 1e-12
    assert np.max(np.abs(restrict(a * u + b * v) - (a * restrict(u) + b * restrict(v)))) < 1e-12
    assert restrict(u).shape == (n // 2, m // 2)


@settings(max_examples=60, deadline=None)
@given(n=st.integers(2, 7), m=st.integers(2, 7), seed=st.integers(0, 2**31))
def test_interpolate_oracle_and_linearity(n, m, seed):
    rng = np.random.default_rng(seed)
    u, v = rng.normal(size=(2, n, m))
    a, b = rng.normal(size=2)
    assert np.max(np.abs(interpolate(u) - oracles.interpolate_dense(u))) < 1e-12
    assert np.max(np.abs(interpolate(a * u + b * v) - (a * interpolate(u) + b * interpolate(v)))) < 1e-12
    assert interpolate(u).shape == (2 * n, 2 * m)


@settings(max_examples=40, deadline=None)
@given(n=even, m=even, c=st.floats(-1e3, 1e3))
def test_round_trip_keeps_constants(n, m, c):
    assert np.allclose(restrict(interpolate(np.full((n, m), c))), c, rtol=1e-15, atol=1e-12)
    if n >= 4 and m >= 4:
        assert np.allclose(interpolate(restrict(np.full((n, m), c))), c, rtol=1e-15, atol=1e-12)


def test_restrict_weights_sum_to_one():
    R = oracles.restrict_matrix(10, 8)
    assert np.allclose(R.sum(axis=1), 1.0)
