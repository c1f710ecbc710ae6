import numpy as np
import pytest

from fnlslab.grid import (Field, FieldError, GridError, GridSpec, Region,
                          RegionError, annulus, ball, empty_region,
                          minimum_image_delta, region_where,
                          require_same_grid, whole_box, zero_field)


def test_grid_basic_quantities():
    g = GridSpec(N=2, M=64, L=8.0, s=0.75)
    assert g.h == 2 * 8.0 / 64
    assert g.cell_volume == g.h ** 2
    assert g.shape == (64, 64)
    assert g.size == 64 * 64
    assert g.parseval_weight == g.cell_volume / g.size
    ax = g.axis()
    assert ax[0] == -8.0
    assert ax[-1] == pytest.approx(8.0 - g.h)
    assert np.allclose(np.diff(ax), g.h)


def test_freq_axis_convention():
    g = GridSpec(N=1, M=16, L=4.0, s=0.5)
    xi = g.freq_axis()
    k = np.fft.fftfreq(16, d=1.0 / 16)
    k[16 // 2] = -8  # fftfreq puts -M/2 there already; fix the sign choice
    assert xi[0] == 0.0
    assert xi[1] == pytest.approx(np.pi / 4.0)
    # Nyquist mode retained with magnitude pi*(M/2)/L
    assert abs(xi[16 // 2]) == pytest.approx(np.pi * 8 / 4.0)


@pytest.mark.parametrize("kwargs", [
    dict(N=0, M=64, L=8.0, s=0.5),
    dict(N=1, M=48, L=8.0, s=0.5),      # not a power of two
    dict(N=1, M=4, L=8.0, s=0.5),       # too small
    dict(N=1, M=64, L=0.0, s=0.5),
    dict(N=1, M=64, L=-2.0, s=0.5),
    dict(N=1, M=64, L=8.0, s=0.0),
    dict(N=1, M=64, L=8.0, s=1.5),
])
def test_grid_rejects_bad_specs(kwargs):
    with pytest.raises(GridError):
        GridSpec(**kwargs)


def test_grid_allows_local_case():
    # s = 1 is the classical Laplacian and bypasses the N > 2s condition.
    GridSpec(N=2, M=64, L=8.0, s=1.0)
    GridSpec(N=1, M=64, L=8.0, s=1.0)


def test_field_validation():
    g = GridSpec(N=1, M=16, L=2.0, s=0.5)
    with pytest.raises(FieldError):
        Field(g, np.zeros(8))
    with pytest.raises(FieldError):
        Field(g, np.full(16, np.nan))
    u = Field(g, np.arange(16))
    assert u.values.dtype == np.float64
    v = u.with_values(u.values * 2)
    assert np.array_equal(v.values, 2 * u.values)
    w = u.copy()
    assert np.array_equal(w.values, u.values)
    assert w.values is not u.values
    assert np.all(zero_field(g).values == 0.0)


def test_require_same_grid():
    g1 = GridSpec(N=1, M=16, L=2.0, s=0.5)
    g2 = GridSpec(N=1, M=16, L=4.0, s=0.5)
    require_same_grid(zero_field(g1), zero_field(g1))
    with pytest.raises(GridError):
        require_same_grid(zero_field(g1), zero_field(g2))


def test_region_measure_exact():
    g = GridSpec(N=2, M=32, L=4.0, s=0.5)
    b = ball(g, (0.0, 0.0), 1.5)
    assert b.measure == b.cell_count * g.cell_volume
    assert 0 < b.cell_count < g.size
    assert whole_box(g).cell_count == g.size
    assert empty_region(g).is_empty
    assert empty_region(g).measure == 0.0


def test_region_algebra():
    g = GridSpec(N=1, M=64, L=8.0, s=0.5)
    b = ball(g, 0.0, 2.0)
    c = b.complement()
    assert b.cell_count + c.cell_count == g.size
    assert b.intersect(c).is_empty
    assert b.union(c).cell_count == g.size
    a = annulus(g, 0.0, 1.0, 3.0)
    assert a.intersect(b).cell_count <= min(a.cell_count, b.cell_count)
    g2 = GridSpec(N=1, M=64, L=4.0, s=0.5)
    with pytest.raises(GridError):
        b.intersect(ball(g2, 0.0, 2.0))


def test_region_tags():
    g = GridSpec(N=2, M=32, L=4.0, s=0.5)
    assert whole_box(g).tag == ("box",)
    assert empty_region(g).tag == ("empty",)
    assert ball(g, (1.0, -1.0), 2.0).tag == ("ball", 1.0, -1.0, 2.0)
    assert annulus(g, (0.0, 0.0), 1.0, 2.0).tag == (
        "annulus", 0.0, 0.0, 1.0, 2.0)
    assert region_where(g, np.ones(g.shape, bool)).tag == ("where",)


def test_region_indicator_pure():
    g = GridSpec(N=2, M=16, L=2.0, s=0.5)
    b1 = ball(g, (0.5, 0.5), 1.0)
    b2 = ball(g, (0.5, 0.5), 1.0)
    assert np.array_equal(b1.mask, b2.mask)
    with pytest.raises(ValueError):
        b1.mask[0, 0] = True  # masks are read-only


def test_region_mask_shape_checked():
    g = GridSpec(N=2, M=16, L=2.0, s=0.5)
    with pytest.raises(RegionError):
        Region(g, np.ones((16,), dtype=bool))
    with pytest.raises(RegionError):
        ball(g, (0.0,), 1.0)


def test_minimum_image_delta():
    g = GridSpec(N=1, M=16, L=4.0, s=0.5)
    d = minimum_image_delta(g, np.array([0.0, 3.9, 4.1, 7.9, -4.1, 8.0]))
    assert d[0] == 0.0
    assert d[1] == pytest.approx(3.9)
    assert d[2] == pytest.approx(-3.9)
    assert d[3] == pytest.approx(-0.1)
    assert d[4] == pytest.approx(3.9)
    assert abs(d[5]) == pytest.approx(0.0, abs=1e-12)
