import numpy as np
import pytest

import fnlslab.barycenter as bc
import fnlslab.functionals as fn
import fnlslab.solvers as sv
import fnlslab.spectral as sp
from fnlslab.grid import Field, GridSpec
from fnlslab.model import ModelSpec, power_nonlinearity

NL = power_nonlinearity(3.0)


@pytest.fixture(scope="module")
def resolved_dict():
    # singleton dictionary on a box small enough that dilation of the
    # polynomially decaying profile stays spectrally resolved
    g = GridSpec(N=2, M=256, L=20.0, s=0.75)
    model = ModelSpec(grid=g, nonlinearity=NL, mass=1.0)
    return sv.build_dictionary(model, nu0=0.0, n_samples=1,
                               opts=sv.SolveOptions())


def cfg_for(d):
    return bc.BarycenterConfig(R0=d.R0, r_star=d.r_star)


def test_smooth_cutoff_profile():
    psi = bc.smooth_cutoff(2.0)
    assert psi(0.0) == 1.0 and psi(0.5) == 1.0
    assert psi(1.0) == 0.0 and psi(3.0) == 0.0
    xs = np.linspace(0.45, 1.05, 40)
    vals = [psi(float(x)) for x in xs]
    assert all(v0 >= v1 for v0, v1 in zip(vals, vals[1:]))
    assert all(0.0 <= v <= 1.0 for v in vals)
    assert psi(0.75) == pytest.approx(0.5)


def test_config_validation():
    bc.BarycenterConfig(R0=6.0, r_star=0.8)
    with pytest.raises(bc.BarycenterError):
        bc.BarycenterConfig(R0=0.0, r_star=0.8)
    with pytest.raises(bc.BarycenterError):
        bc.BarycenterConfig(R0=6.0, r_star=-1.0)
    with pytest.raises(bc.BarycenterError):
        bc.BarycenterConfig(R0=6.0, r_star=0.8, stride=0)
    with pytest.raises(bc.BarycenterError):
        bc.BarycenterConfig(R0=6.0, r_star=0.8, stride=9)
    # default cutoff picks up r_star
    c = bc.BarycenterConfig(R0=6.0, r_star=2.0)
    assert c.psi(0.4) == 1.0 and c.psi(1.5) == 0.0


def test_density_member_locality_equivariance(resolved_dict):
    d = resolved_dict
    cfg = cfg_for(d)
    U = d.profiles[0]
    g = U.grid
    assert bc.density((0.0, 0.0), U, d, cfg) == 1.0
    # shifted member: density 1 at its own center
    p_cells = (32, -48)
    p = tuple(c * g.h for c in p_cells)
    up = Field(g, np.roll(U.values, p_cells, axis=(0, 1)))
    assert bc.density(p, up, d, cfg) == 1.0
    # zero beyond 2 R0 from all of the mass
    far = (p[0] - 2.0 * d.R0 - 1.0, p[1])
    assert bc.density(far, up, d, cfg) == 0.0
    # lattice-shift equivariance of the density, exactly
    q = (4 * g.h, -8 * g.h)
    shifted_q = (q[0] + p[0], q[1] + p[1])
    assert bc.density(shifted_q, up, d, cfg) == \
        pytest.approx(bc.density(q, U, d, cfg), abs=1e-12)
    with pytest.raises(bc.BarycenterError):
        bc.density((0.0,), U, d, cfg)
    with pytest.raises(bc.BarycenterError):
        bc.density((0.0, 0.0), U, [], cfg)


def test_upsilon_centered_shift_and_tube(resolved_dict):
    d = resolved_dict
    cfg = cfg_for(d)
    U = d.profiles[0]
    g = U.grid
    assert np.allclose(bc.upsilon(U, d, cfg), (0.0, 0.0), atol=1e-12)
    # exact equivariance under lattice shifts
    for cells in ((16, -24), (40, 8)):
        v = Field(g, np.roll(U.values, cells, axis=(0, 1)))
        got = bc.upsilon(v, d, cfg)
        want = tuple(c * g.h for c in cells)
        assert np.allclose(got, want, atol=1e-12)
        assert np.hypot(got[0] - want[0], got[1] - want[1]) <= 2.0 * d.R0
    # stride self-check passes on a clean member
    v = Field(g, np.roll(U.values, (16, -24), axis=(0, 1)))
    checked = bc.upsilon(v, d, cfg, check_stride=True)
    assert np.allclose(checked, bc.upsilon(v, d, cfg), atol=1e-12)
    # far-from-dictionary fields are out of the tube
    mesh = g.mesh()
    blob = Field(g, 0.1 * np.exp(-(mesh[0] ** 2 + mesh[1] ** 2)))
    with pytest.raises(bc.BarycenterError):
        bc.upsilon(blob, d, cfg)
    with pytest.raises(bc.BarycenterError):
        bc.upsilon(U, [], cfg)


def test_upsilon_stability_sampled(resolved_dict, rng):
    # |Y(u) - Y(v)| <= C (1 + |Y(u)|) ||u - v||_{H^s} over sampled pairs
    d = resolved_dict
    cfg = cfg_for(d)
    U = d.profiles[0]
    g = U.grid
    u = Field(g, np.roll(U.values, (20, 8), axis=(0, 1)))
    yu = np.asarray(bc.upsilon(u, d, cfg))
    xi = g.freq_axis()
    w = np.multiply.outer(*([np.exp(-(np.abs(xi) / 2.0) ** 2)] * 2))
    for cells, noise in (((0, 0), 0.3), ((1, 0), 0.0), ((1, -2), 0.2),
                         ((0, 3), 0.6)):
        vals = np.roll(u.values, cells, axis=(0, 1))
        if noise:
            white = np.fft.ifftn(np.fft.fftn(
                rng.standard_normal(g.shape)) * w).real
            pert = Field(g, white)
            vals = vals + noise * white / sp.hs_norm(pert)
        v = Field(g, vals)
        yv = np.asarray(bc.upsilon(v, d, cfg))
        move = float(np.hypot(*(yu - yv)))
        dist = sp.hs_norm(Field(g, u.values - v.values))
        if dist == 0.0:
            assert move == 0.0
        else:
            assert move <= 5.0 * (1.0 + float(np.hypot(*yu))) * dist


def test_phi_identity_and_translate(resolved_dict):
    d = resolved_dict
    U0 = d.profiles[0]
    g = U0.grid
    ident = bc.phi_eps(1.0, (0.0, 0.0), U0, 0.1)
    assert np.array_equal(ident.values, U0.values)
    p, eps = (-1.5, 0.0), 0.1
    direct = sp.translate(U0, tuple(-np.asarray(p) / eps))
    assert np.array_equal(bc.phi_eps(1.0, p, U0, eps).values, direct.values)
    with pytest.raises(bc.BarycenterError):
        bc.phi_eps(1.0, p, U0, 0.0)
    with pytest.raises(bc.BarycenterError):
        bc.phi_eps(0.0, p, U0, eps)
    with pytest.raises(bc.BarycenterError):
        bc.phi_eps(1.0, (1.0, 2.0, 3.0), U0, eps)


def test_phi_distance_shift_invariant(resolved_dict):
    # || Phi(t,p) - U0(. - p/eps) || is the pure dilation distance: exact
    # for lattice shifts; off-lattice shifts shed only the Nyquist row
    d = resolved_dict
    U0 = d.profiles[0]
    g = U0.grid
    for t in (0.9, 1.1):
        ref = []
        for p, eps in (((0.0, 0.0), 0.1), ((-1.5, 0.0), 0.1),
                       ((2.5, -5.0), 0.25)):
            phi = bc.phi_eps(t, p, U0, eps)
            back = sp.translate(U0, tuple(-np.asarray(p) / eps)) \
                if any(np.asarray(p) != 0.0) else U0
            ref.append(sp.hs_norm(Field(g, phi.values - back.values)))
        assert max(ref) - min(ref) <= 1e-10 * ref[0]
        off = bc.phi_eps(t, (0.31, -0.17), U0, 1.0)
        back = sp.translate(U0, (-0.31, 0.17))
        d_off = sp.hs_norm(Field(g, off.values - back.values))
        assert abs(d_off - ref[0]) <= 1e-2 * ref[0]


def test_reading_map_roundtrip(resolved_dict):
    # Psi o Phi reads back (t, p)
    d = resolved_dict
    cfg = cfg_for(d)
    U0 = d.profiles[0]
    p, eps, sigma0 = (-1.5, 0.0), 0.1, 0.3
    for t in (0.9, 1.0, 1.1):
        phi = bc.phi_eps(t, p, U0, eps)
        first, second = bc.psi_eps(phi, eps, 1.0, d, cfg, sigma0, NL)
        assert abs(first - t) <= 1e-2
        err = np.hypot(second[0] - p[0], second[1] - p[1])
        assert err <= 2.0 * eps * d.R0
        assert err <= 0.1


def test_psi_clamp_total(resolved_dict):
    d = resolved_dict
    cfg = cfg_for(d)
    U0 = d.profiles[0]
    g = U0.grid
    # member dictionaries keep the scaled fields in their own tube, so the
    # clamp is observable at both edges
    big = Field(g, 3.0 * U0.values)
    first, _ = bc.psi_eps(big, 0.1, 1.0, [big], cfg, 0.3, NL)
    assert first == pytest.approx(1.3)
    small = Field(g, 0.05 * U0.values)
    assert fn.pohozaev(small, 1.0, NL) == 0.0
    first, _ = bc.psi_eps(small, 0.1, 1.0, [small], cfg, 0.3, NL)
    assert first == pytest.approx(0.7)
    # ground state itself reads t = 1
    first, _ = bc.psi_eps(U0, 0.1, 1.0, d, cfg, 0.3, NL)
    assert abs(first - 1.0) <= 1e-6
    with pytest.raises(bc.BarycenterError):
        bc.psi_eps(U0, 0.1, 1.0, d, cfg, 0.0, NL)
    with pytest.raises(bc.BarycenterError):
        bc.psi_eps(U0, 0.1, 1.0, d, cfg, 1.0, NL)
