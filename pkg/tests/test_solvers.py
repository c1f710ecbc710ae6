import numpy as np
import pytest

import fnlslab.functionals as fn
import fnlslab.solvers as sv
import fnlslab.spectral as sp
from fnlslab.grid import Field, GridSpec, ball
from fnlslab.model import ModelSpec, make_ring_potential, power_nonlinearity


def limit_model(M=128, L=12.0, s=0.75, p=3.0):
    g = GridSpec(N=2, M=M, L=L, s=s)
    return ModelSpec(grid=g, nonlinearity=power_nonlinearity(p), mass=1.0)


def ring_model():
    g = GridSpec(N=2, M=128, L=40.0, s=0.75)
    pot = make_ring_potential(g, m0=1.0, depth=0.4, radius=1.5, cap=1.4,
                              width=1.2)
    return ModelSpec(grid=g, nonlinearity=power_nonlinearity(3.0),
                     potential=pot)


def test_solve_options_validation():
    sv.SolveOptions()
    with pytest.raises(ValueError):
        sv.SolveOptions(step_rule="newton")
    with pytest.raises(ValueError):
        sv.SolveOptions(armijo=0.0)
    with pytest.raises(ValueError):
        sv.SolveOptions(armijo=0.6)
    with pytest.raises(ValueError):
        sv.SolveOptions(tol_residual=0.0)
    with pytest.raises(ValueError):
        sv.SolveOptions(tol_pohozaev=-1e-8)
    with pytest.raises(ValueError):
        sv.SolveOptions(step_size=0.0)
    with pytest.raises(ValueError):
        sv.SolveOptions(max_iters=0)


def test_gaussian_seed_shape():
    g = GridSpec(N=2, M=64, L=12.0, s=0.75)
    u = sv.gaussian_seed(g, amplitude=2.5, width=1.5, center=(3.0, -1.5))
    j = np.unravel_index(int(np.argmax(u.values)), g.shape)
    x = g.axis()
    assert abs(x[j[0]] - 3.0) <= g.h / 2
    assert abs(x[j[1]] + 1.5) <= g.h / 2
    assert np.max(u.values) == pytest.approx(2.5, rel=1e-12)
    centered = sv.gaussian_seed(g)
    assert centered.values[g.M // 2, g.M // 2] == pytest.approx(3.0)


def test_recenter_idempotent():
    g = GridSpec(N=2, M=64, L=12.0, s=0.75)
    u = sv.gaussian_seed(g, center=(4.0, -5.0))
    once = sv.recenter_field(u)
    twice = sv.recenter_field(once)
    j = np.unravel_index(int(np.argmax(once.values)), g.shape)
    assert j == (g.M // 2, g.M // 2)
    assert np.array_equal(once.values, twice.values)


def test_mass_barycenter_locates_and_unwraps():
    g = GridSpec(N=2, M=128, L=12.0, s=0.75)
    u = sv.gaussian_seed(g, width=1.0, center=(3.0, -1.5))
    b = sv.mass_barycenter(u)
    assert abs(b[0] - 3.0) <= 1e-6 and abs(b[1] + 1.5) <= 1e-6
    # bump straddling the seam: centroid must unwrap near the seam, not
    # average to the box center
    edge = sv.gaussian_seed(g, width=1.0, center=(-g.L + 0.5, 0.0))
    be = sv.mass_barycenter(edge)
    assert abs(abs(be[0]) - (g.L - 0.5)) <= 2 * g.h
    zero = Field(g, np.zeros(g.shape))
    assert sv.mass_barycenter(zero) == (0.0, 0.0)


def test_ground_state_matches_closed_form_1d():
    # local cubic case has the exact profile sqrt(2)/cosh(x), energy 4/3
    g = GridSpec(N=1, M=256, L=20.0, s=1.0)
    model = ModelSpec(grid=g, nonlinearity=power_nonlinearity(3.0), mass=1.0)
    res = sv.solve_ground_state(1.0, model, sv.SolveOptions(), sv.gaussian_seed(g))
    assert res.converged
    assert res.diagnostics["constraint"] == "nehari"
    assert res.pohozaev == 0.0
    assert abs(res.energy.total - 4.0 / 3.0) <= 1e-3
    exact = np.sqrt(2.0) / np.cosh(g.axis())
    l2diff = np.sqrt(np.sum((res.field.values - exact) ** 2) * g.cell_volume)
    assert l2diff <= 1e-2


def test_descent_log_monotone_and_projected():
    model = limit_model()
    res = sv.solve_ground_state(1.0, model, sv.SolveOptions(),
                                sv.gaussian_seed(model.grid))
    assert res.converged
    assert res.residual <= 1e-6
    assert res.diagnostics["constraint"] == "pohozaev"
    log = res.iterates
    assert len(log) == res.iterations
    energies = [row[1] for row in log]
    for e0, e1 in zip(energies, energies[1:]):
        assert e1 <= e0 + 1e-12 * abs(e0)
    # every logged iterate sits on {P_a = 1}: the rescale is exact
    for row in log:
        assert abs(row[3] - 1.0) <= 1e-10
    assert abs(res.pohozaev - 1.0) <= 1e-8
    # recentered: maximum at the origin cell
    j = np.unravel_index(int(np.argmax(res.field.values)), model.grid.shape)
    assert j == (model.grid.M // 2, model.grid.M // 2)
    assert not res.diagnostics["negative_mass_flagged"]


def test_solve_deterministic():
    model = limit_model(M=64)
    opts = sv.SolveOptions()
    r1 = sv.solve_ground_state(1.0, model, opts, sv.gaussian_seed(model.grid))
    r2 = sv.solve_ground_state(1.0, model, opts, sv.gaussian_seed(model.grid))
    assert r1.iterates == r2.iterates
    assert np.array_equal(r1.field.values, r2.field.values)
    assert r1.energy.total == r2.energy.total


def test_ground_state_input_guards():
    model = limit_model(M=64)
    g = model.grid
    opts = sv.SolveOptions()
    with pytest.raises(sv.SolverError):
        sv.solve_ground_state(0.0, model, opts, sv.gaussian_seed(g))
    other = GridSpec(N=2, M=32, L=12.0, s=0.75)
    with pytest.raises(sv.SolverError):
        sv.solve_ground_state(1.0, model, opts, sv.gaussian_seed(other))
    with pytest.raises(sv.SolverError):
        sv.solve_ground_state(1.0, model, opts, Field(g, np.zeros(g.shape)))
    # a tiny seed still lands on the constraint: the closed-form rescale
    # is amplitude-free for power nonlinearities
    tiny = sv.solve_ground_state(1.0, model, opts,
                                 sv.gaussian_seed(g, amplitude=1e-6))
    assert tiny.converged


def test_critical_growth_refused_unless_waived():
    # p = (N+2s)/(N-2s) = 7 at N=2, s=0.75 sits exactly on the bound
    model = limit_model(M=64, p=7.0)
    with pytest.raises(sv.SolverError, match=r"f1\.3"):
        sv.solve_ground_state(1.0, model, sv.SolveOptions(),
                              sv.gaussian_seed(model.grid))
    wopts = sv.SolveOptions(tol_residual=1e6, max_iters=1,
                            allow_critical=True)
    res = sv.solve_ground_state(1.0, model, wopts,
                                sv.gaussian_seed(model.grid))
    assert res.diagnostics["critical_growth_waived"] is True


def test_build_dictionary_invariants(ctx):
    d = ctx.limit_dictionary(256)
    assert len(d.entries) == 3
    levels = [a for a, _ in d.entries]
    assert levels == pytest.approx([1.0, 1.1, 1.2])
    assert all(res.converged for _, res in d.entries)
    # r* recomputes as the least entry norm
    norms = [sp.hs_norm_gagliardo(res.field) for _, res in d.entries]
    assert d.r_star == pytest.approx(min(norms), rel=1e-12)
    assert d.r_star > 0
    # R0 bounds every tail by r*/8
    g = d.grid
    origin = (0.0,) * g.N
    for U in d.profiles:
        outside = ball(g, origin, d.R0).complement()
        assert sp.restricted_norm(U, outside) < d.r_star / 8.0
    assert 0 < d.R0 < g.L
    # least energy increases with the mass constant
    energies = [res.energy.total for _, res in d.entries]
    assert energies[0] < energies[1] < energies[2]


def test_build_dictionary_degenerate_and_guards():
    model = limit_model(M=64)
    opts = sv.SolveOptions()
    d = sv.build_dictionary(model, nu0=0.0, n_samples=1, opts=opts)
    assert len(d.entries) == 1
    assert d.entries[0][0] == 1.0
    with pytest.raises(sv.SolverError):
        sv.build_dictionary(model, nu0=0.2, n_samples=1, opts=opts)
    with pytest.raises(sv.SolverError):
        sv.build_dictionary(model, nu0=0.2, n_samples=0, opts=opts)
    with pytest.raises(sv.SolverError):
        sv.build_dictionary(model, nu0=-0.1, n_samples=2, opts=opts)


def test_solve_penalized_ring(ctx):
    model = ring_model()
    pp = ctx.proof_params()
    seed = sv.gaussian_seed(model.grid, center=(3.75, 0.0))
    res = sv.solve_penalized(0.4, seed, model, pp, sv.SolveOptions())
    assert res.converged
    # minimizer keeps its mass in the scaled well: penalty exactly zero
    assert res.diagnostics["penalty_value"] == 0.0
    assert res.diagnostics["penalty_exactly_zero"] is True
    assert res.diagnostics["eps"] == 0.4
    assert res.diagnostics["constraint"] == "nehari"
    energies = [row[1] for row in res.iterates]
    for e0, e1 in zip(energies, energies[1:]):
        assert e1 <= e0 + 1e-12 * abs(e0)
    # never recentered: the bump stays at the scaled ring radius
    assert np.hypot(*res.barycenter) == pytest.approx(3.75, abs=0.2)
    with pytest.raises(sv.SolverError):
        sv.solve_penalized(0.0, seed, model, pp, sv.SolveOptions())


def test_potential_free_penalized_reduces_to_limit(ctx):
    model = limit_model()
    pp = ctx.proof_params()
    opts = sv.SolveOptions()
    seed = sv.gaussian_seed(model.grid)
    pen = sv.solve_penalized(0.3, seed, model, pp, opts)
    gs = sv.solve_ground_state(1.0, model, opts, seed)
    assert pen.converged
    assert pen.diagnostics["penalty_exactly_zero"] is True
    assert abs(pen.energy.total - gs.energy.total) <= 1e-3


def test_multistart_order_failures_determinism(ctx):
    model = ring_model()
    pp = ctx.proof_params()
    opts = sv.SolveOptions()
    g = model.grid
    s1 = sv.gaussian_seed(g, center=(3.75, 0.0))
    s2 = sv.gaussian_seed(g, center=(-3.75, 0.0))
    bad = Field(g, np.zeros(g.shape))
    out = sv.multistart(0.4, [s1, bad, s1, s2], model, pp, opts,
                        tags=["p1", "zero", "p1-dup", "p2"])
    assert [type(r).__name__ for r in out] == \
        ["SolveResult", "SolveFailure", "SolveResult", "SolveResult"]
    assert [r.seed_tag for r in out] == ["p1", "zero", "p1-dup", "p2"]
    assert np.array_equal(out[0].field.values, out[2].field.values)
    assert out[0].iterates == out[2].iterates
    # antipodal seeds settle at their own ring points
    assert out[0].barycenter[0] > 3.0
    assert out[3].barycenter[0] < -3.0
    assert sv.multistart(0.4, [], model, pp, opts) == []
    with pytest.raises(sv.SolverError):
        sv.multistart(0.4, [s1], model, pp, opts, tags=["a", "b"])


def test_continuation_schedule(ctx):
    model = ring_model()
    pp = ctx.proof_params()
    opts = sv.SolveOptions()
    seed = sv.gaussian_seed(model.grid, center=(3.75, 0.0))
    chain = sv.continuation([0.4, 0.3], model, pp, opts, seed)
    assert [r.seed_tag for r in chain] == ["eps=0.4", "eps=0.3"]
    assert all(r.converged for r in chain)
    one = sv.continuation([0.4], model, pp, opts, seed)
    direct = sv.solve_penalized(0.4, seed, model, pp, opts)
    assert np.array_equal(one[0].field.values, direct.field.values)
    for bad in ([], [0.4, 0.4], [0.3, 0.4], [0.4, -0.1]):
        with pytest.raises(sv.SolverError):
            sv.continuation(bad, model, pp, opts, seed)


def test_estimate_least_energy():
    model = limit_model(M=64)
    g = model.grid
    opts = sv.SolveOptions()
    seeds = [sv.gaussian_seed(g), sv.gaussian_seed(g, amplitude=2.0)]
    E, best = sv.estimate_least_energy(1.0, model, opts, seeds)
    assert best.converged and E == best.energy.total
    with pytest.raises(sv.SolverError):
        sv.estimate_least_energy(1.0, model, opts,
                                 [Field(g, np.zeros(g.shape))])
