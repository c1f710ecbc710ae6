"""Post-solve analyses: decay fits, tail diagnostics, concentration tables,
sandwich-inequality reports, solution clustering, and the cup-length bound.
"""

from __future__ import annotations

import re
import warnings

import numpy as np

from . import barycenter as bc
from . import functionals as fn
from . import solvers as sv
from . import spectral as sp
from ._kernels import weighted_tail_sum
from .grid import Field, minimum_image_delta
from .model import ModelSpec


class AnalysisError(ValueError):
    """Raised for bad geometry, empty samples, and meaningless fits."""


class PoorFitWarning(UserWarning):
    """Emitted when a decay fit has r^2 below 0.95."""


def _argmax_point(u: Field) -> np.ndarray:
    g = u.grid
    j = np.unravel_index(int(np.argmax(np.abs(u.values))), g.shape)
    return np.array([-g.L + jj * g.h for jj in j])


def _core_radius(u: Field, x0: np.ndarray, fraction: float = 0.9) -> float:
    """Smallest radius around x0 holding the given fraction of the L2 mass."""
    g = u.grid
    mesh = g.mesh()
    d2 = np.zeros(g.shape)
    for ax in range(g.N):
        d = minimum_image_delta(g, mesh[ax] - x0[ax])
        d2 = d2 + d * d
    r = np.sqrt(d2).ravel()
    m = (u.values ** 2).ravel()
    order = np.argsort(r)
    csum = np.cumsum(m[order])
    total = csum[-1]
    if total <= 0:
        return 0.0
    k = int(np.searchsorted(csum, fraction * total))
    return float(r[order[min(k, r.size - 1)]])


def _shell_maxima(r: np.ndarray, vals: np.ndarray, r_min: float,
                  r_max: float, n_shells: int = 24):
    """Max |u| per log-spaced radial shell, with the radius of the max."""
    edges = np.geomspace(r_min, r_max, n_shells + 1)
    which = np.clip(np.searchsorted(edges, r, side="right") - 1, 0,
                    n_shells - 1)
    rs, us = [], []
    for b in range(n_shells):
        sel = which == b
        if not np.any(sel):
            continue
        k = int(np.argmax(vals[sel]))
        rs.append(float(r[sel][k]))
        us.append(float(vals[sel][k]))
    return rs, us


def decay_table(u: Field, r_min: float, r_max: float):
    """Shell-max rows (radius, value) over the annulus, for reports."""
    g = u.grid
    x0 = _argmax_point(u)
    mesh = g.mesh()
    d2 = sum((a - c) ** 2 for a, c in zip(mesh, x0))
    r = np.sqrt(d2).ravel()
    vals = np.abs(u.values).ravel()
    keep = (r >= r_min) & (r <= r_max)
    rs, us = _shell_maxima(r[keep], vals[keep], r_min, r_max)
    return [{"radius": a, "shell_max": b} for a, b in zip(rs, us)]


def fit_decay_exponent(u: Field, r_min: float, r_max: float):
    """Least-squares decay exponent from shell maxima of |u|.

    Returns (slope, intercept, r_squared) for log(max_shell |u|) against
    log r over the annulus r_min <= r <= r_max around the field's maximum.
    Shell maxima track the pointwise upper envelope, which is what a
    two-sided polynomial bound controls. Fits with r_squared < 0.95 raise
    PoorFitWarning; they are never reported silently.

    Preconditions: r_max <= 0.6 L (periodic contamination guard) and
    r_min at least three core radii out, the core radius being the radius
    holding 90 percent of the squared mass.
    """
    g = u.grid
    if not (0 < r_min < r_max):
        raise AnalysisError("need 0 < r_min < r_max")
    if r_max > 0.6 * g.L:
        raise AnalysisError(
            f"r_max={r_max:g} exceeds 0.6 L = {0.6 * g.L:g}; the annulus "
            "would pick up periodic images")
    x0 = _argmax_point(u)
    core = _core_radius(u, x0)
    if r_min < 3.0 * core - 1e-12:
        raise AnalysisError(
            f"r_min={r_min:g} is inside 3 core radii = {3.0 * core:g}; "
            "the fit region must exclude the core")
    mesh = g.mesh()
    d2 = sum((a - c) ** 2 for a, c in zip(mesh, x0))
    r = np.sqrt(d2).ravel()
    vals = np.abs(u.values).ravel()
    keep = (r >= r_min) & (r <= r_max)
    if not np.any(keep):
        raise AnalysisError("annulus contains no grid points")
    r = r[keep]
    vals = vals[keep]
    if vals.max() < 1e-14:
        raise AnalysisError(
            "field is below 1e-14 throughout the annulus; decay fit is "
            "meaningless")
    rs, us = _shell_maxima(r, vals, r_min, r_max)
    if len(rs) < 3:
        raise AnalysisError("annulus is too thin: fewer than 3 shells")
    x = np.log(np.asarray(rs))
    y = np.log(np.maximum(np.asarray(us), 1e-300))
    A = np.vstack([x, np.ones_like(x)]).T
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    pred = A @ np.array([slope, intercept])
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r_sq = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    if r_sq < 0.95:
        warnings.warn(
            f"decay fit has r^2 = {r_sq:.3f} < 0.95; the annulus values do "
            "not follow a single power law", PoorFitWarning, stacklevel=2)
    return float(slope), float(intercept), float(r_sq)


def tail(u: Field, x0, R: float) -> float:
    """Tail functional (1-s) R^(2s) sum_{|x-x0|>R} |u| / |x-x0|^(N+2s) h^N.

    Distances are minimum-image; the ball B_R(x0) must fit inside the box.
    """
    g = u.grid
    x0 = np.atleast_1d(np.asarray(x0, dtype=np.float64))
    if x0.shape != (g.N,):
        raise AnalysisError(f"x0 must have {g.N} components")
    if R <= 0:
        raise AnalysisError(f"R must be positive, got {R}")
    if np.any(x0 - R < -g.L) or np.any(x0 + R > g.L):
        raise AnalysisError("ball B_R(x0) does not fit inside the box")
    mesh = g.mesh()
    d2 = np.zeros(g.shape)
    for ax in range(g.N):
        d = minimum_image_delta(g, mesh[ax] - x0[ax])
        d2 = d2 + d * d
    outside = (d2 > R * R).ravel()
    idx = np.nonzero(outside)[0]
    if idx.size == 0:
        return 0.0
    absu = np.abs(u.values).ravel()
    coords = np.stack([c.ravel() for c in mesh])
    power = g.N + 2.0 * g.s
    total = weighted_tail_sum(absu, idx, coords, x0, 2.0 * g.L, power)
    return float((1.0 - g.s) * R ** (2.0 * g.s) * total * g.cell_volume)


def _dist_to_wells(point_v_frame: np.ndarray, model: ModelSpec) -> float:
    """Distance from a potential-frame point to the well floor set."""
    if model.potential is None:
        return 0.0
    pts = np.asarray(model.potential.k_points, dtype=np.float64)
    d = np.sqrt(np.sum((pts - point_v_frame) ** 2, axis=1))
    return float(np.min(d))


def concentration_report(results, model: ModelSpec, dictionary=None,
                         cfg: bc.BarycenterConfig | None = None):
    """Concentration table across an eps schedule.

    One row per converged result: eps, the max point x_eps (solve frame),
    the distance of eps x_eps to the well set, eps Upsilon (when a
    dictionary and config are supplied), the penalty value, and the L2
    distance between this recentered profile and the previous one.
    """
    rows = []
    prev = None
    for res in results:
        if not res.converged:
            raise AnalysisError(
                f"result '{res.seed_tag}' did not converge; the report "
                "requires converged inputs")
        eps = res.diagnostics.get("eps")
        if eps is None:
            raise AnalysisError(
                f"result '{res.seed_tag}' carries no eps diagnostic")
        u = res.field
        x_eps = _argmax_point(u)
        d_K = _dist_to_wells(eps * x_eps, model)
        q_val = float(res.diagnostics.get("penalty_value", 0.0))
        recentered = sv.recenter_field(u)
        if prev is None:
            profile_dist = float("nan")
        else:
            profile_dist = sp.l2_norm(
                Field(u.grid, recentered.values - prev.values))
        prev = recentered
        row = {
            "eps": float(eps),
            **{f"x_eps_{ax}": float(x_eps[ax]) for ax in range(u.grid.N)},
            "dist_K": d_K,
            "penalty": q_val,
            "profile_dist": profile_dist,
        }
        if dictionary is not None and cfg is not None:
            ups = bc.upsilon(u, dictionary, cfg)
            for ax in range(u.grid.N):
                row[f"eps_upsilon_{ax}"] = float(eps * ups[ax])
        rows.append(row)
    return rows


def sandwich_check(U0: Field, model: ModelSpec, params: fn.ProofParams,
                   eps: float, samples):
    """Evaluate the embedding energies J_eps(Phi_eps(t, p)) on a sample.

    Every sample must satisfy the upper inequality J < E + delta_hat; the
    slice t = 1 +- sigma0 must additionally sit below E - delta_hat. The
    report carries per-row margins and the deviation |J - g(t) E|, plus
    the separation between interior (t = 1) and boundary rows.

    delta_hat must be admissible: smaller than (1 - g(1 +- sigma0))/2
    times the ground energy, for both signs.
    """
    g = U0.grid
    a = model.mass if model.potential is None else model.potential.m0
    E = fn.energy_limit(U0, a, model.nonlinearity).total
    sig = params.sigma0
    dhat = params.delta_hat
    cap = min((1.0 - fn.g_of(1.0 - sig, g.N, g.s)) / 2.0 * E,
              (1.0 - fn.g_of(1.0 + sig, g.N, g.s)) / 2.0 * E)
    if not (0 < dhat < cap):
        raise AnalysisError(
            f"delta_hat={dhat:g} is inadmissible: needs 0 < delta_hat < "
            f"{cap:g} = min over signs of (1 - g(1 +- sigma0))/2 * E")
    rows = []
    interior = []
    boundary = []
    for t, p in samples:
        u = bc.phi_eps(float(t), p, U0, eps)
        J = fn.energy_penalized(u, eps, params, model).total
        dev = abs(J - fn.g_of(float(t), g.N, g.s) * E)
        upper_margin = (E + dhat) - J
        row = {
            "t": float(t),
            **{f"p_{ax}": float(np.atleast_1d(p)[ax]) for ax in range(g.N)},
            "J": float(J),
            "deviation": float(dev),
            "upper_margin": float(upper_margin),
        }
        on_boundary = (abs(t - (1.0 - sig)) < 1e-12
                       or abs(t - (1.0 + sig)) < 1e-12)
        if on_boundary:
            row["boundary_margin"] = float((E - dhat) - J)
            boundary.append(float(J))
        if abs(t - 1.0) < 1e-12:
            interior.append(float(J))
        rows.append(row)
    report = {
        "energy": float(E),
        "delta_hat": float(dhat),
        "eps": float(eps),
        "rows": rows,
        "upper_ok": all(r["upper_margin"] > 0 for r in rows),
        "boundary_ok": all(r.get("boundary_margin", 1.0) > 0 for r in rows),
        "max_deviation": max(r["deviation"] for r in rows) if rows else 0.0,
    }
    if interior and boundary:
        sep = min(interior) - max(boundary)
        report["separation"] = float(sep)
        report["separation_ok"] = bool(sep >= 2.0 * dhat)
    return report


def _translation_min_distance(a: Field, b: Field) -> float:
    """Translation-minimized H^s distance between two fields."""
    return fn.minimal_radius(a, [b])


def cluster_solutions(results, dictionary=None, tol_energy: float = 1e-3,
                      tol_distance: float | None = None,
                      tol_position: float = 1.0,
                      symmetry: str | None = None):
    """Partition converged results into solution classes.

    Two results join the same class when their energies agree within
    tol_energy, their translation-minimized H^s distance is within
    tol_distance, and their mass barycenters agree within tol_position,
    the last after an optional symmetry quotient: "rotation" compares
    barycenter radii, "reflection" compares the absolute first coordinate.
    Without a quotient the raw positions are compared, so profiles parked
    at different wells stay distinct. Returns a list of index lists
    forming a partition of the inputs.

    tol_distance defaults to the dictionary's tube radius r*/2 (fields in
    one tube are one class; off-lattice offsets carry an alignment
    distance far above round-off), or 0.5 without a dictionary.
    """
    if symmetry not in (None, "rotation", "reflection"):
        raise AnalysisError(f"unknown symmetry quotient: {symmetry!r}")
    if tol_distance is None:
        tol_distance = (dictionary.r_star / 2.0 if dictionary is not None
                        else 0.5)
    n = len(results)
    for res in results:
        if not res.converged:
            raise AnalysisError("clustering requires converged results")

    def reduced(xbc):
        v = np.asarray(xbc, dtype=np.float64)
        if symmetry == "rotation":
            return np.array([np.sqrt(np.sum(v * v))])
        if symmetry == "reflection":
            return np.concatenate([[abs(v[0])], v[1:]])
        return v

    coords = [reduced(r.barycenter) for r in results]
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(results[i].energy.total
                   - results[j].energy.total) > tol_energy:
                continue
            if np.max(np.abs(coords[i] - coords[j])) > tol_position:
                continue
            d = _translation_min_distance(results[i].field, results[j].field)
            if d > tol_distance:
                continue
            parent[find(i)] = find(j)
    classes: dict[int, list[int]] = {}
    for i in range(n):
        classes.setdefault(find(i), []).append(i)
    return [sorted(v) for v in sorted(classes.values(), key=lambda c: c[0])]


def cupl_plus_one(shape: str) -> int:
    """Lower bound cupl(K) + 1 on the solution count for standard shapes.

    Accepted shapes: "point", "contractible", "two_points", "sphere(k)"
    with k >= 1, and "torus(n)" with n >= 1.
    """
    token = shape.strip().lower()
    if token in ("point", "contractible"):
        return 1
    if token == "two_points":
        return 2
    m = re.fullmatch(r"sphere\((\d+)\)", token)
    if m:
        k = int(m.group(1))
        if k < 1:
            raise AnalysisError("sphere dimension must be at least 1")
        return 2
    m = re.fullmatch(r"torus\((\d+)\)", token)
    if m:
        nn = int(m.group(1))
        if nn < 1:
            raise AnalysisError("torus dimension must be at least 1")
        return nn + 1
    raise AnalysisError(f"unknown shape: {shape!r}")
