"""Nonlinearities, trapping potentials, and assumption validators.

Nonlinearities are clamped (f(t) = 0 for t <= 0) with primitive F. The
validator samples the standing assumptions and reports one tagged check per
condition: continuity (f1.1), superlinearity at the origin (f1.2), strict
subcritical growth (f1.3), the energy witness F(t0) > a t0^2 / 2 (f1.4),
the sign convention (f2), and a sampled Hoelder quotient when s <= 1/2 (f3).
Potentials are bounded, positive (V1), and trap over a well domain whose
boundary values exceed the well infimum m0 (V2).
"""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .grid import Field, GridSpec, Region, region_where


class ModelError(ValueError):
    """Raised for invalid model data."""


def sobolev_critical(N: int, s: float) -> float:
    """Critical exponent 2N/(N - 2s); defined only for N > 2s."""
    if N <= 2 * s:
        raise ModelError(f"critical exponent undefined for N={N}, s={s} (N <= 2s)")
    return 2.0 * N / (N - 2.0 * s)


@dataclass(frozen=True)
class NonlinearitySpec:
    """Nonlinearity f with primitive F and declared growth exponent p.

    kind is "power" for f(t) = (t_+)^p or "tabulated" for interpolated
    sample data. t0 is the witness point for the energy condition (f1.4).
    Evaluators are pure, vectorized, and clamp to zero for t <= 0.
    """
    kind: str
    p: float
    f: Callable[[np.ndarray], np.ndarray]
    F: Callable[[np.ndarray], np.ndarray]
    t0: float
    t_max: float = 100.0

    def __post_init__(self):
        if self.kind not in ("power", "tabulated"):
            raise ModelError(f"unknown nonlinearity kind {self.kind!r}")
        if not np.isfinite(self.p) or self.p <= 1.0:
            raise ModelError(f"growth exponent must exceed 1, got {self.p}")
        if self.t0 <= 0:
            raise ModelError(f"witness point t0 must be positive, got {self.t0}")


def power_nonlinearity(p: float, t0: float = 10.0) -> NonlinearitySpec:
    """Clamped power nonlinearity f(t) = (t_+)^p, F(t) = (t_+)^(p+1)/(p+1)."""

    def f(t):
        tp = np.maximum(np.asarray(t, dtype=np.float64), 0.0)
        return tp ** p

    def F(t):
        tp = np.maximum(np.asarray(t, dtype=np.float64), 0.0)
        return tp ** (p + 1.0) / (p + 1.0)

    return NonlinearitySpec(kind="power", p=p, f=f, F=F, t0=t0)


def tabulated_nonlinearity(t_table: np.ndarray, f_table: np.ndarray,
                           p: float, t0: float | None = None) -> NonlinearitySpec:
    """Nonlinearity interpolated from (t, f(t)) samples.

    The table must start at t = 0 with f(0) = 0 and be strictly increasing
    in t. Values are clamped to zero for t <= 0 and held at the last sample
    beyond the table; F is the cumulative trapezoid of the table, continued
    linearly past the end.
    """
    t_table = np.asarray(t_table, dtype=np.float64)
    f_table = np.asarray(f_table, dtype=np.float64)
    if t_table.ndim != 1 or t_table.shape != f_table.shape or t_table.size < 4:
        raise ModelError("table needs matching 1-d t and f columns, >= 4 rows")
    if not (np.all(np.isfinite(t_table)) and np.all(np.isfinite(f_table))):
        raise ModelError("table contains non-finite entries")
    if t_table[0] != 0.0 or f_table[0] != 0.0:
        raise ModelError("table must start at t = 0 with f(0) = 0")
    if np.any(np.diff(t_table) <= 0):
        raise ModelError("table t column must be strictly increasing")
    F_table = np.concatenate(([0.0], cumulative_trapezoid(f_table, t_table)))
    t_end, f_end, F_end = t_table[-1], f_table[-1], F_table[-1]

    def f(t):
        t = np.asarray(t, dtype=np.float64)
        return np.interp(np.maximum(t, 0.0), t_table, f_table)

    def F(t):
        t = np.asarray(t, dtype=np.float64)
        tc = np.maximum(t, 0.0)
        out = np.interp(tc, t_table, F_table)
        over = tc > t_end
        if np.any(over):
            out = np.where(over, F_end + f_end * (tc - t_end), out)
        return out

    if t0 is None:
        t0 = 0.75 * t_end
    return NonlinearitySpec(kind="tabulated", p=p, f=f, F=F, t0=t0,
                            t_max=float(t_end))


@dataclass(frozen=True)
class ConditionCheck:
    tag: str
    description: str
    passed: bool
    measured: float | None = None
    tolerance: float | None = None
    note: str = ""

    def line(self) -> str:
        mark = "pass" if self.passed else "FAIL"
        extra = ""
        if self.measured is not None:
            extra = f" measured={self.measured:.6g}"
            if self.tolerance is not None:
                extra += f" tol={self.tolerance:.6g}"
        if self.note:
            extra += f" ({self.note})"
        return f"[{mark}] ({self.tag}) {self.description}{extra}"


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[ConditionCheck, ...]

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failed_tags(self) -> tuple[str, ...]:
        return tuple(c.tag for c in self.checks if not c.passed)

    def summary(self) -> str:
        return "\n".join(c.line() for c in self.checks)

    def merge(self, other: "ValidationReport") -> "ValidationReport":
        return ValidationReport(self.checks + other.checks)


def _eval_f(spec: NonlinearitySpec, t: np.ndarray) -> np.ndarray:
    try:
        out = np.asarray(spec.f(t), dtype=np.float64)
    except Exception as exc:
        raise ModelError(f"nonlinearity evaluator failed: {exc}") from exc
    if not np.all(np.isfinite(out)):
        raise ModelError("nonlinearity evaluator produced non-finite values")
    return out


def validate_nonlinearity(spec: NonlinearitySpec, a: float,
                          N: int | None = None,
                          s: float | None = None) -> ValidationReport:
    """Sample the standing assumptions on f and report per-condition checks.

    a > 0 is the mass constant entering the energy witness (f1.4). N and s,
    when given, bound the admissible growth in (f1.3) by the critical
    exponent; the Hoelder check (f3) runs when s <= 1/2.
    """
    if a <= 0:
        raise ModelError(f"mass constant must be positive, got {a}")
    checks = []
    t_hi = spec.t_max if spec.kind == "tabulated" else max(10.0, 2.0 * spec.t0)

    t = np.linspace(-t_hi, t_hi, 4001)
    fv = _eval_f(spec, t)
    steps = np.abs(np.diff(fv))
    scale = max(np.max(np.abs(fv)), 1.0)
    jump = float(np.max(steps) / scale)
    checks.append(ConditionCheck(
        tag="f1.1", description="f continuous on sampled lattice",
        passed=jump < 0.05, measured=jump, tolerance=0.05,
        note="largest relative step between adjacent samples"))

    t_small = spec.t0 * 10.0 ** (-np.arange(1.0, 9.0))
    t_small = t_small[t_small > 0]
    q_small = _eval_f(spec, t_small) / t_small
    drop = float(q_small[-1] / max(q_small[0], 1e-300))
    mono = bool(np.all(np.diff(q_small) <= 1e-9 * max(q_small[0], 1.0)))
    checks.append(ConditionCheck(
        tag="f1.2", description="f(t)/t vanishes as t -> 0+",
        passed=mono and (drop <= 0.9 or q_small[-1] < 1e-10),
        measured=float(q_small[-1]), tolerance=None,
        note="quotient on a shrinking sample, must keep decreasing"))

    if N is not None and s is not None and N > 2 * s:
        p_crit = sobolev_critical(N, s) - 1.0
        declared_ok = 1.0 < spec.p < p_crit
        t_big = np.geomspace(max(1.0, spec.t0 / 10.0), t_hi, 9)
        q_big = _eval_f(spec, t_big) / t_big ** p_crit
        vanish = bool(q_big[-1] <= 0.95 * max(q_big[0], 1e-300)
                      or q_big[-1] < 1e-10)
        checks.append(ConditionCheck(
            tag="f1.3",
            description=f"strict subcritical growth, 1 < p < {p_crit:.6g}",
            passed=declared_ok and vanish, measured=spec.p, tolerance=p_crit,
            note="declared exponent and f(t)/t^(p_crit) on a growing sample"))
    else:
        checks.append(ConditionCheck(
            tag="f1.3", description="subcritical growth",
            passed=spec.p > 1.0, measured=spec.p,
            note="no critical exponent for N <= 2s; only p > 1 required"))

    try:
        F0 = float(np.asarray(spec.F(spec.t0)))
    except Exception as exc:
        raise ModelError(f"primitive evaluator failed: {exc}") from exc
    if not np.isfinite(F0):
        raise ModelError("primitive evaluator produced non-finite values")
    bound = 0.5 * a * spec.t0 ** 2
    checks.append(ConditionCheck(
        tag="f1.4", description="F(t0) exceeds a*t0^2/2",
        passed=F0 > bound, measured=F0, tolerance=bound,
        note=f"t0={spec.t0:.6g}"))

    t_neg = np.linspace(-t_hi, 0.0, 501)
    worst = float(np.max(np.abs(_eval_f(spec, t_neg))))
    checks.append(ConditionCheck(
        tag="f2", description="f vanishes on t <= 0",
        passed=worst == 0.0, measured=worst, tolerance=0.0))

    if s is not None and s <= 0.5:
        gamma = 1.0 - s
        tt = np.linspace(0.0, min(t_hi, 10.0), 401)
        fv2 = _eval_f(spec, tt)
        i, j = np.triu_indices(tt.size, k=1)
        quot = np.abs(fv2[i] - fv2[j]) / np.abs(tt[i] - tt[j]) ** gamma
        hmax = float(np.max(quot))
        checks.append(ConditionCheck(
            tag="f3",
            description=f"sampled Hoelder quotient bounded, gamma={gamma:.3g}",
            passed=np.isfinite(hmax) and hmax < 1e6, measured=hmax,
            tolerance=1e6,
            note="sampling cannot certify local Hoelder continuity"))
    else:
        checks.append(ConditionCheck(
            tag="f3", description="Hoelder regularity",
            passed=True, note="not required for s > 1/2"))

    return ValidationReport(tuple(checks))


def growth_bound_check(spec: NonlinearitySpec, beta: float, q: float) -> float:
    """Smallest sampled constant C with |f(t)| <= beta|t| + C|t|^q.

    Returns sup over a dense positive sample of (|f(t)| - beta|t|)_+ / |t|^q.
    """
    if beta <= 0:
        raise ModelError(f"beta must be positive, got {beta}")
    if q < spec.p:
        raise ModelError(f"q must be >= p ({spec.p}), got {q}")
    t_hi = spec.t_max if spec.kind == "tabulated" else max(10.0, 2.0 * spec.t0)
    t = np.geomspace(1e-6, t_hi, 600)
    fv = np.abs(_eval_f(spec, t))
    c = np.maximum(fv - beta * t, 0.0) / t ** q
    cmax = float(np.max(c))
    if not np.isfinite(cmax) or cmax > 1e12:
        raise ModelError("divergent growth quotient; exponent bound violated")
    return cmax


@dataclass(frozen=True)
class PotentialSpec:
    """Bounded positive potential with trapping-well data.

    evaluator maps a tuple of coordinate arrays to V values. well is the
    sub-level region {V < m0 + boundary_margin}; k_points samples the
    minimizer set K (shape (n, N)); V > m0 strictly off K's tolerance tube.
    """
    evaluator: Callable
    vmin: float
    vmax: float
    well: Region
    m0: float
    boundary_margin: float
    k_points: np.ndarray
    h0: float
    tol_K: float = 1e-9
    label: str = "potential"

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.k_points, dtype=np.float64))
        object.__setattr__(self, "k_points", pts)

    @property
    def grid(self) -> GridSpec:
        return self.well.grid

    def sample(self, grid: GridSpec | None = None) -> Field:
        g = self.grid if grid is None else grid
        vals = np.broadcast_to(
            np.asarray(self.evaluator(g.mesh()), dtype=np.float64),
            g.shape).copy()
        return Field(g, vals)

    def at(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        coords = tuple(pts[:, ax] for ax in range(pts.shape[1]))
        return np.asarray(self.evaluator(coords), dtype=np.float64)


def _well_region(grid: GridSpec, evaluator, threshold: float,
                 label: str) -> Region:
    vals = np.broadcast_to(
        np.asarray(evaluator(grid.mesh()), dtype=np.float64), grid.shape)
    return region_where(grid, vals < threshold, label=label)


def make_ring_potential(grid: GridSpec, m0: float, depth: float,
                        radius: float, cap: float,
                        width: float | None = None,
                        n_k: int = 256) -> PotentialSpec:
    """Ring-shaped well: V = m0 + depth*min(1, (|x|-radius)^2/width^2).

    The minimizer set K is the sphere |x| = radius, sampled at n_k points.
    Requires N >= 2 for a genuine ring; N = 1 degenerates to two points.
    """
    if m0 <= 0 or depth <= 0 or radius <= 0:
        raise ModelError("m0, depth, radius must be positive")
    if cap < m0 + depth:
        raise ModelError(f"cap must be >= m0 + depth = {m0 + depth}")
    if width is None:
        width = radius / 2.0
    if width <= 0:
        raise ModelError("width must be positive")
    outer = radius + width
    if outer + width >= grid.L:
        raise ModelError(
            f"ring of outer radius {outer:.3g} does not fit inside the box "
            f"(L = {grid.L}); enlarge L or shrink the ring")

    def evaluator(mesh):
        r = np.sqrt(sum(np.asarray(c, dtype=np.float64) ** 2 for c in mesh))
        return m0 + depth * np.minimum(1.0, ((r - radius) / width) ** 2)

    well = _well_region(grid, evaluator, m0 + depth / 2.0, "ring well")
    if grid.N == 1:
        k_points = np.array([[-radius], [radius]])
    else:
        theta = 2.0 * np.pi * np.arange(n_k) / n_k
        k_points = np.zeros((n_k, grid.N))
        k_points[:, 0] = radius * np.cos(theta)
        k_points[:, 1] = radius * np.sin(theta)
    return PotentialSpec(evaluator=evaluator, vmin=m0, vmax=m0 + depth,
                         well=well, m0=m0, boundary_margin=depth / 2.0,
                         k_points=k_points, h0=width / 2.0,
                         label="ring potential")


def make_double_well(grid: GridSpec, m0: float, depth: float,
                     separation: float, cap: float,
                     width: float | None = None) -> PotentialSpec:
    """Two-point well with minimizers at +/- separation * e1.

    V = m0 + depth*min(1, |x-p|^2 |x+p|^2 / width^4) for p = separation*e1.
    """
    if m0 <= 0 or depth <= 0 or separation <= 0:
        raise ModelError("m0, depth, separation must be positive")
    if cap < m0 + depth:
        raise ModelError(f"cap must be >= m0 + depth = {m0 + depth}")
    if width is None:
        width = separation / 2.0
    if width <= 0:
        raise ModelError("width must be positive")
    if separation + width >= grid.L:
        raise ModelError("wells do not fit inside the box; enlarge L")

    def evaluator(mesh):
        mesh = [np.asarray(c, dtype=np.float64) for c in mesh]
        d1 = (mesh[0] - separation) ** 2
        d2 = (mesh[0] + separation) ** 2
        for c in mesh[1:]:
            d1 = d1 + c ** 2
            d2 = d2 + c ** 2
        return m0 + depth * np.minimum(1.0, d1 * d2 / width ** 4)

    well = _well_region(grid, evaluator, m0 + depth / 2.0, "double well")
    k_points = np.zeros((2, grid.N))
    k_points[0, 0] = -separation
    k_points[1, 0] = separation
    return PotentialSpec(evaluator=evaluator, vmin=m0, vmax=m0 + depth,
                         well=well, m0=m0, boundary_margin=depth / 2.0,
                         k_points=k_points, h0=width / 2.0,
                         label="double well")


def validate_potential(spec: PotentialSpec) -> ValidationReport:
    """Check positivity/boundedness (V1), the trapping margin (V2), and
    that sampled K points minimize V inside the well."""
    g = spec.grid
    field = spec.sample()
    vmin_obs = float(np.min(field.values))
    vmax_obs = float(np.max(field.values))
    checks = [ConditionCheck(
        tag="V1", description="0 < vmin <= V <= vmax on the grid",
        passed=vmin_obs > 0 and vmin_obs >= spec.vmin - 1e-12
        and vmax_obs <= spec.vmax + 1e-12,
        measured=vmin_obs, tolerance=spec.vmin)]

    mask = spec.well.mask
    grown = mask.copy()
    for ax in range(g.N):
        grown = grown | np.roll(mask, 1, axis=ax) | np.roll(mask, -1, axis=ax)
    boundary = grown & ~mask
    if not np.any(boundary):
        checks.append(ConditionCheck(
            tag="V2", description="well boundary margin",
            passed=False, note="well has no sampled boundary"))
    else:
        inf_boundary = float(np.min(field.values[boundary]))
        checks.append(ConditionCheck(
            tag="V2", description="inf over well boundary of V exceeds m0",
            passed=inf_boundary > spec.m0, measured=inf_boundary - spec.m0,
            tolerance=0.0, note="margin above m0"))

    vk = spec.at(spec.k_points)
    dev = float(np.max(np.abs(vk - spec.m0)))
    inside = []
    for pt in spec.k_points:
        idx = tuple(int(round((c + g.L) / g.h)) % g.M for c in pt)
        inside.append(bool(mask[idx]))
    checks.append(ConditionCheck(
        tag="K", description="sampled minimizers lie in the well at level m0",
        passed=all(inside) and dev <= spec.tol_K, measured=dev,
        tolerance=spec.tol_K))
    return ValidationReport(tuple(checks))


@dataclass(frozen=True)
class ModelSpec:
    """Complete problem data: grid, nonlinearity, optional potential.

    mass is the constant a of the frozen-coefficient problem; it defaults
    to the potential's well level m0 when a potential is present.
    """
    grid: GridSpec
    nonlinearity: NonlinearitySpec
    potential: PotentialSpec | None = None
    mass: float | None = None

    def __post_init__(self):
        if self.mass is None and self.potential is None:
            raise ModelError("model needs a potential or an explicit mass")
        if self.mass is None:
            object.__setattr__(self, "mass", self.potential.m0)
        if self.mass <= 0:
            raise ModelError(f"mass must be positive, got {self.mass}")
        if self.potential is not None and self.potential.grid != self.grid:
            raise ModelError("potential was sampled on a different grid")

    def validate(self) -> ValidationReport:
        report = validate_nonlinearity(self.nonlinearity, self.mass,
                                       N=self.grid.N, s=self.grid.s)
        if self.potential is not None:
            report = report.merge(validate_potential(self.potential))
            margin = 2.0 * self.potential.h0
            mask = self.potential.well.mask
            fits = True
            for ax in range(self.grid.N):
                edge = int(np.ceil(margin / self.grid.h))
                idx = np.nonzero(np.any(
                    mask, axis=tuple(a for a in range(self.grid.N) if a != ax)))[0]
                if idx.size and (idx.min() < edge or
                                 idx.max() >= self.grid.M - edge):
                    fits = False
            report = report.merge(ValidationReport((ConditionCheck(
                tag="domain",
                description="well fits inside the box with margin 2*h0",
                passed=fits, measured=margin),)))
        return report


def read_model(path: str | Path) -> ModelSpec:
    """Load a model from a structured-text file.

    Sections: [grid] N, M, L, s; [nonlinearity] kind, p, t0, table (CSV path
    for tabulated kind); [potential] kind (ring | double-well | none), m0,
    depth, radius or separation, cap, width; mass overrides m0 when given.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"model file not found: {path}")
    cp = configparser.ConfigParser()
    try:
        cp.read(path)
    except configparser.Error as exc:
        raise ModelError(f"malformed model file {path}: {exc}") from exc
    try:
        gsec = cp["grid"]
        grid = GridSpec(N=gsec.getint("N"), M=gsec.getint("M"),
                        L=gsec.getfloat("L"), s=gsec.getfloat("s"))
        nsec = cp["nonlinearity"]
        kind = nsec.get("kind", "power").strip()
        if kind == "power":
            nl = power_nonlinearity(nsec.getfloat("p"),
                                    t0=nsec.getfloat("t0", 10.0))
        elif kind == "tabulated":
            table_path = path.parent / nsec.get("table")
            data = np.loadtxt(table_path, delimiter=",", dtype=np.float64)
            nl = tabulated_nonlinearity(data[:, 0], data[:, 1],
                                        p=nsec.getfloat("p"),
                                        t0=nsec.getfloat("t0", None))
        else:
            raise ModelError(f"unknown nonlinearity kind {kind!r}")
        pot = None
        mass = None
        if cp.has_section("potential"):
            psec = cp["potential"]
            pkind = psec.get("kind", "none").strip()
            if pkind == "ring":
                pot = make_ring_potential(
                    grid, m0=psec.getfloat("m0"), depth=psec.getfloat("depth"),
                    radius=psec.getfloat("radius"), cap=psec.getfloat("cap"),
                    width=psec.getfloat("width", None))
            elif pkind in ("double-well", "doublewell"):
                pot = make_double_well(
                    grid, m0=psec.getfloat("m0"), depth=psec.getfloat("depth"),
                    separation=psec.getfloat("separation"),
                    cap=psec.getfloat("cap"),
                    width=psec.getfloat("width", None))
            elif pkind == "none":
                mass = psec.getfloat("m0")
            else:
                raise ModelError(f"unknown potential kind {pkind!r}")
            if psec.get("mass", None) is not None:
                mass = psec.getfloat("mass")
        return ModelSpec(grid=grid, nonlinearity=nl, potential=pot, mass=mass)
    except (KeyError, configparser.Error) as exc:
        raise ModelError(f"model file {path} missing required data: {exc}") from exc
    except ValueError as exc:
        if isinstance(exc, ModelError):
            raise
        raise ModelError(f"model file {path} has invalid values: {exc}") from exc


def write_model(spec: ModelSpec, path: str | Path) -> None:
    """Persist a model to the structured-text format read by read_model.

    Only power nonlinearities and factory potentials round-trip; tabulated
    data keeps its CSV alongside.
    """
    cp = configparser.ConfigParser()
    g = spec.grid
    cp["grid"] = {"N": str(g.N), "M": str(g.M), "L": repr(g.L), "s": repr(g.s)}
    nl = spec.nonlinearity
    if nl.kind != "power":
        raise ModelError("only power nonlinearities can be persisted here")
    cp["nonlinearity"] = {"kind": nl.kind, "p": repr(nl.p), "t0": repr(nl.t0)}
    psec = {}
    if spec.potential is None:
        psec = {"kind": "none", "m0": repr(spec.mass)}
    else:
        pot = spec.potential
        if pot.label == "ring potential":
            r = float(np.sqrt(np.sum(pot.k_points[0] ** 2)))
            psec = {"kind": "ring", "m0": repr(pot.m0),
                    "depth": repr(pot.vmax - pot.m0), "radius": repr(r),
                    "cap": repr(pot.vmax), "width": repr(2.0 * pot.h0)}
        elif pot.label == "double well":
            sep = float(abs(pot.k_points[1, 0]))
            psec = {"kind": "double-well", "m0": repr(pot.m0),
                    "depth": repr(pot.vmax - pot.m0),
                    "separation": repr(sep), "cap": repr(pot.vmax),
                    "width": repr(2.0 * pot.h0)}
        else:
            raise ModelError("only factory potentials can be persisted here")
        if spec.mass != pot.m0:
            psec["mass"] = repr(spec.mass)
    cp["potential"] = psec
    with open(path, "w") as fh:
        cp.write(fh)
