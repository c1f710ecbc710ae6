"""Energies, the dilation profile g, penalties, and the minimal-radius map.

The limit energy L_a, its Pohozaev functional P_a, the scaled-potential
energy I_eps, the mass-concentration penalty Q_eps, and the penalized sum
J_eps all live here as plain, oracle-checkable definitions; gradients are
L2 representations. Solvers own preconditioning and fused evaluation paths.
"""

from __future__ import annotations

import configparser
import dataclasses
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

from .grid import (Field, FieldError, GridSpec, Region,
                   minimum_image_delta, region_where)
from .model import ModelSpec, ModelError, NonlinearitySpec
from . import spectral as sp


class FunctionalError(ValueError):
    """Raised for invalid functional evaluations."""


@dataclass(frozen=True)
class EnergyBreakdown:
    """Energy split into quadratic, mass, nonlinear, and penalty parts.

    total = kinetic + mass - potential_term + penalty, with
    kinetic = ||(-Delta)^(s/2) u||^2 / 2, mass = (1/2) int a u^2 (or the
    eps-scaled potential weight), potential_term = int F(u).
    """
    kinetic: float
    mass: float
    potential_term: float
    penalty: float = 0.0

    def __post_init__(self):
        for name in ("kinetic", "mass", "potential_term", "penalty"):
            if not np.isfinite(getattr(self, name)):
                raise FunctionalError(f"non-finite energy part {name}")

    @property
    def total(self) -> float:
        return self.kinetic + self.mass - self.potential_term + self.penalty

    def to_dict(self) -> dict:
        return {"kinetic": self.kinetic, "mass": self.mass,
                "potential_term": self.potential_term,
                "penalty": self.penalty, "total": self.total}


@dataclass(frozen=True)
class ProofParams:
    """User-supplied constants of the concentration argument.

    The underlying existence results assert these constants exist but do
    not pin values; every run records the choices it was handed.
    """
    nu0: float
    nu1: float
    delta_hat: float
    sigma0: float
    rho0: float
    rho1: float
    alpha: float
    h0: float
    R0: float
    r_star: float
    l0: float
    l0_prime: float

    def __post_init__(self):
        if not (0 < self.nu1 < self.nu0):
            raise FunctionalError("need 0 < nu1 < nu0")
        if not (0 < self.rho1 < self.rho0):
            raise FunctionalError("need 0 < rho1 < rho0")
        if not (0 < self.sigma0 < 1):
            raise FunctionalError("need sigma0 in (0, 1)")
        if not (0 < self.alpha < 0.5):
            raise FunctionalError("need alpha in (0, 1/2)")
        for name in ("delta_hat", "h0", "R0", "r_star", "l0", "l0_prime"):
            if getattr(self, name) <= 0:
                raise FunctionalError(f"{name} must be positive")

    def validate_for(self, s: float) -> None:
        """Check the s-dependent constraint alpha < min(1/2, s)."""
        if self.alpha >= min(0.5, s):
            raise FunctionalError(
                f"alpha must lie in (0, min(1/2, s)) = (0, {min(0.5, s)}); "
                f"got {self.alpha}")

    def check_l0_bracket(self, E_m0: float, E_m0_nu0: float) -> bool:
        """Warn unless E_(m0+nu0) < l0 < 2 E_(m0) for the estimated energies."""
        ok = E_m0_nu0 < self.l0 < 2.0 * E_m0
        if not ok:
            warnings.warn(
                f"l0 = {self.l0:.6g} outside the admissible bracket "
                f"({E_m0_nu0:.6g}, {2.0 * E_m0:.6g})", stacklevel=2)
        return ok


def write_params(params: ProofParams, path: str | Path) -> None:
    cp = configparser.ConfigParser()
    cp["params"] = {f.name: repr(getattr(params, f.name))
                    for f in dataclasses.fields(ProofParams)}
    with open(path, "w") as fh:
        cp.write(fh)


def read_params(path: str | Path) -> ProofParams:
    cp = configparser.ConfigParser()
    if not cp.read(path):
        raise FileNotFoundError(f"params file not found: {path}")
    try:
        sec = cp["params"]
        kwargs = {f.name: sec.getfloat(f.name)
                  for f in dataclasses.fields(ProofParams)}
    except (KeyError, configparser.Error, ValueError) as exc:
        raise FunctionalError(f"bad params file {path}: {exc}") from exc
    missing = [k for k, v in kwargs.items() if v is None]
    if missing:
        raise FunctionalError(
            f"params file {path} is missing keys: {', '.join(missing)}")
    return ProofParams(**kwargs)


def energy_limit(u: Field, a: float, nl: NonlinearitySpec) -> EnergyBreakdown:
    """Limit energy L_a(u) = kinetic/2 + (a/2)||u||^2 - int F(u)."""
    if a <= 0:
        raise FunctionalError(f"mass constant must be positive, got {a}")
    g = u.grid
    w = g.cell_volume
    kinetic = 0.5 * sp.hs_seminorm(u) ** 2
    mass = 0.5 * a * float(np.sum(u.values ** 2)) * w
    pot = float(np.sum(nl.F(u.values))) * w
    return EnergyBreakdown(kinetic=kinetic, mass=mass, potential_term=pot)


def grad_energy_limit(u: Field, a: float, nl: NonlinearitySpec) -> Field:
    """L2 gradient (-Delta)^s u + a u - f(u)."""
    lap = sp.frac_laplacian(u)
    return Field(u.grid, lap.values + a * u.values - nl.f(u.values))


def pohozaev_flagged(u: Field, a: float,
                     nl: NonlinearitySpec) -> tuple[float, bool]:
    """Pohozaev functional P_a(u) with a clamp flag.

    P_a = ((2N/(N-2s)) (int F(u) - (a/2)||u||^2) / kinetic)_+^(1/2s).
    Returns (value, clamped) where clamped records a nonpositive bracket
    forced to exactly 0. Requires N > 2s and u != 0; kinetic < 1e-14 is a
    division guard error.
    """
    g = u.grid
    if g.N <= 2 * g.s:
        raise FunctionalError("Pohozaev functional requires N > 2s")
    if not np.any(u.values):
        raise FieldError("Pohozaev functional of the zero field")
    w = g.cell_volume
    kin = sp.hs_seminorm(u) ** 2
    if kin < 1e-14:
        raise FunctionalError(
            f"kinetic term {kin:.3e} below division guard 1e-14")
    bracket = (float(np.sum(nl.F(u.values))) * w
               - 0.5 * a * float(np.sum(u.values ** 2)) * w)
    scaled = (2.0 * g.N / (g.N - 2.0 * g.s)) * bracket / kin
    if scaled <= 0.0:
        return 0.0, True
    return float(scaled ** (1.0 / (2.0 * g.s))), False


def pohozaev(u: Field, a: float, nl: NonlinearitySpec) -> float:
    return pohozaev_flagged(u, a, nl)[0]


def g_of(t: float, N: int, s: float) -> float:
    """Dilation energy profile g(t) = (N t^(N-2s) - (N-2s) t^N) / (2s).

    Total on t >= 0 with g(1) = 1 exactly and g <= 1.
    """
    if N <= 2 * s:
        raise FunctionalError("profile g requires N > 2s")
    if t < 0:
        raise FunctionalError(f"t must be nonnegative, got {t}")
    if t == 1.0:
        return 1.0
    return (N * t ** (N - 2.0 * s) - (N - 2.0 * s) * t ** N) / (2.0 * s)


def _scaled_potential(model: ModelSpec, eps: float) -> np.ndarray:
    """V(eps x) sampled on the model grid (constant mass when no potential)."""
    g = model.grid
    if model.potential is None:
        return np.full(g.shape, model.mass)
    mesh = tuple(eps * c for c in g.mesh())
    vals = np.asarray(model.potential.evaluator(mesh), dtype=np.float64)
    return np.broadcast_to(vals, g.shape)


def energy_eps(u: Field, eps: float, model: ModelSpec) -> EnergyBreakdown:
    """Scaled-potential energy I_eps(u) = kinetic/2 + (1/2) int V(eps x) u^2
    - int F(u)."""
    if eps <= 0:
        raise FunctionalError(f"eps must be positive, got {eps}")
    if u.grid != model.grid:
        raise FunctionalError("field grid does not match the model grid")
    w = u.grid.cell_volume
    V = _scaled_potential(model, eps)
    kinetic = 0.5 * sp.hs_seminorm(u) ** 2
    mass = 0.5 * float(np.sum(V * u.values ** 2)) * w
    pot = float(np.sum(model.nonlinearity.F(u.values))) * w
    return EnergyBreakdown(kinetic=kinetic, mass=mass, potential_term=pot)


def grad_energy_eps(u: Field, eps: float, model: ModelSpec) -> Field:
    """L2 gradient (-Delta)^s u + V(eps x) u - f(u)."""
    if eps <= 0:
        raise FunctionalError(f"eps must be positive, got {eps}")
    V = _scaled_potential(model, eps)
    lap = sp.frac_laplacian(u)
    return Field(u.grid, lap.values + V * u.values
                 - model.nonlinearity.f(u.values))


def penalty_region(eps: float, params: ProofParams,
                   model: ModelSpec) -> Region:
    """Complement of the eps-scaled enlarged well, where mass is penalized.

    The well (2 h0)-neighborhood is taken in the potential's own frame and
    mapped to the solution frame by x -> x/eps. Errors when the scaled well
    leaks to the box boundary (enlarge L or eps) or is empty on the grid.
    """
    if eps <= 0:
        raise FunctionalError(f"eps must be positive, got {eps}")
    if model.potential is None:
        raise FunctionalError("penalty needs a model with a potential")
    g = model.grid
    mesh = tuple(eps * c for c in g.mesh())
    vals = np.broadcast_to(
        np.asarray(model.potential.evaluator(mesh), dtype=np.float64),
        g.shape)
    inside = vals < model.potential.m0 + model.potential.boundary_margin
    if not np.any(inside):
        raise FunctionalError(
            "scaled well misses the grid entirely; decrease eps or refit L")
    pad = 2.0 * params.h0 / eps
    dist = ndimage.distance_transform_edt(~inside) * g.h
    enlarged = dist <= pad
    edge = np.zeros(g.shape, dtype=bool)
    for ax in range(g.N):
        sl0 = [slice(None)] * g.N
        sl0[ax] = 0
        sl1 = [slice(None)] * g.N
        sl1[ax] = g.M - 1
        edge[tuple(sl0)] = True
        edge[tuple(sl1)] = True
    if np.any(enlarged & edge):
        raise FunctionalError(
            "eps-scaled well reaches the box boundary; use a larger L or a "
            "larger eps")
    return region_where(g, ~enlarged, label="penalty support")


def penalty(u: Field, eps: float, params: ProofParams,
            model: ModelSpec) -> float:
    """Mass-concentration penalty
    Q_eps(u) = (eps^(-alpha) ||u||^2_(L2 outside) - 1)_+^((p+1)/2)."""
    region = penalty_region(eps, params, model)
    w = u.grid.cell_volume
    outside_mass = float(np.sum(u.values[region.mask] ** 2)) * w
    bracket = outside_mass / eps ** params.alpha - 1.0
    if bracket <= 0.0:
        return 0.0
    return float(bracket ** (0.5 * (model.nonlinearity.p + 1.0)))


def grad_penalty(u: Field, eps: float, params: ProofParams,
                 model: ModelSpec) -> Field:
    """L2 gradient of Q_eps; supported outside the scaled enlarged well."""
    region = penalty_region(eps, params, model)
    w = u.grid.cell_volume
    outside_mass = float(np.sum(u.values[region.mask] ** 2)) * w
    bracket = outside_mass / eps ** params.alpha - 1.0
    out = np.zeros(u.grid.shape)
    if bracket > 0.0:
        p = model.nonlinearity.p
        coeff = (p + 1.0) * bracket ** (0.5 * (p - 1.0)) / eps ** params.alpha
        out[region.mask] = coeff * u.values[region.mask]
    return Field(u.grid, out)


def energy_penalized(u: Field, eps: float, params: ProofParams,
                     model: ModelSpec) -> EnergyBreakdown:
    """Penalized energy J_eps = I_eps + Q_eps."""
    base = energy_eps(u, eps, model)
    q = penalty(u, eps, params, model)
    return EnergyBreakdown(kinetic=base.kinetic, mass=base.mass,
                           potential_term=base.potential_term, penalty=q)


def grad_energy_penalized(u: Field, eps: float, params: ProofParams,
                          model: ModelSpec) -> Field:
    a = grad_energy_eps(u, eps, model)
    b = grad_penalty(u, eps, params, model)
    return Field(u.grid, a.values + b.values)


def _hs_weight(g: GridSpec) -> np.ndarray:
    if g.s >= 1.0:
        return 1.0 + g.multiplier()
    return 1.0 + sp.gagliardo_multiplier(g)


def minimal_radius(u: Field, profiles, return_shift: bool = False):
    """Minimal H^s distance from u to the translated dictionary.

    rho-hat(u) = min over profiles U and lattice shifts y of
    ||u - U(.-y)||_(H^s), in the Gagliardo convention matching the
    dictionary radius r*. The lattice infimum is found exactly through a
    frequency-domain cross-correlation, then the winning neighborhood is
    re-checked by direct evaluation over +/-2 cells.
    """
    entries = list(getattr(profiles, "profiles", profiles))
    if not entries:
        raise FunctionalError("minimal radius over an empty dictionary")
    g = u.grid
    wk = _hs_weight(g)
    pw = g.parseval_weight
    uh = sp.fftn(u.values)
    nu = float(np.sum(wk * np.abs(uh) ** 2) * pw)
    best = np.inf
    best_shift = None
    axes = tuple(range(g.N))
    for U in entries:
        if U.grid != g:
            raise FunctionalError("dictionary entry on a different grid")
        Uh = sp.fftn(U.values)
        nU = float(np.sum(wk * np.abs(Uh) ** 2) * pw)
        # <u, U(.-y)>_w for every lattice shift y = j*h at once:
        # the weighted cross spectrum, inverse-transformed.
        corr = np.fft.ifftn(wk * uh * np.conj(Uh)).real * (g.size * pw)
        j = np.unravel_index(int(np.argmax(corr)), g.shape)
        lattice_best = float(nu + nU - 2.0 * np.max(corr))
        for delta in np.ndindex(*([5] * g.N)):
            cells = tuple((j[ax] + delta[ax] - 2) % g.M for ax in axes)
            shifted = np.roll(U.values, cells, axis=axes)
            dh = sp.fftn(u.values - shifted)
            d2 = float(np.sum(wk * np.abs(dh) ** 2) * pw)
            if d2 < lattice_best:
                lattice_best = d2
        cand = float(np.sqrt(max(lattice_best, 0.0)))
        if cand < best:
            best = cand
            best_shift = tuple(minimum_image_delta(
                g, np.array([i * g.h for i in j])))
    if return_shift:
        return best, best_shift
    return best
