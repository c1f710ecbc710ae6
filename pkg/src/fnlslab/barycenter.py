"""Localization toolkit: density tube, barycenter map, and the embeddings.

The density of u at a lattice point q measures how close u is, inside the
ball B_R0(q), to some translated dictionary profile; a monotone cutoff psi
maps that distance into [0, 1]. The barycenter Upsilon is the density-
weighted mean of q over a coarse lattice, anchored at the best-correlation
cell so periodic wrap never mixes antipodal mass. Phi embeds (t, p) as a
dilated, shifted ground state; Psi reads (t, p) back from a field.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import functionals as fn
from . import spectral as sp
from .grid import Field, GridSpec, Region, minimum_image_delta, region_where


class BarycenterError(ValueError):
    """Raised for out-of-tube fields and bad configuration."""


def smooth_cutoff(r_star: float) -> Callable[[float], float]:
    """Monotone C^1 cutoff: 1 on [0, r*/4], 0 on [r*/2, inf), smoothstep
    in between."""
    lo, hi = r_star / 4.0, r_star / 2.0

    def psi(d: float) -> float:
        if d <= lo:
            return 1.0
        if d >= hi:
            return 0.0
        t = (d - lo) / (hi - lo)
        return 1.0 - t * t * (3.0 - 2.0 * t)

    return psi


@dataclass(frozen=True)
class BarycenterConfig:
    """Tube constants and lattice stride for density and Upsilon.

    stride counts grid cells between coarse lattice points (2 to 4 is the
    intended range). psi defaults to the smoothstep cutoff for r_star.
    """
    R0: float
    r_star: float
    stride: int = 4
    psi: Callable[[float], float] | None = None

    def __post_init__(self):
        if self.R0 <= 0 or self.r_star <= 0:
            raise BarycenterError("R0 and r_star must be positive")
        if not (1 <= int(self.stride) <= 8):
            raise BarycenterError("stride must be a small positive cell count")
        if self.psi is None:
            object.__setattr__(self, "psi", smooth_cutoff(self.r_star))


def _mi_ball_mask(g: GridSpec, center_cells, radius: float) -> np.ndarray:
    """Ball mask by minimum-image distance from a lattice cell center."""
    idx = [np.arange(g.M)] * g.N
    mesh = np.meshgrid(*idx, indexing="ij")
    r2 = np.zeros(g.shape)
    for ax in range(g.N):
        d = (mesh[ax] - center_cells[ax]) * g.h
        d = d - 2.0 * g.L * np.round(d / (2.0 * g.L))
        r2 = r2 + d * d
    return r2 <= radius * radius


def _tube_distance(u: Field, profiles, q_cells, cfg: BarycenterConfig) -> float:
    """inf over profiles of the restricted distance at lattice point q.

    Distance is the L2 part over B_R0(q) plus the mixed Gagliardo seminorm
    with first slot B_R0(q) and second slot truncated to B_4R0(q); the
    truncation drops pair interactions at range >= 3 R0, whose kernel mass
    is O(R0^(-2s)) relative. An L2 reverse-triangle bound prunes profiles
    that cannot come inside the cutoff support.
    """
    g = u.grid
    inner = _mi_ball_mask(g, q_cells, cfg.R0)
    outer = _mi_ball_mask(g, q_cells, 4.0 * cfg.R0)
    w = g.cell_volume
    hi = cfg.r_star / 2.0
    u_l2 = float(np.sqrt(np.sum(u.values[inner] ** 2) * w))
    best = np.inf
    axes = tuple(range(g.N))
    region_in = region_where(g, inner)
    region_out = region_where(g, outer)
    for U in profiles:
        center = _mi_ball_mask(g, (g.M // 2,) * g.N, cfg.R0)
        U_l2 = float(np.sqrt(np.sum(U.values[center] ** 2) * w))
        if abs(u_l2 - U_l2) >= min(best, hi):
            continue
        shift = tuple((q_cells[ax] - g.M // 2) % g.M for ax in axes)
        shifted = np.roll(U.values, shift, axis=axes)
        diff = Field(g, u.values - shifted)
        l2_sq = float(np.sum(diff.values[inner] ** 2) * w)
        if np.sqrt(l2_sq) >= min(best, hi):
            continue
        if g.s >= 1.0:
            d = sp.restricted_norm(diff, region_in)
        else:
            semi = sp.mixed_gagliardo_sq(diff, region_in, region_out)
            d = float(np.sqrt(l2_sq + semi))
        if d < best:
            best = d
    return best


def density(q, u: Field, dictionary, cfg: BarycenterConfig) -> float:
    """Tube density at the point q: psi of the best restricted distance.

    q is a coordinate tuple snapped to the nearest grid cell. Exact
    translated dictionary members give 1; points 2 R0 away from all of the
    field's mass give 0.
    """
    g = u.grid
    q = np.atleast_1d(np.asarray(q, dtype=np.float64))
    if q.shape != (g.N,):
        raise BarycenterError(f"q must have {g.N} components")
    cells = tuple(int(round((c + g.L) / g.h)) % g.M for c in q)
    profiles = list(getattr(dictionary, "profiles", dictionary))
    if not profiles:
        raise BarycenterError("empty dictionary")
    d = _tube_distance(u, profiles, cells, cfg)
    return float(cfg.psi(d))


def _correlation_anchor(u: Field, profiles) -> tuple:
    """Lattice cell maximizing the L2 cross-correlation with any profile,
    expressed as the cell the profile center should move to."""
    g = u.grid
    uh = sp.fftn(u.values)
    best_val = -np.inf
    best_cell = (0,) * g.N
    for U in profiles:
        corr = np.fft.ifftn(uh * np.conj(sp.fftn(U.values))).real
        j = np.unravel_index(int(np.argmax(corr)), g.shape)
        v = float(corr[j])
        if v > best_val:
            best_val = v
            best_cell = tuple((jj + g.M // 2) % g.M for jj in j)
    return best_cell


def upsilon(u: Field, dictionary, cfg: BarycenterConfig,
            check_stride: bool = False):
    """Density-weighted barycenter over the coarse q-lattice.

    The lattice is scanned ring by ring (in stride units) outward from the
    correlation anchor; scanning stops once a whole ring carries zero
    density, and never ranges past 2 R0 from the anchor. Coordinates enter
    the average unwrapped relative to the anchor, so the result is
    equivariant under lattice shifts of u. check_stride=True recomputes at
    half stride and errors if the two disagree by a fine cell or more.

    Raises for fields whose density vanishes on the whole scan (out of the
    dictionary tube).
    """
    g = u.grid
    profiles = list(getattr(dictionary, "profiles", dictionary))
    if not profiles:
        raise BarycenterError("empty dictionary")
    anchor = _correlation_anchor(u, profiles)
    result = _upsilon_at_stride(u, profiles, cfg, anchor, int(cfg.stride))
    if check_stride:
        half = max(1, int(cfg.stride) // 2)
        refined = _upsilon_at_stride(u, profiles, cfg, anchor, half)
        if max(abs(a - b) for a, b in zip(result, refined)) >= g.h:
            raise BarycenterError(
                "stride self-check failed: coarse and refined barycenters "
                "disagree by a full cell")
    return result


def _upsilon_at_stride(u: Field, profiles, cfg: BarycenterConfig,
                       anchor, stride: int):
    g = u.grid
    max_rings = max(1, int(np.ceil(2.0 * cfg.R0 / (stride * g.h))))
    total_w = 0.0
    moment = np.zeros(g.N)
    anchor_x = np.array([(-g.L + c * g.h) for c in anchor])
    seen_positive = False
    for ring in range(max_rings + 1):
        ring_w = 0.0
        for off in np.ndindex(*([2 * ring + 1] * g.N)):
            rel = tuple(o - ring for o in off)
            if max(abs(r) for r in rel) != ring:
                continue
            cells = tuple((anchor[ax] + rel[ax] * stride) % g.M
                          for ax in range(g.N))
            d = _tube_distance(u, profiles, cells, cfg)
            wgt = float(cfg.psi(d))
            if wgt <= 0.0:
                continue
            ring_w += wgt
            total_w += wgt
            delta = np.array([rel[ax] * stride * g.h for ax in range(g.N)])
            moment += wgt * (anchor_x + delta)
        if ring_w > 0.0:
            seen_positive = True
        elif seen_positive and ring >= 1:
            break
    if total_w <= 0.0:
        raise BarycenterError(
            "vanishing density: the field lies outside the dictionary tube")
    point = moment / total_w
    return tuple(minimum_image_delta(g, point))


def phi_eps(t: float, p, U0: Field, eps: float) -> Field:
    """Embedding Phi_eps(t, p) = U0((. - p/eps)/t), a dilated profile moved
    to the scaled well point p/eps. t = 1, p = 0 is the identity."""
    if eps <= 0:
        raise BarycenterError(f"eps must be positive, got {eps}")
    if t <= 0:
        raise BarycenterError(f"t must be positive, got {t}")
    g = U0.grid
    p = np.atleast_1d(np.asarray(p, dtype=np.float64))
    if p.shape != (g.N,):
        raise BarycenterError(f"p must have {g.N} components")
    out = sp.dilate(U0, 1.0 / t)
    if np.any(p != 0.0):
        out = sp.translate(out, tuple(-p / eps))
    return out


def psi_eps(u: Field, eps: float, m0: float, dictionary,
            cfg: BarycenterConfig, sigma0: float, nl) -> tuple:
    """Reading map Psi_eps(u) = (clamped P_m0(u), eps * Upsilon(u)).

    The Pohozaev coordinate is clamped into [1 - sigma0, 1 + sigma0]
    (clamped-zero fields land at the lower edge), making the first
    component total on the tube.
    """
    if not (0 < sigma0 < 1):
        raise BarycenterError("sigma0 must lie in (0, 1)")
    P, _ = fn.pohozaev_flagged(u, m0, nl)
    first = float(np.clip(P, 1.0 - sigma0, 1.0 + sigma0))
    point = upsilon(u, dictionary, cfg)
    return first, tuple(eps * np.asarray(point))
