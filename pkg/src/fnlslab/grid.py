"""Periodic grid, field, and region primitives.

The computational domain is the torus [-L, L)^N sampled on M points per axis,
x_j = -L + j*h with h = 2L/M, so x = 0 sits at index M/2. Frequencies follow
the convention xi_k = pi*k/L for signed integer k in [-M/2, M/2); the Nyquist
mode is retained.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from functools import lru_cache

import numpy as np


class GridError(ValueError):
    """Raised for invalid grid parameters or grid mismatches."""


class FieldError(ValueError):
    """Raised for invalid field payloads (non-finite, wrong shape)."""


class RegionError(ValueError):
    """Raised for invalid region constructions."""


def _is_power_of_two(m: int) -> bool:
    return m >= 1 and (m & (m - 1)) == 0


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid on [-L, L)^N with fractional order s.

    Invariants: M >= 8 and a power of two; 0 < s <= 1; when N >= 2 and s < 1
    the subcritical-dimension condition N > 2s must hold.
    """

    N: int
    M: int
    L: float
    s: float

    def __post_init__(self) -> None:
        if self.N < 1:
            raise GridError(f"dimension N must be >= 1, got {self.N}")
        if self.M < 8 or not _is_power_of_two(self.M):
            raise GridError(f"M must be a power of two >= 8, got {self.M}")
        if not (0.0 < self.s <= 1.0):
            raise GridError(f"s must lie in (0, 1], got {self.s}")
        if self.L <= 0:
            raise GridError(f"L must be positive, got {self.L}")
        if self.N >= 2 and self.s < 1.0 and not (self.N > 2 * self.s):
            raise GridError(
                f"need N > 2s for N >= 2 and s < 1, got N={self.N}, s={self.s}"
            )

    @property
    def h(self) -> float:
        """Cell edge length 2L/M."""
        return 2.0 * self.L / self.M

    @property
    def cell_volume(self) -> float:
        """Quadrature weight per grid cell, h^N."""
        return self.h ** self.N

    @property
    def shape(self) -> tuple:
        return (self.M,) * self.N

    @property
    def size(self) -> int:
        return self.M ** self.N

    @property
    def parseval_weight(self) -> float:
        """Weight turning sum(|uhat|^2) into the discrete L2 norm squared."""
        return self.cell_volume / self.size

    def axis(self) -> np.ndarray:
        """1D coordinate axis, x_j = -L + j*h."""
        return _axis(self)

    def freq_axis(self) -> np.ndarray:
        """1D frequency axis in fft order, xi = pi*k/L with Nyquist retained."""
        return _freq_axis(self)

    def mesh(self) -> tuple:
        """Coordinate meshes, one (M,)*N array per axis (read-only views)."""
        return _mesh(self)

    def radius(self) -> np.ndarray:
        """|x| on the grid (read-only)."""
        return _radius(self)

    def multiplier(self, order: float | None = None) -> np.ndarray:
        """Fourier multiplier |xi|^(2*order); order defaults to grid s."""
        if order is None:
            order = self.s
        return _multiplier(self, float(order))


@lru_cache(maxsize=64)
def _axis(g: GridSpec) -> np.ndarray:
    x = -g.L + g.h * np.arange(g.M, dtype=np.float64)
    x.setflags(write=False)
    return x


@lru_cache(maxsize=64)
def _freq_axis(g: GridSpec) -> np.ndarray:
    xi = 2.0 * np.pi * np.fft.fftfreq(g.M, d=g.h)
    xi.setflags(write=False)
    return xi


@lru_cache(maxsize=32)
def _mesh(g: GridSpec) -> tuple:
    axes = np.meshgrid(*([_axis(g)] * g.N), indexing="ij")
    for a in axes:
        a.setflags(write=False)
    return tuple(axes)


@lru_cache(maxsize=32)
def _radius(g: GridSpec) -> np.ndarray:
    r = np.sqrt(sum(a * a for a in _mesh(g)))
    r.setflags(write=False)
    return r


@lru_cache(maxsize=64)
def _multiplier(g: GridSpec, order: float) -> np.ndarray:
    xi = _freq_axis(g)
    mesh = np.meshgrid(*([xi] * g.N), indexing="ij")
    mag2 = sum(z * z for z in mesh)
    out = mag2 ** order
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Field:
    """Real scalar field sampled on a GridSpec. Values are finite float64."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != self.grid.shape:
            raise FieldError(
                f"values shape {v.shape} does not match grid {self.grid.shape}"
            )
        if not np.all(np.isfinite(v)):
            raise FieldError("field contains non-finite values")
        object.__setattr__(self, "values", v)

    def with_values(self, values: np.ndarray) -> "Field":
        return Field(self.grid, values)

    def copy(self) -> "Field":
        return Field(self.grid, self.values.copy())


def zero_field(grid: GridSpec) -> Field:
    return Field(grid, np.zeros(grid.shape))


def require_same_grid(a: Field, b: Field) -> None:
    if a.grid != b.grid:
        raise GridError(f"grid mismatch: {a.grid} vs {b.grid}")


@dataclass(frozen=True)
class Region:
    """Pure indicator on grid points with exactly reported measure.

    tag records the construction (kind plus parameters) for the factory
    regions, enabling text serialization; mask-built regions carry the
    non-serializable ("where",) tag.
    """

    grid: GridSpec
    mask: np.ndarray
    label: str = "region"
    tag: tuple = ("where",)

    def __post_init__(self) -> None:
        m = np.asarray(self.mask, dtype=bool)
        if m.shape != self.grid.shape:
            raise RegionError(
                f"mask shape {m.shape} does not match grid {self.grid.shape}"
            )
        m.setflags(write=False)
        object.__setattr__(self, "mask", m)

    @property
    def cell_count(self) -> int:
        return int(np.count_nonzero(self.mask))

    @property
    def measure(self) -> float:
        """Cell count times cell volume, exact."""
        return self.cell_count * self.grid.cell_volume

    @property
    def is_empty(self) -> bool:
        return self.cell_count == 0

    def complement(self) -> "Region":
        return Region(self.grid, ~self.mask, f"not({self.label})")

    def intersect(self, other: "Region") -> "Region":
        if other.grid != self.grid:
            raise GridError("region grid mismatch")
        return Region(self.grid, self.mask & other.mask,
                      f"({self.label})&({other.label})")

    def union(self, other: "Region") -> "Region":
        if other.grid != self.grid:
            raise GridError("region grid mismatch")
        return Region(self.grid, self.mask | other.mask,
                      f"({self.label})|({other.label})")


def whole_box(grid: GridSpec) -> Region:
    return Region(grid, np.ones(grid.shape, dtype=bool), "box", ("box",))


def empty_region(grid: GridSpec) -> Region:
    return Region(grid, np.zeros(grid.shape, dtype=bool), "empty", ("empty",))


def ball(grid: GridSpec, center, radius: float) -> Region:
    """Euclidean ball B_radius(center) intersected with the box (no wrap)."""
    center = np.atleast_1d(np.asarray(center, dtype=np.float64))
    if center.shape != (grid.N,):
        raise RegionError(f"center must have {grid.N} components")
    mesh = grid.mesh()
    d2 = sum((a - c) ** 2 for a, c in zip(mesh, center))
    return Region(grid, d2 <= radius * radius, f"ball(r={radius:g})",
                  ("ball", *(float(c) for c in center), float(radius)))


def annulus(grid: GridSpec, center, r_in: float, r_out: float) -> Region:
    center = np.atleast_1d(np.asarray(center, dtype=np.float64))
    mesh = grid.mesh()
    d2 = sum((a - c) ** 2 for a, c in zip(mesh, center))
    return Region(grid, (d2 >= r_in * r_in) & (d2 <= r_out * r_out),
                  f"annulus({r_in:g},{r_out:g})",
                  ("annulus", *(float(c) for c in center),
                   float(r_in), float(r_out)))


def region_where(grid: GridSpec, mask: np.ndarray, label: str = "where") -> Region:
    return Region(grid, mask, label)


def minimum_image_delta(grid: GridSpec, delta: np.ndarray) -> np.ndarray:
    """Wrap coordinate differences into [-L, L) per axis."""
    span = 2.0 * grid.L
    return delta - span * np.round(delta / span)
