"""Uniform periodic grids, sampled fields, polynomial weights and quadrature.

The infinite line is truncated to [x_min, x_max] with periodic boundary
conditions; grid points are x_i = x_min + i*dx for i in [0, n), so x_max
is the wrap point. All weighted integrals are trapezoidal over the
truncated domain with the closing value taken from the periodic field and
the weight evaluated at x_max directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Literal

import numpy as np


class GridError(ValueError):
    pass


class FieldError(ValueError):
    pass


class WindowError(ValueError):
    pass


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on [x_min, x_max) with n points."""

    x_min: float
    x_max: float
    n: int

    def __post_init__(self) -> None:
        if self.x_max <= self.x_min:
            raise GridError(f"empty domain [{self.x_min}, {self.x_max}]")
        if self.n < 8:
            raise GridError(f"grid too small: n={self.n} < 8")
        if self.n % 2 != 0:
            raise GridError(f"grid size must be even, got n={self.n}")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @cached_property
    def points(self) -> np.ndarray:
        x = self.x_min + self.dx * np.arange(self.n)
        x.setflags(write=False)
        return x

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Angular wavenumbers of the real FFT modes."""
        k = 2.0 * np.pi * np.fft.rfftfreq(self.n, d=self.dx)
        k.setflags(write=False)
        return k

    @property
    def nyquist(self) -> float:
        return math.pi / self.dx


def default_grid() -> Grid:
    """X=40, n=4096: the window scale used by the covering analysis."""
    return Grid(-40.0, 40.0, 4096)


@dataclass(frozen=True, eq=False)
class Field:
    """Real samples of one function on a grid."""

    grid: Grid
    samples: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.samples, dtype=float)
        if arr.shape != (self.grid.n,):
            raise FieldError(f"expected {self.grid.n} samples, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise FieldError("samples contain NaN or Inf")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)


@dataclass(frozen=True, eq=False)
class FieldPair:
    """State (u, v) of the first-order system, sharing one grid."""

    u: Field
    v: Field

    def __post_init__(self) -> None:
        if self.u.grid != self.v.grid:
            raise FieldError("u and v must share one grid")

    @property
    def grid(self) -> Grid:
        return self.u.grid


@dataclass(frozen=True)
class Weight:
    """Localization weight h(x) = (1 + delta^2 (x - xi)^2)^-2."""

    delta: float
    xi: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 < self.delta <= 0.5:
            raise ValueError(f"delta={self.delta} outside (0, 1/2]")

    def evaluate(self, x):
        y = self.delta * (np.asarray(x, dtype=float) - self.xi)
        return 1.0 / (1.0 + y * y) ** 2


def evaluate_weight(w: Weight, x):
    """Weight value h(x); translation covariant in the center xi."""
    return w.evaluate(x)


def zero_field(grid: Grid) -> Field:
    return Field(grid, np.zeros(grid.n))


def constant_field(grid: Grid, value: float) -> Field:
    return Field(grid, np.full(grid.n, float(value)))


def field_from_function(grid: Grid, fn) -> Field:
    return Field(grid, np.asarray(fn(grid.points), dtype=float))


def add(f: Field, g: Field) -> Field:
    if f.grid != g.grid:
        raise FieldError("grid mismatch")
    return Field(f.grid, f.samples + g.samples)


def sub(f: Field, g: Field) -> Field:
    if f.grid != g.grid:
        raise FieldError("grid mismatch")
    return Field(f.grid, f.samples - g.samples)


def scale(f: Field, c: float) -> Field:
    return Field(f.grid, c * f.samples)


def differentiate(
    f: Field,
    order: Literal[1, 2] = 1,
    scheme: Literal["spectral", "finite_difference"] = "spectral",
) -> Field:
    """Discrete derivative on the same periodic grid.

    The spectral scheme is exact for resolved trigonometric modes and
    requires periodic-consistent samples; the finite-difference scheme
    uses second-order central stencils with periodic wrap.
    """
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order}")
    g = f.grid
    s = f.samples
    if scheme == "spectral":
        k = g.wavenumbers
        spec = np.fft.rfft(s)
        if order == 1:
            spec = spec * (1j * k)
        else:
            spec = spec * (-(k * k))
        out = np.fft.irfft(spec, n=g.n)
    elif scheme == "finite_difference":
        if order == 1:
            out = (np.roll(s, -1) - np.roll(s, 1)) / (2.0 * g.dx)
        else:
            out = (np.roll(s, -1) - 2.0 * s + np.roll(s, 1)) / (g.dx * g.dx)
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    return Field(g, out)


@lru_cache(maxsize=512)
def _weight_samples(grid: Grid, delta: float, xi: float):
    """Weight values on the grid points plus the closing value at x_max."""
    w = Weight(delta, xi)
    vals = w.evaluate(grid.points)
    end = float(w.evaluate(grid.x_max))
    vals.setflags(write=False)
    return vals, end


def trapezoid_closed(values: np.ndarray, end_value: float, dx: float) -> float:
    """Trapezoid rule over [x_min, x_max] given samples on [x_min, x_max)."""
    return dx * (0.5 * values[0] + values[1:].sum() + 0.5 * end_value)


def weighted_integral(f: Field, w: Weight) -> float:
    """Trapezoidal quadrature of h_{delta,xi}(x) f(x) over the grid domain."""
    g = f.grid
    hv, h_end = _weight_samples(g, w.delta, w.xi)
    vals = hv * f.samples
    # periodic field: f(x_max) = f(x_min)
    return trapezoid_closed(vals, h_end * f.samples[0], g.dx)


def weighted_array_integral(values: np.ndarray, grid: Grid, delta: float, xi: float) -> float:
    """weighted_integral for a raw sample array (periodic closing value)."""
    hv, h_end = _weight_samples(grid, delta, xi)
    return trapezoid_closed(hv * values, h_end * values[0], grid.dx)


def truncation_spill(grid: Grid, w: Weight) -> float:
    """Fraction of the infinite-line weight mass falling outside the domain.

    The closed-form total is pi/(2 delta); the diagnostic quantifies how
    much the domain truncation distorts weighted integrals for a given
    (delta, xi).
    """
    inside = weighted_integral(constant_field(grid, 1.0), w)
    total = math.pi / (2.0 * w.delta)
    return max(0.0, 1.0 - inside / total)


def eval_periodic(f: Field, x) -> np.ndarray:
    """Evaluate a periodic band-limited field at arbitrary points.

    Trigonometric (Fourier) interpolation: exact for fields resolved on
    the grid. Cost is O(n_modes * n_points); modes with negligible energy
    are dropped.
    """
    g = f.grid
    xq = np.atleast_1d(np.asarray(x, dtype=float))
    spec = np.fft.rfft(f.samples) / g.n
    k = g.wavenumbers
    keep = np.abs(spec) > 1e-15 * (np.abs(spec).max() + 1e-300)
    spec = spec[keep]
    k = k[keep]
    # rfft convention: f(x) = c0 + 2*sum Re(c_m e^{ik(x - x_min)}), Nyquist unhalved
    phase = np.exp(1j * np.outer(xq - g.x_min, k))
    weights = np.full(k.shape, 2.0)
    if k.size and k[0] == 0.0:
        weights[0] = 1.0
    if g.n % 2 == 0 and k.size and np.isclose(k[-1], g.wavenumbers[-1]):
        weights[-1] = 1.0
    out = (phase * (weights * spec)).real.sum(axis=1)
    return out if np.ndim(x) else float(out[0])


def window_mask(grid: Grid, lo: float, hi: float) -> np.ndarray:
    """Boolean mask of grid points inside [lo, hi]."""
    if hi < lo:
        raise WindowError(f"empty window [{lo}, {hi}]")
    x = grid.points
    return (x >= lo - 1e-12) & (x <= hi + 1e-12)


def center_grid(grid: Grid, delta: float, L: float | None = None) -> np.ndarray:
    """Centers for the sup over translates, spaced at most 1/(2 delta).

    With L given, centers span [-L, L] (must lie inside the domain); else
    they span the whole domain. The weight varies on scale 1/delta, so
    this spacing resolves the sup to about a percent.
    """
    if L is not None:
        if L < 0:
            raise WindowError(f"negative window half-length L={L}")
        if L > grid.x_max or -L < grid.x_min:
            raise WindowError(
                f"window half-length L={L} exceeds the domain [{grid.x_min}, {grid.x_max}]"
            )
        lo, hi = -L, L
    else:
        lo, hi = grid.x_min, grid.x_max
    step = 1.0 / (2.0 * delta)
    count = max(3, int(math.ceil((hi - lo) / step)) + 1)
    return np.linspace(lo, hi, count)
