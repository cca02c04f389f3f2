"""Band-limit certification, Cartwright interpolation and quantized covers.

A function of exponential type sigma bounded on the line is recovered from
samples at x_j = j pi/(2 sigma) by

    h(x) = sin(2 sigma x)/4 * sum_j (-1)^j sin(s_j)/s_j^2 * h(x_j),
    s_j = sigma x/2 - pi j/4.

Each term equals sinc(4 s_j / pi) * sinc(s_j / pi) * h(x_j), which is the
limit-safe form used here (the removable singularities at the nodes are
exactly the sinc limits). The truncated sampler keeps |j| <= 2 L k_star
with sigma = 2 k_star.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import field as fd
from .field import Field, Grid
from .params import DELTA_MAX
from .spectral import spectral_mass_below


class BandLimitError(ValueError):
    pass


class DomainError(ValueError):
    pass


class TruncationWarning(UserWarning):
    """Raised when evaluation points leave the reliable zone of a
    truncated sample set."""


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Samples at x_j = j pi/(2 sigma), |j| <= J."""

    sigma: float
    points: np.ndarray
    values: np.ndarray
    J: int

    def __post_init__(self) -> None:
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        pts = np.asarray(self.points, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        if pts.shape != vals.shape or pts.size != 2 * self.J + 1:
            raise ValueError("points/values shape mismatch with J")
        if not np.allclose(pts, -pts[::-1]):
            raise ValueError("sampling points must be symmetric about 0")
        if not np.all(np.isfinite(vals)):
            raise ValueError("sample values must be finite")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "values", vals)

    @property
    def spacing(self) -> float:
        return math.pi / (2.0 * self.sigma)

    @property
    def reliable_half_width(self) -> float:
        # outermost node times the safety factor 1/2
        return 0.5 * self.J * self.spacing


@dataclass(frozen=True)
class BernsteinCert:
    sigma: float
    K: float
    residual_mass: float

    def __post_init__(self) -> None:
        if self.residual_mass < 0:
            raise ValueError("residual_mass must be >= 0")


def bernstein_check(f: Field, sigma: float, sup_const: float = 1.0) -> BernsteinCert:
    """Certify frequency support: residual_mass is the spectral energy
    fraction beyond sigma; K records the sup-bound surrogate
    sup|f| * sup_const * (sigma/2)."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if not np.any(f.samples):
        return BernsteinCert(sigma, 0.0, 0.0)
    below = spectral_mass_below(f, sigma * (1 + 1e-12))
    residual = max(0.0, 1.0 - below)
    k_star = sigma / 2.0
    K = float(np.abs(f.samples).max()) * sup_const * k_star
    return BernsteinCert(sigma, K, residual)


def _basis_matrix(sigma: float, x: np.ndarray, j: np.ndarray) -> np.ndarray:
    """Rows: evaluation points, columns: nodes; sinc-product form."""
    s = 0.5 * sigma * x[:, None] - 0.25 * math.pi * j[None, :]
    return np.sinc(4.0 * s / math.pi) * np.sinc(s / math.pi)


def cartwright_reconstruct(s: SampleSet, x):
    """Evaluate the interpolant at x; exact at the sampling nodes.

    Points outside the reliable zone |x| <= J pi/(4 sigma) trigger a
    TruncationWarning: the discarded tail of the node sum is no longer
    negligible there.
    """
    xq = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(np.abs(xq) > s.reliable_half_width + 1e-12):
        warnings.warn(
            f"evaluation outside the reliable zone |x| <= {s.reliable_half_width:.4g}",
            TruncationWarning,
            stacklevel=2,
        )
    j = np.arange(-s.J, s.J + 1)
    out = _basis_matrix(s.sigma, xq, j) @ s.values
    return out if np.ndim(x) else float(out[0])


def truncated_sampler(f: Field, k_star: float, L: float) -> SampleSet:
    """Sample a 2 k_star band-limited field at x_j = j pi/(4 k_star),
    |j| <= 2 L k_star."""
    if k_star <= 0 or L <= 0:
        raise ValueError("k_star and L must be positive")
    cert = bernstein_check(f, 2.0 * k_star)
    if cert.residual_mass > 1e-6:
        raise BandLimitError(
            f"spectral mass {cert.residual_mass:.2e} beyond 2 k_star = {2*k_star} "
            "exceeds 1e-6; low-pass the field first"
        )
    J = int(math.floor(2.0 * L * k_star + 1e-9))
    pts = np.arange(-J, J + 1) * (math.pi / (4.0 * k_star))
    g = f.grid
    if pts[0] < g.x_min - 1e-9 or pts[-1] > g.x_max + 1e-9:
        raise DomainError(
            f"sampling points reach |x| = {pts[-1]:.4g}, outside the grid "
            f"domain [{g.x_min}, {g.x_max}]"
        )
    vals = fd.eval_periodic(f, pts)
    return SampleSet(2.0 * k_star, pts, np.asarray(vals), J)


def reconstruct_on_grid(s: SampleSet, grid: Grid) -> Field:
    """Interpolant evaluated on all grid points (no reliable-zone warning;
    remainder analysis wants the full profile)."""
    j = np.arange(-s.J, s.J + 1)
    vals = _basis_matrix(s.sigma, grid.points, j) @ s.values
    return Field(grid, vals)


def remainder_profile(f: Field, k_star: float, L: float, xi_list,
                      delta: float = DELTA_MAX) -> list[float]:
    """Weighted second-order residual norms of f - S_L(f) per center xi.

    The tail of the node sum makes the residual scale like
    1/(1 + |L - |xi||): small deep inside the sampled window, larger near
    its edge.
    """
    s = truncated_sampler(f, k_star, L)
    grid = f.grid
    r = f.samples - reconstruct_on_grid(s, grid).samples
    rf = Field(grid, r)
    rp = fd.differentiate(rf, 1).samples
    rpp = fd.differentiate(rf, 2).samples
    integrand = r * r + 2.0 * rp * rp + rpp * rpp
    out = []
    for xi in np.asarray(xi_list, dtype=float):
        val = fd.weighted_array_integral(integrand, grid, delta, float(xi))
        out.append(math.sqrt(max(val, 0.0)))
    return out


@dataclass(frozen=True)
class QuantizedCover:
    """Distinct quantization cells of a family of sample sets."""

    step: float
    cells: dict
    count: int

    def representative(self, key: tuple) -> np.ndarray:
        return np.asarray(key, dtype=float) * self.step


def quantized_sample_cover(samples: list[SampleSet], eps: float,
                           n_quant: int) -> QuantizedCover:
    """Quantize node values to a grid of step eps/(4 n_quant) and collect
    the distinct cells; the cell count certifies the covering bound."""
    if eps <= 0 or n_quant < 1:
        raise ValueError("eps must be positive and n_quant >= 1")
    if not samples:
        raise ValueError("need at least one sample set")
    ref = samples[0].points
    for s in samples[1:]:
        if s.points.shape != ref.shape or not np.allclose(s.points, ref):
            raise ValueError("all sample sets must share the sampling points")
    step = eps / (4.0 * n_quant)
    cells: dict[tuple, list[int]] = {}
    for idx, s in enumerate(samples):
        key = tuple(int(q) for q in np.rint(s.values / step))
        cells.setdefault(key, []).append(idx)
    return QuantizedCover(step, cells, len(cells))


def fit_reconstruction_gain(sigma: float, J: int, grid: Grid, L: float,
                            delta: float = DELTA_MAX, trials: int = 20,
                            seed: int = 0) -> float:
    """Largest windowed second-order norm produced by unit-sup node
    perturbations; calibrates the quantization resolution n_quant."""
    rng = np.random.default_rng(seed)
    pts = np.arange(-J, J + 1) * (math.pi / (2.0 * sigma))
    centers = fd.center_grid(grid, delta, L)
    worst = 0.0
    for _ in range(trials):
        vals = rng.choice([-1.0, 1.0], size=2 * J + 1)
        s = SampleSet(sigma, pts, vals, J)
        rec = reconstruct_on_grid(s, grid)
        rp = fd.differentiate(rec, 1).samples
        rpp = fd.differentiate(rec, 2).samples
        integrand = rec.samples ** 2 + 2.0 * rp * rp + rpp * rpp
        best = max(
            fd.weighted_array_integral(integrand, grid, delta, float(xi))
            for xi in centers
        )
        worst = max(worst, math.sqrt(max(best, 0.0)))
    return worst


def default_n_quant(gain: float) -> int:
    """n_quant = 8 * ceil(gain), mirroring the grid-resolution choice in
    the covering argument."""
    return 8 * max(1, int(math.ceil(gain)))
