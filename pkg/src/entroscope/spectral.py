"""Smooth frequency cutoffs, convolution operators and momentum bounds.

The cutoff profile theta equals 1 on |k| <= 1, descends smoothly on
1 < |k| < 2 through the exponential smooth-step, and vanishes beyond.
Low-pass operators multiply the spectrum by theta(k/a); they substitute
for sharp projections onto momenta below a while keeping rapidly decaying
convolution kernels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np

from .field import Field, Grid, Weight, default_grid, differentiate, weighted_array_integral


class UndefinedRatioError(ZeroDivisionError):
    pass


def _sigma(t: np.ndarray) -> np.ndarray:
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def smoothstep_up(t) -> np.ndarray:
    """C-infinity ramp: 0 for t <= 0, 1 for t >= 1, midpoint value 1/2."""
    t = np.asarray(t, dtype=float)
    s = _sigma(t)
    return s / (s + _sigma(1.0 - t))


def smooth_cutoff(k) -> np.ndarray:
    """theta(k): 1 on |k| <= 1, 0 on |k| >= 2, smooth-step in between."""
    k = np.abs(np.asarray(k, dtype=float))
    out = np.where(k <= 1.0, 1.0, np.where(k >= 2.0, 0.0, smoothstep_up(2.0 - k)))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class CutoffProfile:
    """Smooth characteristic function: flat 1 until ``flat_until``, zero
    from ``zero_from`` on."""

    flat_until: float = 1.0
    zero_from: float = 2.0

    def value(self, k) -> np.ndarray:
        return smooth_cutoff(k)


@dataclass(frozen=True)
class SpectralOperator:
    kind: Literal["lowpass", "highpass", "general"]
    a: float
    profile: CutoffProfile = CutoffProfile()
    custom: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self) -> None:
        if self.a <= 0:
            raise ValueError("frequency scale a must be positive")
        if self.kind == "general" and self.custom is None:
            raise ValueError("general operator needs a custom multiplier")

    def multiplier(self, k: np.ndarray) -> np.ndarray:
        if self.kind == "lowpass":
            return self.profile.value(np.asarray(k) / self.a)
        if self.kind == "highpass":
            return 1.0 - self.profile.value(np.asarray(k) / self.a)
        return np.asarray(self.custom(np.asarray(k)), dtype=float)


def lowpass(a: float) -> SpectralOperator:
    return SpectralOperator("lowpass", a)


def highpass(a: float) -> SpectralOperator:
    return SpectralOperator("highpass", a)


def apply(op: SpectralOperator, f: Field) -> Field:
    """Multiply each resolved Fourier mode by the operator's multiplier."""
    g = f.grid
    spec = np.fft.rfft(f.samples)
    spec *= op.multiplier(g.wavenumbers)
    return Field(g, np.fft.irfft(spec, n=g.n))


@dataclass(frozen=True)
class NormEstimate:
    value: float
    stable: bool
    history: tuple[float, ...]

    def __float__(self) -> float:
        return self.value


def _history_stable(history: np.ndarray, tol: float = 1e-2) -> bool:
    """Last three iterates within a relative spread of tol."""
    if history.size < 3:
        return False
    tail = history[-3:]
    scale = max(abs(tail).max(), 1e-300)
    return float(tail.max() - tail.min()) / scale <= tol


def weighted_operator_norm(op: SpectralOperator, delta: float, iterations: int,
                           grid: Grid | None = None, seed: int = 0) -> NormEstimate:
    """Power-iteration lower bound for the operator norm on the weighted
    space with inner product integral(h_delta f g).

    Iterates B = h^-1 T^T h T (the weighted T*T; T is symmetric on the
    periodic grid since its kernel is even). The square root of the
    Rayleigh quotient converges to the weighted norm from below.
    """
    if iterations < 10:
        raise ValueError("need at least 10 iterations")
    if grid is None:
        grid = default_grid()
    h = Weight(delta).evaluate(grid.points)
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(grid.n)
    mult = op.multiplier(grid.wavenumbers)

    def apply_T(x):
        return np.fft.irfft(mult * np.fft.rfft(x), n=grid.n)

    def wdot(x, y):
        return float(np.sum(h * x * y) * grid.dx)

    history = []
    for _ in range(iterations):
        tv = apply_T(v)
        bv = apply_T(h * tv) / h
        norm_sq = wdot(v, bv) / wdot(v, v)
        history.append(math.sqrt(max(norm_sq, 0.0)))
        scale = math.sqrt(max(wdot(bv, bv), 0.0))
        if scale < 1e-150:
            return NormEstimate(0.0, True, tuple(history))
        v = bv / scale
    hist = np.asarray(history)
    return NormEstimate(float(hist[-1]), _history_stable(hist), tuple(hist))


def spectral_mass_below(f: Field, a: float) -> float:
    """Fraction of spectral energy strictly below frequency a."""
    spec = np.abs(np.fft.rfft(f.samples)) ** 2
    # rfft energy weights: double all but DC (and Nyquist for even n)
    w = np.full(spec.shape, 2.0)
    w[0] = 1.0
    w[-1] = 1.0
    energy = w * spec
    total = energy.sum()
    if total <= 0:
        return 0.0
    below = energy[f.grid.wavenumbers < a * (1 - 1e-12)].sum()
    return float(below / total)


def project_above(f: Field, a: float) -> Field:
    """Sharp projection onto frequencies |k| >= a (support condition of
    the high-momentum class)."""
    spec = np.fft.rfft(f.samples)
    spec[f.grid.wavenumbers < a * (1 - 1e-12)] = 0.0
    return Field(f.grid, np.fft.irfft(spec, n=f.grid.n))


def high_momentum_ratio(f: Field, a: float, delta: float) -> float:
    """Empirical Poincare ratio integral(h f^2) / integral(h f'^2) for a
    field supported above frequency a; scales like 1/a^2.

    Sub-a spectral mass above 1e-8 of the total is removed by the sharp
    projection before measuring.
    """
    if spectral_mass_below(f, a) > 1e-8:
        f = project_above(f, a)
    fp = differentiate(f, 1, scheme="spectral")
    num = weighted_array_integral(f.samples ** 2, f.grid, delta, 0.0)
    den = weighted_array_integral(fp.samples ** 2, f.grid, delta, 0.0)
    if den <= 1e-300:
        raise UndefinedRatioError("zero derivative energy")
    return num / den


def fit_high_momentum_constant(grid: Grid, delta: float,
                               cutoffs=(4.0, 8.0, 16.0), trials: int = 10,
                               seed: int = 0) -> float:
    """Fitted constant C with ratio(a) <= C / a^2 across the cutoff sweep."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    k = grid.wavenumbers
    for a in cutoffs:
        band = (k >= a) & (k <= 2.0 * a)
        if not band.any():
            raise ValueError(f"cutoff a={a} unresolved on this grid")
        for _ in range(trials):
            spec = np.zeros(k.size, dtype=complex)
            spec[band] = rng.standard_normal(band.sum()) \
                + 1j * rng.standard_normal(band.sum())
            f = Field(grid, np.fft.irfft(spec, n=grid.n))
            worst = max(worst, high_momentum_ratio(f, a, delta) * a * a)
    return worst
