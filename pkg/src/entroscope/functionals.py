"""Weighted Sobolev norms, coercive functionals and decay-rate fitting.

Norm conventions (pair (u, v), weight h with parameter delta):

* h1:   integral h (eta^2 v^2 + u^2 + u'^2)
* h2:   integral h (eta^2 (v^2 + v'^2) + u^2 + 2 u'^2 + u''^2)
* loc1/loc2: sup over weight centers xi of the translated h1/h2 norms
* windowed:  the same sup restricted to centers |xi| <= L

The identity  h2(u,v)^2 = h1(u,v)^2 + h1(u',v')^2  holds exactly with the
spectral derivative scheme and one shared quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Literal

import numpy as np

from . import field as fd
from .dynamics import ModelParams
from .field import Field, FieldPair, Grid, WindowError, differentiate
from .params import DELTA_MAX

NormKind = Literal["h1", "h2", "loc1", "loc2", "windowed"]


@dataclass(frozen=True)
class DecayFit:
    """Fitted decay law for a scalar time series."""

    rate: float
    offset: float
    residual: float
    window: tuple[float, float]
    model: str = "affine_ode"

    def __post_init__(self) -> None:
        if self.residual < 0:
            raise ValueError("residual must be >= 0")
        if not self.window[1] > self.window[0]:
            raise ValueError("degenerate time window")


def potential_v(x, eta: float):
    """Confinement potential with V(0)=0 solving U'(x) + 2 V'(x) = eta^2 x:
    V(x) = eta^2 x^2/4 - x^2/4 + x^4/8."""
    x = np.asarray(x, dtype=float)
    return (eta ** 2) * x * x / 4.0 - x * x / 4.0 + x ** 4 / 8.0


def _h1_integrand(pair: FieldPair, eta: float, scheme: str) -> np.ndarray:
    u = pair.u.samples
    v = pair.v.samples
    up = differentiate(pair.u, 1, scheme=scheme).samples
    return eta ** 2 * v * v + u * u + up * up


def _h2_integrand(pair: FieldPair, eta: float, scheme: str) -> np.ndarray:
    u = pair.u.samples
    v = pair.v.samples
    up = differentiate(pair.u, 1, scheme=scheme).samples
    upp = differentiate(pair.u, 2, scheme=scheme).samples
    vp = differentiate(pair.v, 1, scheme=scheme).samples
    return eta ** 2 * (v * v + vp * vp) + u * u + 2.0 * up * up + upp * upp


def sup_over_centers(values: np.ndarray, grid: Grid, delta: float,
                     centers: np.ndarray) -> float:
    """max over xi of the weighted integral of a sample array."""
    best = -math.inf
    for xi in centers:
        best = max(best, fd.weighted_array_integral(values, grid, delta, float(xi)))
    return best


def sobolev_norm(kind: NormKind, s: FieldPair, delta: float, eta: float,
                 L: float | None = None, scheme: str = "spectral") -> float:
    if not 0.0 < delta <= 0.5:
        raise ValueError(f"delta={delta} outside (0, 1/2]")
    grid = s.grid
    if kind in ("h1", "loc1"):
        integrand = _h1_integrand(s, eta, scheme)
    elif kind in ("h2", "loc2", "windowed"):
        integrand = _h2_integrand(s, eta, scheme)
    else:
        raise ValueError(f"unknown norm kind {kind!r}")

    if kind in ("h1", "h2"):
        val = fd.weighted_array_integral(integrand, grid, delta, 0.0)
    elif kind in ("loc1", "loc2"):
        centers = fd.center_grid(grid, delta)
        val = sup_over_centers(integrand, grid, delta, centers)
    else:
        if L is None:
            raise WindowError("windowed norm requires L")
        centers = fd.center_grid(grid, delta, L)
        val = sup_over_centers(integrand, grid, delta, centers)
    return math.sqrt(max(val, 0.0))


def w1inf_norm(f: Field, window: tuple[float, float] | None = None,
               scheme: str = "spectral") -> float:
    """max(sup |f|, sup |f'|), optionally restricted to a window."""
    fp = differentiate(f, 1, scheme=scheme).samples
    if window is None:
        return float(max(np.abs(f.samples).max(), np.abs(fp).max()))
    mask = fd.window_mask(f.grid, window[0], window[1])
    if not mask.any():
        raise WindowError(f"window {window} contains no grid points")
    return float(max(np.abs(f.samples[mask]).max(), np.abs(fp[mask]).max()))


def coercive_F0(s: FieldPair, p: ModelParams) -> float:
    """alpha * integral h_alpha (eta^2 v^2 + u'^2 + V(u) + eta^2 u v).

    Not a norm; may be negative since V dips below zero at moderate |u|.
    """
    grid = s.grid
    u = s.u.samples
    v = s.v.samples
    up = differentiate(s.u, 1, scheme=p.scheme).samples
    integrand = (p.eta ** 2) * v * v + up * up + potential_v(u, p.eta) \
        + (p.eta ** 2) * u * v
    return p.alpha * fd.weighted_array_integral(integrand, grid, p.alpha, 0.0)


def coercive_F1(s_derivative_pair: FieldPair, p: ModelParams) -> float:
    """alpha * integral h_alpha (eta^2 z^2 + w'^2 + eta^2 mu w z) for the
    derivative pair (w, z) = (u', v')."""
    grid = s_derivative_pair.grid
    w = s_derivative_pair.u.samples
    z = s_derivative_pair.v.samples
    wp = differentiate(s_derivative_pair.u, 1, scheme=p.scheme).samples
    integrand = (p.eta ** 2) * z * z + wp * wp + (p.eta ** 2) * p.mu_f1 * w * z
    return p.alpha * fd.weighted_array_integral(integrand, grid, p.alpha, 0.0)


def j_mixed_term(s: FieldPair, delta: float, eta: float, gamma: float,
                 scheme: str = "spectral") -> float:
    """eta^2 gamma * integral h_delta (u v + u' v')."""
    up = differentiate(s.u, 1, scheme=scheme).samples
    vp = differentiate(s.v, 1, scheme=scheme).samples
    mix = s.u.samples * s.v.samples + up * vp
    return eta ** 2 * gamma * fd.weighted_array_integral(mix, s.grid, delta, 0.0)


def functional_J(s: FieldPair, delta: float, gamma: float, p: ModelParams) -> float:
    """Damping functional: squared h2 norm plus the eta^2-gamma cross term.

    Requires delta <= 1/80 so the weight slope cannot overwhelm the
    dissipative terms.
    """
    if delta > DELTA_MAX * (1 + 1e-12):
        raise ValueError(f"delta={delta} violates delta <= 1/80 = {DELTA_MAX}")
    sq = sobolev_norm("h2", s, delta, p.eta, scheme=p.scheme) ** 2
    return sq + j_mixed_term(s, delta, p.eta, gamma, scheme=p.scheme)


def _as_series(series) -> tuple[np.ndarray, np.ndarray]:
    pairs = list(series)
    t = np.asarray([p[0] for p in pairs], dtype=float)
    v = np.asarray([p[1] for p in pairs], dtype=float)
    if t.size < 8:
        raise ValueError(f"need >= 8 samples, got {t.size}")
    if not (np.all(np.isfinite(t)) and np.all(np.isfinite(v))):
        raise ValueError("series contains non-finite entries")
    if not np.all(np.diff(t) > 0):
        raise ValueError("timestamps must be strictly increasing")
    return t, v


def fit_decay_rate(series: Iterable[tuple[float, float]],
                   model: Literal["affine_ode", "pure_exponential"]) -> DecayFit:
    """Fit a decay law to a (time, value) series.

    affine_ode regresses central difference quotients on dF = -a F + b and
    reports in ``residual`` the fraction of quotients exceeding the fitted
    line by more than three standard deviations of the fit residuals
    (gross envelope breaches). pure_exponential fits a log-linear decay and
    reports the RMS log residual.
    """
    t, v = _as_series(series)
    window = (float(t[0]), float(t[-1]))

    if np.allclose(v, 0.0):
        return DecayFit(0.0, 0.0, 0.0, window, model)

    if model == "pure_exponential":
        pos = v > 0
        if pos.sum() < 8:
            return DecayFit(0.0, 0.0, 0.0, window, model)
        coef = np.polyfit(t[pos], np.log(v[pos]), 1)
        resid = np.log(v[pos]) - np.polyval(coef, t[pos])
        return DecayFit(float(-coef[0]), float(coef[1]),
                        float(np.sqrt(np.mean(resid ** 2))), window, model)

    if model != "affine_ode":
        raise ValueError(f"unknown model {model!r}")

    dq = (v[2:] - v[:-2]) / (t[2:] - t[:-2])
    fmid = v[1:-1]
    design = np.column_stack([-fmid, np.ones_like(fmid)])
    sol, *_ = np.linalg.lstsq(design, dq, rcond=None)
    a, b = float(sol[0]), float(sol[1])
    resid = dq - design @ sol
    slack = 3.0 * float(np.std(resid)) + 1e-12
    violations = float(np.mean(dq > -a * fmid + b + slack))
    return DecayFit(a, b, violations, window, model)
