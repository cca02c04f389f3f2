"""Entropy-per-length estimation on empirical attractor ensembles.

Counts are greedy covering numbers in W^{1,inf} (u-component) per window
[-L, L]; the fitted growth of log(count) in L per unit length, divided by
log(1/eps), gives the eps-entropy bound constant. The topological entropy
estimate partitions trajectory snapshots by nearest cover atom and counts
distinct atom itineraries; the per-unit-length rate is the slope of the
fitted temporal growth rates against L.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import minimize_scalar, nnls

from . import field as fd
from .covering import CoverAtomSet, empirical_cover, empirical_cover_count
from .dynamics import Ensemble, ModelParams, Trajectory, evolve_difference, evolve_many
from .field import Field, WindowError, differentiate
from .functionals import sobolev_norm
from .params import DELTA_MAX, gamma_value
from .spectral import highpass, apply as spectral_apply


@dataclass(frozen=True)
class EntropyEstimate:
    eps: float
    lengths: tuple[float, ...]
    counts: tuple[int, ...]
    slope: float
    bound_const: float
    degenerate: bool = False

    def __post_init__(self) -> None:
        if any(c < 1 for c in self.counts):
            raise ValueError("counts must be positive")


def epsilon_entropy_per_length(ens: Ensemble, eps: float,
                               lengths: Sequence[float]) -> EntropyEstimate:
    """Greedy cover counts per window and the fitted per-length slope.

    Degenerate estimates (all counts equal, e.g. eps at least the ensemble
    diameter) are flagged and reported with slope 0.
    """
    lengths = list(lengths)
    if any(b <= a for a, b in zip(lengths, lengths[1:])):
        raise ValueError("lengths must be increasing")
    members = [m.u for m in ens.members]
    counts = [empirical_cover_count(members, (-L, L), eps) for L in lengths]
    logs = np.log(np.asarray(counts, dtype=float))
    if len(set(counts)) == 1:
        slope = 0.0
        degenerate = True
    else:
        slope = float(np.polyfit(np.asarray(lengths, dtype=float), logs, 1)[0])
        degenerate = False
    bound_const = slope / math.log(1.0 / eps) if eps < 1.0 else 0.0
    return EntropyEstimate(eps, tuple(lengths), tuple(counts), slope,
                           bound_const, degenerate)


@dataclass(frozen=True)
class BallGrowthReport:
    eps: float
    L: float
    A_const: float
    lhs_count: int   # N_{L - A/eps}(eps)
    rhs_count: int   # N_L(2 eps)
    c_fit: float     # smallest C with lhs <= C^L * rhs


def _windowed_h2_counts(ens: Ensemble, eps: float, L: float,
                        delta: float) -> int:
    """Greedy cover count of the ensemble under the windowed second-order
    norm of pair differences."""
    members = ens.members
    eta = ens.params.eta
    centers: list[int] = []

    def dist(i: int, j: int) -> float:
        a, b = members[i], members[j]
        diff = fd.FieldPair(fd.sub(a.u, b.u), fd.sub(a.v, b.v))
        return sobolev_norm("windowed", diff, delta, eta, L=L)

    for i in range(len(members)):
        if not any(dist(i, c) <= eps for c in centers):
            centers.append(i)
    return len(centers)


def ball_growth_check(ens: Ensemble, eps: float, L: float, A_const: float,
                      delta: float = DELTA_MAX) -> BallGrowthReport:
    """Compare N_{L-A/eps}(eps) against N_L(2 eps) in the windowed norm
    and report the smallest C making N_{L-A/eps}(eps) <= C^L N_L(2 eps)."""
    inner = L - A_const / eps
    if inner <= 0:
        raise WindowError(f"window degenerate: L - A/eps = {inner:.4g} <= 0")
    lhs = _windowed_h2_counts(ens, eps, inner, delta)
    rhs = _windowed_h2_counts(ens, 2.0 * eps, L, delta)
    ratio = lhs / max(rhs, 1)
    c_fit = max(1.0, ratio ** (1.0 / L))
    return BallGrowthReport(eps, L, A_const, lhs, rhs, c_fit)


@dataclass(frozen=True)
class SeparationReport:
    eps: float
    tau_step: float
    T: float
    n_separated: int
    trajectory_count: int

    def __post_init__(self) -> None:
        if self.n_separated > self.trajectory_count:
            raise ValueError("separated count exceeds trajectory count")


def _atom_profiles(cover: CoverAtomSet, grid, mask) -> list[tuple[np.ndarray, np.ndarray]]:
    x = grid.points[mask]
    out = []
    for atom in cover.atoms:
        if isinstance(atom, Field):
            vals = atom.samples[mask]
            slopes = differentiate(atom, 1).samples[mask]
        else:
            vals = np.asarray(atom.evaluate(x), dtype=float)
            slopes = np.asarray(atom.slope_at(x), dtype=float)
        out.append((vals, slopes))
    return out


def assign_atoms(states: Sequence[Field], cover: CoverAtomSet,
                 window: tuple[float, float]) -> list[int]:
    """Nearest-atom assignment in W^{1,inf} on the window (ties to the
    lowest atom index)."""
    if not cover.atoms:
        raise ValueError("cover has no explicit atoms")
    grid = states[0].grid
    mask = fd.window_mask(grid, window[0], window[1])
    profiles = _atom_profiles(cover, grid, mask)
    codes = []
    for st in states:
        sv = st.samples[mask]
        sd = differentiate(st, 1).samples[mask]
        dists = [
            max(np.abs(sv - av).max(), np.abs(sd - ad).max())
            for av, ad in profiles
        ]
        codes.append(int(np.argmin(dists)))
    return codes


def separated_count(bundle: Sequence[Trajectory], cover: CoverAtomSet,
                    window: tuple[float, float]) -> SeparationReport:
    """Greedy maximal family of pairwise separated trajectories.

    Two trajectories separate when at some shared sample time their states
    fall into different atoms of the partition induced by nearest-atom
    assignment. Since non-separation is an equivalence (equal itineraries),
    the greedy scan realizes the true maximum.
    """
    if not bundle:
        raise ValueError("empty bundle")
    times = bundle[0].times
    for tr in bundle[1:]:
        if tr.times.shape != times.shape or not np.allclose(tr.times, times):
            raise ValueError("trajectories must share sampling times")
    itineraries = []
    for tr in bundle:
        codes = assign_atoms([s.u for s in tr.states], cover, window)
        itineraries.append(tuple(codes))
    kept: list[int] = []
    for i, code in enumerate(itineraries):
        if all(code != itineraries[j] for j in kept):
            kept.append(i)
    tau = float(times[1] - times[0]) if times.size > 1 else 0.0
    return SeparationReport(cover.eps, tau, float(times[-1]), len(kept), len(bundle))


def brute_force_separated(itineraries: Sequence[tuple]) -> int:
    """Exhaustive maximum pairwise-separated subset (oracle, <= 16 items)."""
    n = len(itineraries)
    if n > 16:
        raise ValueError("exhaustive oracle limited to 16 trajectories")
    best = 0
    for mask in range(1, 1 << n):
        subset = [i for i in range(n) if mask >> i & 1]
        ok = all(
            itineraries[a] != itineraries[b]
            for ai, a in enumerate(subset) for b in subset[ai + 1:]
        )
        if ok:
            best = max(best, len(subset))
    return best


@dataclass(frozen=True)
class TopoEntropyReport:
    eps_list: tuple[float, ...]
    lengths: tuple[float, ...]
    tau_step: float
    T: float
    counts: dict            # (eps, L) -> tuple of N over horizons
    rates: dict             # (eps, L) -> fitted growth rate of log N in T
    h_per_eps: dict         # eps -> fitted per-length rate
    h_est: float
    diagnostics: dict


def _distinct_prefix_counts(itineraries: list[tuple]) -> list[int]:
    n_times = len(itineraries[0])
    return [len({code[: k + 1] for code in itineraries}) for k in range(n_times)]


def topological_entropy_report(ens: Ensemble, p: ModelParams,
                               eps_list: Sequence[float], T: float,
                               tau_step: float,
                               lengths: Sequence[float]) -> TopoEntropyReport:
    if len(ens.members) < 4:
        raise ValueError("need at least 4 trajectories")
    n_steps = round(T / tau_step)
    if abs(n_steps * tau_step - T) > 1e-9 * max(1.0, T):
        raise ValueError(f"T={T} is not an integer multiple of tau_step={tau_step}")

    result = evolve_many(ens.members, p, T, sample_every=tau_step, keep_states=True)
    times = result.times
    # snapshots[k][i]: member i at time k
    snapshots = result.states

    counts: dict = {}
    rates: dict = {}
    diagnostics: dict = {"monotone_in_eps": True, "submultiplicative_T": True}
    eps_sorted = sorted(eps_list)
    for L in lengths:
        window = (-L, L)
        per_eps_counts = {}
        for eps in eps_list:
            all_states = [snapshots[k][i].u
                          for i in range(len(ens.members))
                          for k in range(len(times))]
            cover = empirical_cover(all_states, window, eps)
            itineraries = []
            for i in range(len(ens.members)):
                states_i = [snapshots[k][i].u for k in range(len(times))]
                itineraries.append(tuple(assign_atoms(states_i, cover, window)))
            ncounts = _distinct_prefix_counts(itineraries)
            counts[(eps, L)] = tuple(ncounts)
            per_eps_counts[eps] = ncounts
            logs = np.log(np.asarray(ncounts, dtype=float))
            if times.size > 1 and len(set(ncounts)) > 1:
                rates[(eps, L)] = float(np.polyfit(times[: len(ncounts)], logs, 1)[0])
            else:
                rates[(eps, L)] = 0.0
            # submultiplicativity in T on the counted horizons
            for k1 in range(len(ncounts)):
                for k2 in range(len(ncounts) - k1):
                    lhs = math.log(ncounts[k1 + k2])
                    rhs = math.log(ncounts[k1]) + math.log(ncounts[k2])
                    if lhs > rhs + 1e-9:
                        diagnostics["submultiplicative_T"] = False
        for e1, e2 in zip(eps_sorted, eps_sorted[1:]):
            a = np.asarray(per_eps_counts[e1])
            b = np.asarray(per_eps_counts[e2])
            if np.any(b > a):
                diagnostics["monotone_in_eps"] = False

    h_per_eps = {}
    for eps in eps_list:
        rs = np.asarray([rates[(eps, L)] for L in lengths])
        ls = np.asarray(lengths, dtype=float)
        if np.allclose(rs, 0.0):
            h_per_eps[eps] = 0.0
        else:
            h_per_eps[eps] = float(np.polyfit(ls, rs, 1)[0])
    h_est = h_per_eps[min(eps_list)]
    return TopoEntropyReport(tuple(eps_list), tuple(lengths), tau_step, T,
                             counts, rates, h_per_eps, h_est, diagnostics)


def topological_entropy_estimate(ens: Ensemble, p: ModelParams,
                                 eps_list: Sequence[float], T: float,
                                 tau_step: float,
                                 lengths: Sequence[float]) -> float:
    """Per-unit-length topological entropy estimate at the finest radius."""
    return topological_entropy_report(ens, p, eps_list, T, tau_step, lengths).h_est


@dataclass(frozen=True)
class TimeUnitFit:
    """Fitted natural time unit tau* and contraction exponent kappa."""

    tau_star: float
    kappa: float
    constants: dict


def fit_time_unit(gamma: float, c_decay: float, c_grow_amp: float,
                  c_grow_rate: float) -> TimeUnitFit:
    """Minimize phi(tau) = c_decay e^{-gamma tau/80} + c_grow_amp e^{c_grow_rate tau}/gamma
    and report tau* = argmin, kappa = -log phi(tau*) / log gamma."""
    if gamma <= 1.0:
        raise ValueError("gamma must exceed 1 for a meaningful exponent")

    def phi(tau: float) -> float:
        return c_decay * math.exp(-gamma * tau / 80.0) \
            + c_grow_amp * math.exp(c_grow_rate * tau) / gamma

    hi = 80.0 / gamma * 60.0
    res = minimize_scalar(phi, bounds=(1e-6, hi), method="bounded",
                          options={"xatol": 1e-10})
    tau_star = float(res.x)
    val = phi(tau_star)
    kappa = -math.log(val) / math.log(gamma)
    return TimeUnitFit(tau_star, kappa, {
        "c_decay": c_decay, "c_grow_amp": c_grow_amp,
        "c_grow_rate": c_grow_rate, "gamma": gamma, "phi_min": val,
    })


def fit_difference_constants(ens: Ensemble, p: ModelParams, k_star: float,
                             delta: float = DELTA_MAX, pairs: int = 3,
                             t_max: float = 2.0,
                             c_high_momentum: float = 1.0) -> dict:
    """Measure the difference-evolution constants feeding the tau* fit.

    For member pairs: the full difference norm growth gives the rate and
    amplitude of the growing term; the high-frequency part against the
    decay envelope e^{-gamma t/80} plus the growing term gives the decay
    prefactor by nonnegative least squares.
    """
    gamma = gamma_value(p.eta, k_star, c_high_momentum)
    eta = p.eta
    hp = highpass(k_star)
    grow_rates = []
    amp_rows = []
    basis_rows = []
    n_pairs = min(pairs, len(ens.members) // 2)
    for i in range(n_pairs):
        a, b = ens.members[2 * i], ens.members[2 * i + 1]
        traj = evolve_difference(a, b, p, t_max, sample_every=t_max / 8.0)
        d0 = sobolev_norm("h2", traj.states[0], delta, eta)
        if d0 <= 0:
            continue
        full = np.asarray([
            sobolev_norm("h2", s, delta, eta) for s in traj.states
        ])
        hi = np.asarray([
            sobolev_norm(
                "h2",
                fd.FieldPair(spectral_apply(hp, s.u), spectral_apply(hp, s.v)),
                delta, eta,
            )
            for s in traj.states
        ])
        t = traj.times
        pos = full > 0
        if pos.sum() < 3:
            continue
        rate = float(np.polyfit(t[pos], np.log(full[pos]), 1)[0])
        grow_rates.append(rate)
        for k in range(t.size):
            basis_rows.append((math.exp(-gamma * t[k] / 80.0),
                               math.exp(max(rate, 0.0) * t[k]) / gamma))
            amp_rows.append(hi[k] / d0)
    if not basis_rows:
        raise ValueError("no usable member pairs for the constant fit")
    c4 = max(grow_rates)
    A = np.asarray(basis_rows)
    y = np.asarray(amp_rows)
    coef, _ = nnls(A, y)
    return {
        "c_decay": float(max(coef[0], 1e-12)),
        "c_grow_amp": float(max(coef[1], 1e-12)),
        "c_grow_rate": float(max(c4, 1e-6)),
        "gamma": gamma,
    }
