"""Time evolution of the damped hyperbolic system and ensemble generation.

System:  du/dt = v,  eta^2 dv/dt = -v + u'' + U'(u),  U(s) = s^2/2 - s^4/4.

Two interchangeable steppers share the classical RK4 scheme:

* ``spectral``: numpy, FFT Laplacian. Exact spatial representation of
  resolved Fourier modes; the default for analysis-scale runs.
* ``finite_difference``: a fused numba kernel batched over ensemble
  members. Roughly two orders of magnitude faster here; used for long
  burn-in runs.

Stability: dt <= min(cfl_factor * eta * dx, 0.5 * eta^2). The first term
is the CFL bound for wave speed 1/eta, the second keeps the stiff -v/eta^2
relaxation inside the RK4 stability region.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Literal, Sequence

import numpy as np

from .field import Field, FieldPair, Grid, differentiate
from .params import ETA0_MAX

with warnings.catch_warnings():
    warnings.filterwarnings("ignore", message=".*TBB.*")
    from numba import config as _numba_config
    from numba import njit, prange

# the sandbox TBB is too old for numba; skip it instead of warning
_numba_config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

BLOWUP_THRESHOLD = 1.0e6
_CHECK_EVERY = 2000


class DivergenceError(RuntimeError):
    """Integrator blow-up; the true dynamics is bounded, so crossing the
    threshold flags numerical failure, not physics."""

    def __init__(self, time: float, amplitude: float, member: int = 0):
        self.time = time
        self.amplitude = amplitude
        self.member = member
        super().__init__(
            f"divergence at t={time:.6g}: |u| reached {amplitude:.3g} "
            f"(member {member})"
        )


def potential(s):
    return s * s / 2.0 - s ** 4 / 4.0


def potential_prime(s):
    return s - s ** 3


def potential_double_prime(s):
    return 1.0 - 3.0 * s * s


@dataclass(frozen=True)
class ModelParams:
    """Model and integrator parameters.

    The potential is fixed to U(s) = s^2/2 - s^4/4; ``mu_f1`` is the small
    cross-term constant of the derivative functional, ``alpha`` the
    coercive weight parameter.
    """

    eta: float = 0.1
    eta0: float = ETA0_MAX
    alpha: float = 0.25
    mu_f1: float = 0.05
    dt: float | None = None
    cfl_factor: float = 0.5
    scheme: Literal["spectral", "finite_difference"] = "spectral"

    def __post_init__(self) -> None:
        if not self.eta0 <= ETA0_MAX * (1 + 1e-12):
            raise ValueError(
                f"eta0={self.eta0} exceeds 1/sqrt(40) = {ETA0_MAX:.6f}"
            )
        if not 0.0 < self.eta < self.eta0:
            raise ValueError(
                f"eta={self.eta} outside (0, eta0={self.eta0:.6f})"
            )
        if not 0.0 < self.alpha <= 0.5:
            raise ValueError(f"alpha={self.alpha} outside (0, 1/2]")
        if self.mu_f1 <= 0:
            raise ValueError("mu_f1 must be positive")
        if not 0.0 < self.cfl_factor <= 0.5:
            raise ValueError(f"cfl_factor={self.cfl_factor} outside (0, 0.5]")
        if self.scheme not in ("spectral", "finite_difference"):
            raise ValueError(f"unknown scheme {self.scheme!r}")

    def max_time_step(self, grid: Grid) -> float:
        return min(self.cfl_factor * self.eta * grid.dx, 0.5 * self.eta ** 2)

    def time_step(self, grid: Grid) -> float:
        bound = self.max_time_step(grid)
        if self.dt is None:
            return bound
        if self.dt > bound * (1 + 1e-12):
            raise ValueError(
                f"dt={self.dt} violates dt <= min(cfl*eta*dx, eta^2/2) = {bound:.3e}"
            )
        return self.dt


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    states: list[FieldPair]

    def __post_init__(self) -> None:
        t = np.asarray(self.times, dtype=float)
        if len(self.states) != t.size:
            raise ValueError("times and states length mismatch")
        if t.size > 1 and not np.all(np.diff(t) > 0):
            raise ValueError("times must be strictly increasing")
        g = self.states[0].grid
        for s in self.states:
            if s.grid != g:
                raise ValueError("all states must share one grid")
        object.__setattr__(self, "times", t)

    @property
    def grid(self) -> Grid:
        return self.states[0].grid


@dataclass(frozen=True, eq=False)
class Ensemble:
    members: list[FieldPair]
    burn_in_time: float
    seed: int
    params: ModelParams

    def __post_init__(self) -> None:
        if not self.members:
            raise ValueError("ensemble needs at least one member")
        if self.burn_in_time < 0:
            raise ValueError("burn_in_time must be >= 0")
        g = self.members[0].grid
        for m in self.members:
            if m.grid != g:
                raise ValueError("all members must share one grid")

    @property
    def grid(self) -> Grid:
        return self.members[0].grid


def rhs(state: FieldPair, p: ModelParams) -> FieldPair:
    """(v, (-v + u'' + U'(u)) / eta^2)."""
    g = state.grid
    upp = differentiate(state.u, 2, scheme=p.scheme).samples
    dv = (-state.v.samples + upp + potential_prime(state.u.samples)) / p.eta ** 2
    return FieldPair(Field(g, state.v.samples.copy()), Field(g, dv))


@njit(parallel=True, fastmath=True, cache=True)
def _rk4_fd_kernel(u, v, dt, nsteps, inv_eta2, inv_dx2, nonlinear):  # pragma: no cover
    m, n = u.shape
    for mi in prange(m):
        uu = u[mi]
        vv = v[mi]
        k1u = np.empty(n)
        k1v = np.empty(n)
        k2u = np.empty(n)
        k2v = np.empty(n)
        k3u = np.empty(n)
        k3v = np.empty(n)
        k4v = np.empty(n)
        su = np.empty(n)
        sv = np.empty(n)
        for _ in range(nsteps):
            for i in range(n):
                ip = i + 1 if i + 1 < n else 0
                im = i - 1 if i >= 1 else n - 1
                lap = (uu[ip] - 2.0 * uu[i] + uu[im]) * inv_dx2
                f = uu[i] - uu[i] ** 3 if nonlinear else 0.0
                k1u[i] = vv[i]
                k1v[i] = (lap + f - vv[i]) * inv_eta2
            for i in range(n):
                su[i] = uu[i] + 0.5 * dt * k1u[i]
                sv[i] = vv[i] + 0.5 * dt * k1v[i]
            for i in range(n):
                ip = i + 1 if i + 1 < n else 0
                im = i - 1 if i >= 1 else n - 1
                lap = (su[ip] - 2.0 * su[i] + su[im]) * inv_dx2
                f = su[i] - su[i] ** 3 if nonlinear else 0.0
                k2u[i] = sv[i]
                k2v[i] = (lap + f - sv[i]) * inv_eta2
            for i in range(n):
                su[i] = uu[i] + 0.5 * dt * k2u[i]
                sv[i] = vv[i] + 0.5 * dt * k2v[i]
            for i in range(n):
                ip = i + 1 if i + 1 < n else 0
                im = i - 1 if i >= 1 else n - 1
                lap = (su[ip] - 2.0 * su[i] + su[im]) * inv_dx2
                f = su[i] - su[i] ** 3 if nonlinear else 0.0
                k3u[i] = sv[i]
                k3v[i] = (lap + f - sv[i]) * inv_eta2
            for i in range(n):
                su[i] = uu[i] + dt * k3u[i]
                sv[i] = vv[i] + dt * k3v[i]
            for i in range(n):
                ip = i + 1 if i + 1 < n else 0
                im = i - 1 if i >= 1 else n - 1
                lap = (su[ip] - 2.0 * su[i] + su[im]) * inv_dx2
                f = su[i] - su[i] ** 3 if nonlinear else 0.0
                k4v[i] = (lap + f - sv[i]) * inv_eta2
            for i in range(n):
                uu[i] = uu[i] + (dt / 6.0) * (k1u[i] + 2.0 * k2u[i] + 2.0 * k3u[i] + sv[i])
                vv[i] = vv[i] + (dt / 6.0) * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i])


def _rk4_spectral_steps(U, V, grid, p, dt, nsteps, nonlinear):
    """Batched RK4 with spectral Laplacian; arrays (m, n) updated in place."""
    k2 = grid.wavenumbers ** 2
    inv_eta2 = 1.0 / p.eta ** 2
    n = grid.n

    def rhs_arrays(u, v):
        lap = np.fft.irfft(-(k2) * np.fft.rfft(u, axis=1), axis=1, n=n)
        if nonlinear:
            lap = lap + (u - u ** 3)
        return v, (lap - v) * inv_eta2

    # blow-up is detected after the chunk; let overflow produce inf/nan
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(nsteps):
            k1u, k1v = rhs_arrays(U, V)
            k2u, k2v = rhs_arrays(U + 0.5 * dt * k1u, V + 0.5 * dt * k1v)
            k3u, k3v = rhs_arrays(U + 0.5 * dt * k2u, V + 0.5 * dt * k2v)
            k4u, k4v = rhs_arrays(U + dt * k3u, V + dt * k3v)
            U += (dt / 6.0) * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
            V += (dt / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
    return U, V


def _advance(U, V, grid, p, dt, nsteps, nonlinear, t_now):
    """Advance (U, V) by nsteps, checking for blow-up in chunks."""
    done = 0
    while done < nsteps:
        chunk = min(_CHECK_EVERY, nsteps - done)
        if p.scheme == "finite_difference":
            _rk4_fd_kernel(U, V, dt, chunk, 1.0 / p.eta ** 2, 1.0 / grid.dx ** 2, nonlinear)
        else:
            _rk4_spectral_steps(U, V, grid, p, dt, chunk, nonlinear)
        done += chunk
        amax = float(np.max(np.abs(U)))
        if not math.isfinite(amax) or amax > BLOWUP_THRESHOLD:
            member = int(np.argmax(np.max(np.abs(U), axis=1)))
            raise DivergenceError(t_now + done * dt, amax, member)
    return U, V


def _sample_plan(p: ModelParams, grid: Grid, t_final: float, sample_every: float | None):
    """Output times plus per-interval (nsteps, dt) landing exactly on them."""
    dt_max = p.time_step(grid)
    if t_final <= 0:
        return np.array([0.0]), []
    if sample_every is None or sample_every >= t_final:
        steps = max(1, math.ceil(t_final / dt_max * (1 - 1e-12)))
        return np.array([0.0, t_final]), [(steps, t_final / steps)]
    n_out = math.ceil(t_final / sample_every * (1 - 1e-12))
    times = [0.0]
    intervals = []
    for i in range(n_out):
        t_hi = min((i + 1) * sample_every, t_final)
        span = t_hi - times[-1]
        m = max(1, math.ceil(span / dt_max * (1 - 1e-12)))
        intervals.append((m, span / m))
        times.append(t_hi)
    return np.array(times), intervals


@dataclass(frozen=True, eq=False)
class BatchResult:
    times: np.ndarray
    observables: np.ndarray | None
    states: list[list[FieldPair]] | None
    final_states: list[FieldPair]


def evolve_many(
    states: Sequence[FieldPair],
    p: ModelParams,
    t_final: float,
    sample_every: float | None = None,
    observable: Callable[[FieldPair], float] | None = None,
    keep_states: bool = False,
) -> BatchResult:
    """Evolve several states through one batched stepper.

    Members do not interact; batching only amortizes stepper overhead.
    With ``observable`` given, only its per-member values are recorded at
    the sample times; with ``keep_states`` the sampled states themselves.
    """
    grid = states[0].grid
    for s in states:
        if s.grid != grid:
            raise ValueError("all states must share one grid")
    U = np.stack([s.u.samples for s in states]).astype(float)
    V = np.stack([s.v.samples for s in states]).astype(float)

    times, intervals = _sample_plan(p, grid, t_final, sample_every)

    def snapshot():
        pairs = [FieldPair(Field(grid, U[i].copy()), Field(grid, V[i].copy()))
                 for i in range(U.shape[0])]
        return pairs

    obs_rows = []
    state_rows: list[list[FieldPair]] | None = [] if keep_states else None
    current = snapshot()
    if observable is not None:
        obs_rows.append([observable(s) for s in current])
    if keep_states:
        state_rows.append(current)

    t_now = 0.0
    for idx, (nsteps, dt) in enumerate(intervals):
        _advance(U, V, grid, p, dt, nsteps, nonlinear=True, t_now=t_now)
        t_now = times[idx + 1]
        current = snapshot()
        if observable is not None:
            obs_rows.append([observable(s) for s in current])
        if keep_states:
            state_rows.append(current)

    obs = np.asarray(obs_rows) if observable is not None else None
    return BatchResult(times, obs, state_rows, current)


def _evolve_single(state, p, t_final, sample_every, nonlinear):
    grid = state.grid
    U = state.u.samples.copy()[None, :]
    V = state.v.samples.copy()[None, :]
    times, intervals = _sample_plan(p, grid, t_final, sample_every)
    out = [FieldPair(Field(grid, U[0].copy()), Field(grid, V[0].copy()))]
    t_now = 0.0
    for idx, (nsteps, dt) in enumerate(intervals):
        _advance(U, V, grid, p, dt, nsteps, nonlinear=nonlinear, t_now=t_now)
        t_now = times[idx + 1]
        out.append(FieldPair(Field(grid, U[0].copy()), Field(grid, V[0].copy())))
    return Trajectory(times[: len(out)], out)


def evolve(state: FieldPair, p: ModelParams, t_final: float,
           sample_every: float | None = None) -> Trajectory:
    """Nonlinear flow of the full system from ``state`` up to ``t_final``."""
    return _evolve_single(state, p, t_final, sample_every, nonlinear=True)


def evolve_linear(state: FieldPair, p: ModelParams, t_final: float,
                  sample_every: float | None = None) -> Trajectory:
    """Flow without the potential term: du=v, eta^2 dv = -v + u''."""
    return _evolve_single(state, p, t_final, sample_every, nonlinear=False)


def divided_difference(u1: np.ndarray, u2: np.ndarray) -> np.ndarray:
    """Exact divided difference of U': (U'(u1)-U'(u2))/(u1-u2) without the
    0/0 singularity, = 1 - (u1^2 + u1 u2 + u2^2)."""
    return 1.0 - (u1 * u1 + u1 * u2 + u2 * u2)


def evolve_difference(a: FieldPair, b: FieldPair, p: ModelParams, t_final: float,
                      sample_every: float | None = None) -> Trajectory:
    """Evolve the difference of the flows from a and b.

    Integrates the coupled system (two full solutions plus the difference
    pair driven by the divided-difference coefficient) so the result
    matches evolve(a) - evolve(b) up to integrator tolerance.
    """
    grid = a.grid
    if b.grid != grid:
        raise ValueError("a and b must share one grid")
    k2 = grid.wavenumbers ** 2
    inv_eta2 = 1.0 / p.eta ** 2
    n = grid.n
    use_fd = p.scheme == "finite_difference"
    inv_dx2 = 1.0 / grid.dx ** 2

    def lap(arr):
        if use_fd:
            return (np.roll(arr, -1, axis=-1) - 2.0 * arr + np.roll(arr, 1, axis=-1)) * inv_dx2
        return np.fft.irfft(-(k2) * np.fft.rfft(arr, axis=-1), axis=-1, n=n)

    def rhs_all(y):
        u1, v1, u2, v2, du, dv = y
        l1 = lap(u1) + potential_prime(u1)
        l2 = lap(u2) + potential_prime(u2)
        m = divided_difference(u1, u2)
        ld = lap(du) + m * du
        return np.stack([
            v1, (l1 - v1) * inv_eta2,
            v2, (l2 - v2) * inv_eta2,
            dv, (ld - dv) * inv_eta2,
        ])

    y = np.stack([
        a.u.samples, a.v.samples,
        b.u.samples, b.v.samples,
        a.u.samples - b.u.samples, a.v.samples - b.v.samples,
    ]).astype(float)

    times, intervals = _sample_plan(p, grid, t_final, sample_every)
    out = [FieldPair(Field(grid, y[4].copy()), Field(grid, y[5].copy()))]
    t_now = 0.0
    for idx, (nsteps, dt) in enumerate(intervals):
        with np.errstate(over="ignore", invalid="ignore"):
            for _ in range(nsteps):
                s1 = rhs_all(y)
                s2 = rhs_all(y + 0.5 * dt * s1)
                s3 = rhs_all(y + 0.5 * dt * s2)
                s4 = rhs_all(y + dt * s3)
                y += (dt / 6.0) * (s1 + 2.0 * s2 + 2.0 * s3 + s4)
        t_now = times[idx + 1]
        amax = float(np.max(np.abs(y[[0, 2]])))
        if not math.isfinite(amax) or amax > BLOWUP_THRESHOLD:
            raise DivergenceError(t_now, amax)
        out.append(FieldPair(Field(grid, y[4].copy()), Field(grid, y[5].copy())))
    return Trajectory(times[: len(out)], out)


def random_initial_state(grid: Grid, rng: np.random.Generator,
                         k_max: float = 4.0, coeff: float = 0.5,
                         u_clip: float = 2.0, v_clip: float = 1.0) -> FieldPair:
    """Random Fourier series with modes |k| <= k_max, coefficients uniform
    in [-coeff, coeff], clipped to the stated sup bounds."""
    x = grid.points
    k_fund = 2.0 * np.pi / grid.length
    m_max = int(k_max / k_fund)

    def series():
        a = rng.uniform(-coeff, coeff, m_max + 1)
        b = rng.uniform(-coeff, coeff, m_max + 1)
        out = np.full(grid.n, a[0])
        for m in range(1, m_max + 1):
            out = out + a[m] * np.cos(m * k_fund * x) + b[m] * np.sin(m * k_fund * x)
        return out

    u = np.clip(series(), -u_clip, u_clip)
    v = np.clip(series(), -v_clip, v_clip)
    return FieldPair(Field(grid, u), Field(grid, v))


def generate_ensemble(count: int, p: ModelParams, burn_in: float, seed: int,
                      grid: Grid | None = None) -> Ensemble:
    """Burn in ``count`` random initial states and collect the end states.

    Deterministic given ``seed``: member i draws from default_rng([seed, i]),
    so results do not depend on batching or scheduling.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if burn_in < 0:
        raise ValueError("burn_in must be >= 0")
    if grid is None:
        from .field import default_grid
        grid = default_grid()
    initial = [
        random_initial_state(grid, np.random.default_rng([seed, i]))
        for i in range(count)
    ]
    if burn_in == 0:
        return Ensemble(initial, 0.0, seed, p)
    result = evolve_many(initial, p, burn_in)
    return Ensemble(result.final_states, burn_in, seed, p)
