"""Constructive eps-covers of C^2 function classes in the W^{1,inf} norm.

The cover of the class F(eps, A, B, C) on [-R, R] (|f| <= A, |f'| <= B,
|f''| <= C, |f(+-R)| <= eps) consists of continuous piecewise-linear
functions on the step grid xi = eps/(10 C) whose node values are integer
multiples of eta = xi * tau with slope quantum tau = eps/10, pinned to 0
at +-R. The family is finite, at most (2 n* + 1)^(2 m* - 1) members with
n* = ceil(A/eta) + 1 and m* = R/xi, but far too large to enumerate; it is
represented implicitly by the deterministic march that produces, for any
admissible f, the matching atom together with per-step certificates.

Covers of ensembles of grid fields are produced greedily and certify
upper bounds on covering numbers, which is all the entropy estimates use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from itertools import combinations
from typing import Callable, Sequence

import numpy as np

from . import field as fd
from .field import Field, WindowError, differentiate
from .spectral import smoothstep_up


class AdjacencyError(ValueError):
    pass


class MarchError(RuntimeError):
    pass


@dataclass(frozen=True)
class CoverScales:
    """Discretization quanta of the piecewise-linear cover."""

    xi: float          # step length eps/(10 C)
    tau: float         # slope quantum eps/10
    eta: float         # value quantum xi * tau (exact product)
    nu: float          # residual floor factor 1/(40 C)
    gain_mu: float     # per-step endpoint gain factor 1/(200 C)
    n_star: int        # value-grid half-count ceil(A/eta) + 1

    @classmethod
    def derive(cls, eps: float, A: float, C: float) -> "CoverScales":
        xi = eps / (10.0 * C)
        tau = eps / 10.0
        eta = xi * tau
        return cls(
            xi=xi,
            tau=tau,
            eta=eta,
            nu=1.0 / (40.0 * C),
            gain_mu=1.0 / (200.0 * C),
            n_star=int(math.ceil(A / eta)) + 1,
        )


@dataclass(frozen=True)
class FunctionClassBounds:
    """Class F(eps, A, B, C) on [-R, R] with R = m* xi pinned to [40, 41]."""

    eps: float
    A: float
    B: float
    C: float
    delta_end: float | None = None

    def __post_init__(self) -> None:
        if not 0.0 < self.eps <= self.A:
            raise ValueError(f"need 0 < eps <= A, got eps={self.eps}, A={self.A}")
        if self.eps >= 1.0:
            raise ValueError("eps must be < 1")
        if self.C < 1.0:
            raise ValueError("curvature bound C must be >= 1")
        if self.B < 0:
            raise ValueError("slope bound B must be >= 0")
        if self.delta_end is None:
            object.__setattr__(self, "delta_end", self.eps)

    @property
    def scales(self) -> CoverScales:
        return CoverScales.derive(self.eps, self.A, self.C)

    @property
    def m_star(self) -> int:
        return int(math.ceil(40.0 / self.scales.xi))

    @property
    def R(self) -> float:
        r = self.m_star * self.scales.xi
        if r > 41.0 + 1e-9:
            raise ValueError(f"half-window R={r} left [40, 41]; eps too large")
        return r


@dataclass(frozen=True)
class PLFunction:
    """Continuous piecewise-linear function on the xi-grid over [-R, R];
    node values are the integer indices times the value quantum eta."""

    x_left: float
    xi: float
    eta: float
    node_indices: tuple[int, ...]
    endpoint_zero: bool = False

    def __post_init__(self) -> None:
        if self.endpoint_zero and (self.node_indices[0] != 0 or self.node_indices[-1] != 0):
            raise ValueError("endpoint_zero set but endpoints are nonzero")

    @property
    def breakpoints(self) -> np.ndarray:
        return self.x_left + self.xi * np.arange(len(self.node_indices))

    @property
    def node_values(self) -> np.ndarray:
        return self.eta * np.asarray(self.node_indices, dtype=float)

    @property
    def tau(self) -> float:
        return self.eta / self.xi

    @property
    def slopes(self) -> np.ndarray:
        idx = np.asarray(self.node_indices)
        return self.tau * np.diff(idx).astype(float)

    def evaluate(self, x) -> np.ndarray:
        return np.interp(np.asarray(x, dtype=float), self.breakpoints, self.node_values)

    def slope_at(self, x) -> np.ndarray:
        xq = np.asarray(x, dtype=float)
        seg = np.clip(
            np.searchsorted(self.breakpoints, xq, side="right") - 1,
            0, len(self.node_indices) - 2,
        )
        return self.slopes[seg]


@dataclass(frozen=True)
class OneStep:
    j: int
    slope: float
    certified: float


def _integer_part(x: float) -> int:
    """The unique integer in [x-1, x): exact integers stay themselves.

    This is the quantization that keeps the line's slope excess over
    f'(0) inside (tau, 2*tau], which the per-step slope bound 3*eps/10
    and the endpoint gain both require.
    """
    return math.floor(x)


def one_step_line(f0: float, f_slope: float, delta_in: float,
                  scales: CoverScales, slope_bound: float | None = None) -> OneStep:
    """Quantized local line for one march step.

    For f0 >= 0 the slope index is j = [f_slope/tau + 2] with the integer
    part above, so the line overshoots the local slope by between tau and
    2*tau and eats into the value offset; f0 < 0 is handled by the
    symmetric mirror. The certified endpoint bound is
    max(delta_in - gain_mu * eps^2, nu * eps^2) with eps = 10 * tau.
    """
    eps = 10.0 * scales.tau
    if f0 >= 0:
        j = _integer_part(f_slope / scales.tau + 2.0)
    else:
        j = -_integer_part(-f_slope / scales.tau + 2.0)
    if slope_bound is not None:
        j_max = slope_bound / scales.tau + 2.0
        if abs(j) > j_max + 1e-9:
            raise MarchError(
                f"slope index {j} exceeds the admissible band +-{j_max:.6g}; "
                "input violates the class slope bound"
            )
    certified = max(delta_in - scales.gain_mu * eps ** 2, scales.nu * eps ** 2)
    return OneStep(j, j * scales.tau, certified)


@dataclass(frozen=True)
class MarchCertificate:
    """Per-step records of one half-march (left-to-right in its own frame)."""

    j_values: tuple[int, ...]
    deltas_in: tuple[float, ...]
    deltas_out: tuple[float, ...]


def _march_half(f_nodes: np.ndarray, fp_nodes: np.ndarray, scales: CoverScales,
                eps: float, delta0: float, steps: int,
                slope_bound: float | None) -> tuple[list[int], MarchCertificate]:
    """March `steps` quantized segments following (f, f') node data.

    Returns the integer node indices (length steps+1, starting at 0) and
    the certificate trail.
    """
    idx = [0]
    js: list[int] = []
    d_in: list[float] = []
    d_out: list[float] = []
    delta = delta0
    h = 0.0
    for m in range(steps):
        f0 = f_nodes[m] - h
        step = one_step_line(f0, fp_nodes[m], delta, scales, slope_bound)
        js.append(step.j)
        d_in.append(delta)
        d_out.append(step.certified)
        idx.append(idx[-1] + step.j)
        h = idx[-1] * scales.eta
        delta = step.certified
    return idx, MarchCertificate(tuple(js), tuple(d_in), tuple(d_out))


@dataclass(frozen=True, eq=False)
class MarchResult:
    atom: PLFunction
    left: MarchCertificate
    right: MarchCertificate
    middle_slope_index: int


def march_match(f: Callable, fprime: Callable, bounds: FunctionClassBounds) -> MarchResult:
    """Run the two-sided constructive march for one admissible f.

    Left half covers [-R, 0] in m* steps, right half [xi, R] in m* - 1
    mirrored steps, and the middle segment [0, xi] joins the two ends;
    its slope is automatically an integer multiple of tau.
    """
    sc = bounds.scales
    m_star = bounds.m_star
    R = bounds.R
    nodes = -R + sc.xi * np.arange(2 * m_star + 1)

    f_all = np.asarray(f(nodes), dtype=float)
    fp_all = np.asarray(fprime(nodes), dtype=float)

    left_idx, left_cert = _march_half(
        f_all[:m_star + 1], fp_all[:m_star + 1], sc, bounds.eps,
        delta0=bounds.delta_end, steps=m_star, slope_bound=bounds.B,
    )

    # mirror x -> -x: right march follows F(y) = f(-y) from y = -R
    f_mirror = f_all[::-1]
    fp_mirror = -fp_all[::-1]
    right_idx, right_cert = _march_half(
        f_mirror[:m_star], fp_mirror[:m_star], sc, bounds.eps,
        delta0=bounds.delta_end, steps=m_star - 1, slope_bound=bounds.B,
    )

    # left nodes cover -R..0; the mirrored march read backwards covers
    # xi..R; the gap [0, xi] is the middle segment joining the two ends
    full = list(left_idx) + list(reversed(right_idx))
    atom = PLFunction(
        x_left=-R, xi=sc.xi, eta=sc.eta,
        node_indices=tuple(full), endpoint_zero=True,
    )
    middle_j = full[m_star + 1] - full[m_star]
    return MarchResult(atom, left_cert, right_cert, middle_j)


def pl_cover_cardinality(bounds: FunctionClassBounds) -> int:
    """(2 n* + 1)^(2 m* - 1): the exact counting bound for the family."""
    sc = bounds.scales
    return (2 * sc.n_star + 1) ** (2 * bounds.m_star - 1)


@dataclass(frozen=True, eq=False)
class CoverAtomSet:
    """An eps-cover: either the implicit piecewise-linear grid family
    (matched by the march), a bridged family, or explicit empirical
    centers."""

    eps: float
    window: tuple[float, float]
    cardinality: int
    kind: str
    atoms: list = dc_field(default_factory=list)
    bounds: FunctionClassBounds | None = None
    matcher: Callable | None = None

    @property
    def count(self) -> int:
        return len(self.atoms) if self.atoms else self.cardinality

    def match(self, f: Callable, fprime: Callable):
        if self.matcher is None:
            raise ValueError(f"{self.kind} cover has no matcher")
        return self.matcher(f, fprime)


def build_pl_cover(bounds: FunctionClassBounds) -> CoverAtomSet:
    """The quantized piecewise-linear cover of F(eps, A, B, C) on [-R, R].

    Atoms vanish at +-R; every admissible f is matched within eps in both
    value and slope by the march. The family is implicit (its cardinality
    bound is astronomically large); ``match`` runs the march.
    """
    R = bounds.R
    return CoverAtomSet(
        eps=bounds.eps,
        window=(-R, R),
        cardinality=pl_cover_cardinality(bounds),
        kind="pl_grid",
        bounds=bounds,
        matcher=lambda f, fp: march_match(f, fp, bounds),
    )


@dataclass(frozen=True)
class BridgeProfile:
    """Smooth ramp psi: 0 for x < R - width, 1 for x >= R."""

    R: float
    width: float = 3.0

    def value(self, x) -> np.ndarray:
        t = (np.asarray(x, dtype=float) - (self.R - self.width)) / self.width
        return smoothstep_up(t)

    def deriv(self, x, h: float = 1e-6) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return (self.value(x + h) - self.value(x - h)) / (2.0 * h)

    def deriv2(self, x, h: float = 1e-4) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return (self.value(x + h) - 2.0 * self.value(x) + self.value(x - h)) / h ** 2

    def sup_deriv(self) -> float:
        t = np.linspace(self.R - self.width, self.R, 4001)
        return float(np.abs(self.deriv(t)).max())

    def sup_deriv2(self) -> float:
        t = np.linspace(self.R - self.width, self.R, 4001)
        return float(np.abs(self.deriv2(t)).max())


@dataclass(frozen=True, eq=False)
class Bridge:
    """Interpolating function g = u0 - psi(x) mR - psi(-x) mL with exact
    endpoint matching g(-R) = gL(-R), g(R) = gR(R)."""

    u0: Field
    profile: BridgeProfile
    mismatch_left: float
    mismatch_right: float

    def value(self, x) -> np.ndarray:
        base = fd.eval_periodic(self.u0, x)
        x = np.asarray(x, dtype=float)
        return base - self.profile.value(x) * self.mismatch_right \
            - self.profile.value(-x) * self.mismatch_left

    def deriv(self, x) -> np.ndarray:
        du0 = differentiate(self.u0, 1)
        base = fd.eval_periodic(du0, x)
        x = np.asarray(x, dtype=float)
        return base - self.profile.deriv(x) * self.mismatch_right \
            + self.profile.deriv(-x) * self.mismatch_left

    def as_field(self) -> Field:
        g = self.u0.grid
        return Field(g, np.asarray(self.value(g.points), dtype=float))


def bridge_glue(u0: Field, gL: Field, gR: Field,
                psi: BridgeProfile) -> Bridge:
    """Correct u0 at the window ends so it matches gL at -R and gR at R.

    Assumes u0 lies within eps of gL on [-R, 0] and of gR on [0, R] in the
    W^{1,inf} sense (the caller certifies the class is nonempty). The
    corrections live on [R-width, R] and its mirror, so the interior is
    untouched and |g - gR| <= 2 eps on [0, R].
    """
    R = psi.R
    mR = float(fd.eval_periodic(u0, R) - fd.eval_periodic(gR, R))
    mL = float(fd.eval_periodic(u0, -R) - fd.eval_periodic(gL, -R))
    return Bridge(u0, psi, mL, mR)


def bridge_constants(psi: BridgeProfile, eps: float):
    """Certified degradation constants of the bridge construction:
    values within a*eps, slopes within b*eps, added curvature at most c."""
    a = 2.0
    b = 1.0 + psi.sup_deriv()
    c = psi.sup_deriv2() * eps
    return a, b, c


def connection_class_bounds(eps: float, G_curv: float,
                            psi: BridgeProfile | None = None) -> FunctionClassBounds:
    """Class bounds for u - g with u in the eps-neighborhood class and g
    the bridge: A = B = (a+b) eps, C = c + G."""
    if psi is None:
        psi = BridgeProfile(R=40.0)
    a, b, c = bridge_constants(psi, eps)
    return FunctionClassBounds(eps=eps, A=(a + b) * eps, B=(a + b) * eps,
                               C=max(1.0, c + G_curv))


def connection_count(eps: float, G_curv: float,
                     psi: BridgeProfile | None = None) -> int:
    """K(eps, G): the constructive connecting-family cardinality. It is
    pessimistic whenever the neighborhood class happens to be empty."""
    return pl_cover_cardinality(connection_class_bounds(eps, G_curv, psi))


@dataclass(frozen=True, eq=False)
class BridgedAtom:
    bridge: Bridge
    pl: PLFunction

    def value(self, x) -> np.ndarray:
        return self.bridge.value(x) + self.pl.evaluate(x)

    def deriv(self, x) -> np.ndarray:
        return self.bridge.deriv(x) + self.pl.slope_at(x)


def connect_cover(gL: Field, gR: Field, G_curv: float, eps: float,
                  u0: Field) -> CoverAtomSet:
    """Cover of the class of C^2 functions within eps of gL on the left
    half-window and of gR on the right, with exact endpoint matching.

    ``u0`` is the bridge witness (any member of the class; the class is
    assumed nonempty). Atoms are bridged functions g + h with h from the
    quantized PL family; every atom takes the values gL(-R) and gR(R) at
    the window ends.
    """
    bounds = connection_class_bounds(eps, G_curv)
    R = bounds.R
    psi = BridgeProfile(R=R)
    bridge = bridge_glue(u0, gL, gR, psi)

    def matcher(u_fn: Callable, up_fn: Callable) -> BridgedAtom:
        f = lambda x: np.asarray(u_fn(x), dtype=float) - bridge.value(x)
        fp = lambda x: np.asarray(up_fn(x), dtype=float) - bridge.deriv(x)
        res = march_match(f, fp, bounds)
        return BridgedAtom(bridge, res.atom)

    return CoverAtomSet(
        eps=eps,
        window=(-R, R),
        cardinality=pl_cover_cardinality(bounds),
        kind="bridged",
        bounds=bounds,
        matcher=matcher,
    )


@dataclass(frozen=True)
class MergeCertificate:
    count_left: int
    count_right: int
    k_eps: int
    bound: int


def merge_covers(left: CoverAtomSet, right: CoverAtomSet, eps: float,
                 curvature: float) -> MergeCertificate:
    """Submultiplicative certificate S * S' * K for adjacent windows.

    K depends only on (eps, curvature) through the connecting family, not
    on the window lengths.
    """
    if abs(left.window[1] - right.window[0]) > 1e-9:
        raise AdjacencyError(
            f"windows {left.window} and {right.window} are not adjacent"
        )
    k = connection_count(eps, curvature)
    return MergeCertificate(left.count, right.count, k, left.count * right.count * k)


def _member_derivatives(members: Sequence[Field], scheme: str) -> list[np.ndarray]:
    return [differentiate(m, 1, scheme=scheme).samples for m in members]


def w1inf_distance_arrays(u1, d1, u2, d2, mask) -> float:
    return float(max(np.abs((u1 - u2)[mask]).max(), np.abs((d1 - d2)[mask]).max()))


def greedy_cover_indices(members: Sequence[Field], window: tuple[float, float],
                         eps: float, scheme: str = "spectral") -> list[int]:
    """First-come greedy center selection in W^{1,inf} on the window.

    Members are scanned in index order; a new ball opens when no existing
    center lies within eps. Deterministic given the input order.
    """
    if not members:
        raise ValueError("need at least one member")
    grid = members[0].grid
    mask = fd.window_mask(grid, window[0], window[1])
    if not mask.any():
        raise WindowError(f"window {window} contains no grid points")
    derivs = _member_derivatives(members, scheme)
    centers: list[int] = []
    for i, m in enumerate(members):
        covered = any(
            w1inf_distance_arrays(m.samples, derivs[i],
                                  members[c].samples, derivs[c], mask) <= eps
            for c in centers
        )
        if not covered:
            centers.append(i)
    return centers


def empirical_cover(members: Sequence[Field], window: tuple[float, float],
                    eps: float, scheme: str = "spectral") -> CoverAtomSet:
    idx = greedy_cover_indices(members, window, eps, scheme)
    return CoverAtomSet(
        eps=eps, window=window, cardinality=len(idx), kind="empirical",
        atoms=[members[i] for i in idx],
    )


def empirical_cover_count(members: Sequence[Field], window: tuple[float, float],
                          eps: float, scheme: str = "spectral") -> int:
    """Greedy upper bound on the minimal W^{1,inf} covering number."""
    return len(greedy_cover_indices(members, window, eps, scheme))


def brute_force_cover_count(members: Sequence[Field], window: tuple[float, float],
                            eps: float, scheme: str = "spectral") -> int:
    """Minimal member-centered cover by exhaustion; oracle for small sets."""
    n = len(members)
    if n > 12:
        raise ValueError("brute force limited to 12 members")
    grid = members[0].grid
    mask = fd.window_mask(grid, window[0], window[1])
    derivs = _member_derivatives(members, scheme)
    dist = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            d = w1inf_distance_arrays(members[i].samples, derivs[i],
                                      members[j].samples, derivs[j], mask)
            dist[i, j] = dist[j, i] = d
    for size in range(1, n + 1):
        for centers in combinations(range(n), size):
            if all(min(dist[i, c] for c in centers) <= eps for i in range(n)):
                return size
    return n
