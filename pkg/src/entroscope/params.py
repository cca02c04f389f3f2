"""Global parameter thresholds shared across modules.

The damping scale eta must stay below ETA0_MAX = 1/sqrt(40) for the
high-frequency decay machinery to apply, and the weight parameter delta
must satisfy delta * WEIGHT_SLOPE <= 1/40, i.e. delta <= 1/80, for the
damping functional J to be coercive.
"""

from __future__ import annotations

import math

# Largest admissible damping threshold eta0.
ETA0_MAX = 1.0 / math.sqrt(40.0)

# sup_x |h'(x)/h(x)| / delta for the weight h(x) = (1 + delta^2 x^2)^-2.
# The extremum sits at x = 1/delta where the quotient equals 2*delta.
WEIGHT_SLOPE = 2.0

# delta must satisfy delta * WEIGHT_SLOPE <= 1/40.
DELTA_MAX = 1.0 / (40.0 * WEIGHT_SLOPE)


def gamma_value(eta: float, k_star: float, c_high_momentum: float = 1.0) -> float:
    """Decay-rate parameter min(eta^-2, k_star^2 / C) / 320.

    ``c_high_momentum`` is the fitted constant of the high-momentum
    inequality (ratio of weighted L2 mass to derivative mass scales like
    C / a^2 above frequency a).
    """
    if eta <= 0 or k_star <= 0 or c_high_momentum <= 0:
        raise ValueError("eta, k_star and c_high_momentum must be positive")
    return min(eta ** -2, k_star ** 2 / c_high_momentum) / 320.0


def k_star_floor(c_high_momentum: float = 1.0) -> float:
    """Smallest admissible frequency cutoff, k0 = sqrt(40 * C)."""
    return math.sqrt(40.0 * c_high_momentum)


def default_k_star(eta: float, nyquist: float) -> float:
    """Default cutoff: min(1/eta, nyquist/4), resolved and eta-adapted."""
    return min(1.0 / eta, nyquist / 4.0)
