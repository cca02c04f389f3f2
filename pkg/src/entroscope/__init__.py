"""Numerical toolkit for damped hyperbolic fields on the truncated line:
evolution, coercive functionals, frequency projections, band-limited
sampling, constructive W^{1,inf} covers, and entropy-per-length estimates
on empirical attractor ensembles."""

from .field import (
    Field,
    FieldPair,
    Grid,
    Weight,
    default_grid,
    differentiate,
    evaluate_weight,
    weighted_integral,
)
from .dynamics import (
    DivergenceError,
    Ensemble,
    ModelParams,
    Trajectory,
    evolve,
    evolve_difference,
    evolve_linear,
    evolve_many,
    generate_ensemble,
    rhs,
)
from .functionals import (
    DecayFit,
    coercive_F0,
    coercive_F1,
    fit_decay_rate,
    functional_J,
    sobolev_norm,
    w1inf_norm,
)
from .spectral import (
    CutoffProfile,
    SpectralOperator,
    apply,
    high_momentum_ratio,
    highpass,
    lowpass,
    smooth_cutoff,
    weighted_operator_norm,
)
from .sampling import (
    BernsteinCert,
    SampleSet,
    bernstein_check,
    cartwright_reconstruct,
    quantized_sample_cover,
    remainder_profile,
    truncated_sampler,
)
from .covering import (
    CoverAtomSet,
    CoverScales,
    FunctionClassBounds,
    PLFunction,
    bridge_glue,
    build_pl_cover,
    connect_cover,
    empirical_cover_count,
    merge_covers,
    one_step_line,
)
from .entropy import (
    EntropyEstimate,
    SeparationReport,
    ball_growth_check,
    epsilon_entropy_per_length,
    separated_count,
    topological_entropy_estimate,
)
from .params import DELTA_MAX, ETA0_MAX, gamma_value

__version__ = "0.1.0"
