"""Weighted Weyl-Sonine operators on the real line.

Structure pairs ``(psi, omega)`` warp lab time to a rectified line, where
Sonine kernel operators become convolutions and the weighted Fourier
transform turns them into multiplication by a symbol.
"""

__version__ = "0.1.0"

from .errors import (
    ConvergenceError,
    EdgeDecayWarning,
    IllPosedError,
    NoLevyRepresentationError,
    OutOfRangeError,
    UnsupportedFormError,
    WeylSonineError,
)
from .structure import (
    Domain,
    SampledSignal,
    ScaleFunction,
    StructurePair,
    WeightFunction,
    make_scale,
    make_weight,
    uniform_grid,
    unwarp_signal,
    warp_signal,
)
from .kernels import (
    KERNEL_NAMES,
    LevyDensity,
    OrderDistribution,
    Regime,
    SoninePair,
    SpectralSymbol,
    check_sonine_condition,
    check_symbol_duality,
    distributed_symbol,
    eval_kernel,
    levy_density,
    make_kernel,
    tabulated_orders,
    temper_kernel,
    uniform_orders,
)
from .wft import (
    FrequencyGrid,
    conjugated_norm,
    forward_wft,
    inverse_wft,
    plancherel_check,
    weighted_inner_product,
)
from .operators import (
    Form,
    OperatorRequest,
    apply_derivative,
    apply_integral,
    apply_marchaud,
    apply_operator,
    estimate_truncation_error,
    suggest_history_window,
    truncation_decay_ratio,
)
from .solver import (
    EvolutionProblem,
    GreenFunction,
    check_ellipticity,
    green_function,
    redshift_trace,
    residual,
    solve_evolution,
    wave_dispersion_roots,
)
