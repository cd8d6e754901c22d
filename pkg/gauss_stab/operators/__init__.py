from .dual_functions import (
    DawsonShapeReport,
    DenominatorUnderflow,
    PhiFunction,
    ReconstructionOverflow,
    cached_phi,
    calibration_error,
    construct_phi,
    denominator,
    denominator_shape_check,
    fourier_ratio,
    gaussian_moment_integral,
    numerator,
    phi_l1_majorant,
)
from .linearity_operator import (
    BreakpointOutOfRange,
    OperatorConfig,
    WeightOverflow,
    apply_T,
    apply_T_adjoint,
    apply_T_adjoint_direct,
    convolution_form,
    growth_estimate,
    kernel_antiderivative,
    scaled_tilted_density,
    tilted_density,
)
