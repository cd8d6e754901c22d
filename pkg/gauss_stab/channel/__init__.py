from .orthogonality import orthogonality_residual_l1, orthogonality_residual_l2
from .posterior_field import (
    MarginalUnderflow,
    MedianBracketFailure,
    MonotonicityAudit,
    MonotonicityViolation,
    PosteriorField,
    monotonicity_audit,
    posterior_field,
    posterior_mass_below,
)
