from .l1_certificate import (
    CoefficientBound,
    L1Certificate,
    MonotoneInversionFailure,
    deviation_envelope,
    l1_certificate,
    median_inverse,
)
from .l2_certificate import (
    DomainError,
    EsseenReport,
    IdentityReport,
    L2Bound,
    L2Certificate,
    diff_char_check,
    esseen_check,
    fourier_orthogonality_check,
    gaussian_reference,
    l2_bound,
    l2_certificate,
    l2_epsilon,
    l2_objective,
    smoothing_frequency,
    windowed_exponential,
)
from .levy import NotACdf, levy_distance, levy_profile
