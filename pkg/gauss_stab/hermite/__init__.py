from .hermite_basis import (
    HermiteBasis,
    OrderOverflow,
    build_basis,
    hermite_coefficients,
    hermite_values,
    log_normalizers,
)
