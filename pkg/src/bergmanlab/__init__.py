"""Numerical laboratory for Bergman kernels, Schur certificates and Toeplitz norms."""

from bergmanlab.domains import (
    DomainModel,
    KernelStrategy,
    MonomialTable,
    SeriesTruncationError,
    bergman_kernel,
    defining_function,
    domain_from_id,
    egg,
    kernel_diag,
    kernel_matrix,
    kernel_row,
    monomial_norms,
    offdiagonal_sup,
    ray_points,
    unit_ball2,
    unit_disc,
    volume,
)

__version__ = "0.1.0"
