"""Vasyunin corrections for the strong Nyman-Beurling criterion.

Exact construction of correction sequences, their coefficients, weighted
integrals of the resulting step functions, and divergence diagnostics.
"""
from .corrections import (
    Correction,
    SeedFamily,
    build_correction,
    correction_coefficients,
    seed,
    to_canonical,
    verify_plateau,
)
from .natfunc import (
    NaturalFunction,
    add_scaled,
    evaluate,
    integral_to_infinity,
    integrate_weighted,
    jump_at,
    make_natural,
    norm_weighted,
    period,
    profile,
)
from .numtheory import coeff_closed, dirichlet_convolve, dirichlet_inverse, mobius, psi_pow2

__version__ = "0.1.0"

__all__ = [
    "Correction",
    "NaturalFunction",
    "SeedFamily",
    "add_scaled",
    "build_correction",
    "coeff_closed",
    "correction_coefficients",
    "dirichlet_convolve",
    "dirichlet_inverse",
    "evaluate",
    "integral_to_infinity",
    "integrate_weighted",
    "jump_at",
    "make_natural",
    "mobius",
    "norm_weighted",
    "period",
    "profile",
    "psi_pow2",
    "seed",
    "to_canonical",
    "verify_plateau",
]
