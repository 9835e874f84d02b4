"""Optimal Novikov-type constants for jump martingales.

Special functions, certificates for the counterexample constructions, an
exact first-passage engine for drifted Poisson barriers and reproducible
Monte Carlo checks.
"""

from novikov._backend import BACKEND
from novikov.certificates import Certificate, CertificateError, solve, verify_certificate
from novikov.special import (
    BetaNonexistenceError,
    DomainError,
    alpha,
    alpha_prime,
    argmin_f,
    beta,
    check_jump_domination,
    f,
    g,
    h,
)

__all__ = [
    "BACKEND",
    "BetaNonexistenceError",
    "Certificate",
    "CertificateError",
    "DomainError",
    "alpha",
    "alpha_prime",
    "argmin_f",
    "beta",
    "check_jump_domination",
    "f",
    "g",
    "h",
    "solve",
    "verify_certificate",
]
