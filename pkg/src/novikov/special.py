"""Optimal Novikov constants and the elementary functions behind them.

``h(x) = (1+x) log(1+x) - x`` and ``g(x) = log(1+x) - x/(1+x) = h(x)/(1+x)``
control the jump terms; ``alpha(a) = h(a)/a**2`` and ``beta(a) = alpha(a)/(1+a)``
are the optimal coefficients on the predictable and the ordinary quadratic
variation of the purely discontinuous part when jumps are bounded below by
``a``.

The quotients have removable singularities at 0 (and ``h``, ``alpha`` a
limiting value at -1). Near 0 the direct formulas cancel catastrophically, so
each function switches to a truncated Taylor series inside
``EvalPolicy.series_threshold``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Literal


class DomainError(ValueError):
    """Argument outside the domain of a special function."""


class BetaNonexistenceError(DomainError):
    """Raised for beta(-1): no finite coefficient on [M^d] works when jumps may equal -1."""

    def __init__(self, message: str | None = None):
        super().__init__(
            message
            or "beta(-1) does not exist: when jumps can equal -1, no finite coefficient in front "
            "of the quadratic variation [M^d] makes exponential integrability sufficient for "
            "uniform integrability (beta(a) -> +inf as a -> -1)"
        )


@dataclass(frozen=True)
class JumpFloor:
    """Lower bound ``a >= -1`` on the jump sizes of M."""

    a: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and self.a >= -1.0):
            raise DomainError(f"jump floor must be a finite real >= -1, got {self.a!r}")

    def __float__(self) -> float:
        return float(self.a)


@dataclass(frozen=True)
class EvalPolicy:
    """Where to switch from the closed form to the Taylor series.

    Just outside ``|x| = 1e-4`` the closed form of ``alpha`` is still off by
    ~2e-12, so the default seam sits at ``1e-2`` (closed-form error ~2e-13).
    The number of series terms follows from the threshold.
    """

    series_threshold: float = 1e-2
    tolerance: float = 1e-12

    def __post_init__(self):
        if not 0.0 < self.series_threshold < 0.1:
            raise ValueError("series_threshold must lie in (0, 0.1)")
        if not self.tolerance > 0.0:
            raise ValueError("tolerance must be positive")

    @property
    def series_terms(self) -> int:
        # truncation error ~ t**terms, pushed below 1e-18
        return max(_MIN_SERIES_TERMS, math.ceil(-18.0 / math.log10(self.series_threshold)) + 1)


_MIN_SERIES_TERMS = 6
DEFAULT_POLICY = EvalPolicy()

# alpha' loses ~1e-16/a**2 in the direct formula, so it gets a wider series disc
ALPHA_PRIME_SERIES_RADIUS = 0.05
_ALPHA_PRIME_TERMS = 16


def _series_h(x: float, terms: int = _MIN_SERIES_TERMS) -> float:
    # sum_{k>=2} (-1)^k x^k / (k (k-1))
    return x * x * _series_alpha(x, terms)


def _series_alpha(x: float, terms: int = _MIN_SERIES_TERMS) -> float:
    acc = 0.0
    for k in range(terms + 1, 1, -1):
        acc = acc * x + (-1) ** k / (k * (k - 1))
    return acc


def _series_g(x: float, terms: int = _MIN_SERIES_TERMS) -> float:
    # sum_{k>=2} (-1)^k (k-1)/k x^k
    acc = 0.0
    for k in range(terms + 1, 1, -1):
        acc = acc * x + (-1) ** k * (k - 1) / k
    return acc * x * x


def _series_alpha_prime(x: float) -> float:
    # d/dx sum_{k>=2} (-1)^k x^(k-2) / (k (k-1))
    acc = 0.0
    for k in range(_ALPHA_PRIME_TERMS + 2, 2, -1):
        acc = acc * x + (-1) ** k * (k - 2) / (k * (k - 1))
    return acc


def _as_float(a) -> float:
    return float(a)


def h(x: float, policy: EvalPolicy = DEFAULT_POLICY) -> float:
    """``(1+x) log(1+x) - x`` on ``[-1, inf)`` with ``h(-1) = 1``."""
    x = _as_float(x)
    if not x >= -1.0:
        raise DomainError(f"h(x) requires x >= -1, got {x!r}")
    if x == -1.0:
        return 1.0
    if abs(x) < policy.series_threshold:
        return _series_h(x, policy.series_terms)
    return (1.0 + x) * math.log1p(x) - x


def g(x: float, policy: EvalPolicy = DEFAULT_POLICY) -> float:
    """``log(1+x) - x/(1+x)`` on ``(-1, inf)``; diverges at -1."""
    x = _as_float(x)
    if not x > -1.0:
        raise DomainError(f"g(x) requires x > -1 (it diverges at -1), got {x!r}")
    if abs(x) < policy.series_threshold:
        return _series_g(x, policy.series_terms)
    return math.log1p(x) - x / (1.0 + x)


def alpha(a, policy: EvalPolicy = DEFAULT_POLICY) -> float:
    """Optimal coefficient on the predictable quadratic variation <M^d>.

    >>> alpha(0.0), alpha(-1.0)
    (0.5, 1.0)
    """
    a = _as_float(a)
    if not a >= -1.0:
        raise DomainError(f"alpha(a) requires a >= -1, got {a!r}")
    if a == -1.0:
        return 1.0
    if abs(a) < policy.series_threshold:
        return _series_alpha(a, policy.series_terms)
    return h(a, policy) / (a * a)


def beta(a, policy: EvalPolicy = DEFAULT_POLICY) -> float:
    """Optimal coefficient on the quadratic variation [M^d]; undefined at -1."""
    a = _as_float(a)
    if a == -1.0:
        raise BetaNonexistenceError()
    if not a > -1.0:
        raise DomainError(f"beta(a) requires a > -1, got {a!r}")
    return alpha(a, policy) / (1.0 + a)


def alpha_prime(a, policy: EvalPolicy = DEFAULT_POLICY) -> float:
    """Derivative of alpha on ``(-1, inf)``, equal to -1/6 at 0."""
    a = _as_float(a)
    if not a > -1.0:
        raise DomainError(f"alpha_prime(a) requires a > -1, got {a!r}")
    if abs(a) < max(ALPHA_PRIME_SERIES_RADIUS, policy.series_threshold):
        return _series_alpha_prime(a)
    return (2.0 * a * a - a * (2.0 + a) * math.log1p(a)) / a**4


def f(b: float, lam: float) -> float:
    """Laplace exponent ``exp(-lam) + lam (1+b) - 1`` of ``-(N_t - (1+b) t)``."""
    return math.exp(-lam) + lam * (1.0 + b) - 1.0


def argmin_f(b: float) -> tuple[float, float]:
    """Minimizer ``-log(1+b)`` of ``f(b, .)`` and the negated minimum ``-f(b, lam*)``.

    The second entry equals ``h(b)``; it is evaluated from ``f`` itself so the
    identity can be checked rather than assumed.
    """
    b = _as_float(b)
    if not b > -1.0:
        raise DomainError(f"argmin_f(b) requires b > -1, got {b!r}")
    lam_star = -math.log1p(b)
    return lam_star, -f(b, lam_star)


Kind = Literal["alpha", "beta"]


def check_jump_domination(
    a, kind: Kind, grid: Iterable[float], policy: EvalPolicy = DEFAULT_POLICY
) -> float:
    """Largest violation of ``h(x) <= alpha(a) x**2`` (or ``g(x) <= beta(a) x**2``) on a grid.

    Every grid point must be an admissible jump ``x >= a``. A non-positive
    return value (up to tolerance) means the jump inequality holds everywhere
    on the grid.
    """
    a = _as_float(a)
    if kind == "alpha":
        coef, fn = alpha(a, policy), h
    elif kind == "beta":
        coef, fn = beta(a, policy), g
    else:
        raise ValueError(f"kind must be 'alpha' or 'beta', got {kind!r}")
    worst = -math.inf
    for x in grid:
        x = float(x)
        if x < a:
            raise DomainError(f"grid point {x} lies below the jump floor {a}")
        worst = max(worst, fn(x, policy) - coef * x * x)
    return worst
