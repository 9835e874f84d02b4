"""Closed-form stochastic exponentials of stopped compensated Poisson martingales.

For ``M_t = a (N_{t∧T} - t∧T)`` the continuous part vanishes and every jump
equals ``a``, so the product formula collapses to

    E(M)_t = (1+a)^{N_t} exp(-a t)          (t <= T).

Everything is assembled as a log first and exponentiated last: passage times
in the hundreds make intermediate ``exp`` overflow a real risk. The functions
accept scalars or NumPy arrays; anything with ``passage_time``,
``jumps_at_passage`` and ``hit`` attributes (a ``StoppingRecord`` or a
``PassageBatch``) can be passed as a record.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from novikov.poisson import FixedHorizon, LowerBarrier, Stopping, UpperBarrier
from novikov.special import DomainError, f


class CensoredRecordError(ValueError):
    """A terminal quantity was requested for a path that never stopped."""


@dataclass(frozen=True)
class CompensatedPoissonSpec:
    """``M_t = a (N_{t∧T} - t∧T)`` plus an optional deterministic ``<M^c>_∞`` contribution."""

    jump_scale: float
    stopping: Optional[Stopping] = None
    continuous_qv: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.jump_scale) and self.jump_scale >= -1.0):
            raise DomainError(f"jump scale must be >= -1 so that E(M) >= 0, got {self.jump_scale!r}")
        if not self.continuous_qv >= 0.0:
            raise ValueError("continuous_qv must be nonnegative")


def _log1p_scale(a: float) -> float:
    return -math.inf if a == -1.0 else math.log1p(a)


def log_stochastic_exponential_at(spec: CompensatedPoissonSpec, n, t):
    """``log E(M)_t`` given ``n = N_t`` jumps by time ``t``; ``-inf`` once a -1 jump occurred."""
    a = spec.jump_scale
    n = np.asarray(n)
    t = np.asarray(t, dtype=np.float64)
    if a == -1.0:
        out = np.where(n > 0, -math.inf, t - 0.5 * spec.continuous_qv)
    elif a == 0.0:
        out = np.zeros(np.broadcast(n, t).shape) - 0.5 * spec.continuous_qv
    else:
        out = n * math.log1p(a) - a * t - 0.5 * spec.continuous_qv
    return out[()] if out.ndim == 0 else out


def stochastic_exponential_at(spec: CompensatedPoissonSpec, n, t):
    """``(1+a)^n exp(-a t - <M^c>/2)``, exactly 0 after a jump of size -1."""
    out = np.exp(log_stochastic_exponential_at(spec, n, t))
    return float(out) if np.ndim(out) == 0 else out


def _require_hits(rec) -> None:
    if not np.all(rec.hit):
        raise CensoredRecordError("terminal value undefined for censored paths")


def log_terminal_exponential_lower(a: float, b: float, rec):
    """``log E(M)_∞ = -log(1+a) + T ((1+b) log(1+a) - a)`` for the lower-barrier construction."""
    if not a > 0:
        raise DomainError("lower-barrier construction needs a > 0")
    LowerBarrier(b)
    _require_hits(rec)
    la = math.log1p(a)
    return -la + np.asarray(rec.passage_time) * ((1.0 + b) * la - a)


def terminal_exponential_lower(a: float, b: float, rec):
    out = np.exp(log_terminal_exponential_lower(a, b, rec))
    return float(out) if np.ndim(out) == 0 else out


def log_terminal_exponential_upper(a: float, rec):
    """``log E(M)_∞ = N_T log(1+a) - a T`` for the upper-barrier construction."""
    if not -1.0 < a < 0.0:
        raise DomainError("upper-barrier construction needs -1 < a < 0")
    _require_hits(rec)
    return np.asarray(rec.jumps_at_passage) * math.log1p(a) - a * np.asarray(rec.passage_time)


def terminal_exponential_upper(a: float, rec):
    out = np.exp(log_terminal_exponential_upper(a, rec))
    return float(out) if np.ndim(out) == 0 else out


def terminal_bound_upper(a: float, b: float, c: float, rec):
    """``(1+a)^c exp(T ((1+b) log(1+a) - a))``, which dominates the upper-case terminal value."""
    _require_hits(rec)
    la = math.log1p(a)
    out = np.exp(c * la + np.asarray(rec.passage_time) * ((1.0 + b) * la - a))
    return float(out) if np.ndim(out) == 0 else out


def variation_functionals(spec: CompensatedPoissonSpec, rec):
    """``([M]_T, <M>_T) = (a^2 N_T, a^2 T)`` plus ``<M^c>`` in both."""
    _require_hits(rec)
    a2 = spec.jump_scale**2
    qv = a2 * np.asarray(rec.jumps_at_passage, dtype=np.float64) + spec.continuous_qv
    pqv = a2 * np.asarray(rec.passage_time, dtype=np.float64) + spec.continuous_qv
    if np.ndim(qv) == 0:
        return float(qv), float(pqv)
    return qv, pqv


def log_lb_value(b: float, lam: float, n, t):
    return -lam * (np.asarray(n) - (1.0 + b) * np.asarray(t, dtype=np.float64)) - np.asarray(t) * f(b, lam)


def lb_value(b: float, lam: float, n, t):
    """``L^b_t = exp(-lam (N_t - (1+b) t) - t f(b, lam))``."""
    out = np.exp(log_lb_value(b, lam, n, t))
    return float(out) if np.ndim(out) == 0 else out


def terminal_log_value(spec: CompensatedPoissonSpec, rec):
    """``log E(M)`` at the stopping time of ``spec`` for one record or a batch."""
    _require_hits(rec)
    stop = spec.stopping
    if isinstance(stop, LowerBarrier) and spec.jump_scale > 0 and spec.continuous_qv == 0:
        return log_terminal_exponential_lower(spec.jump_scale, stop.b, rec)
    if isinstance(stop, UpperBarrier) and -1 < spec.jump_scale < 0 and spec.continuous_qv == 0:
        return log_terminal_exponential_upper(spec.jump_scale, rec)
    if isinstance(stop, (LowerBarrier, UpperBarrier, FixedHorizon)):
        return log_stochastic_exponential_at(spec, rec.jumps_at_passage, rec.passage_time)
    raise ValueError("spec has no stopping rule, so E(M)_∞ is not defined by a finite record")


def lower_passage_mgf(b: float, theta: float) -> float:
    """``E exp(theta T_b)`` for the lower barrier, exactly.

    ``N_t - (1+b) t`` has no negative jumps, so for ``lam >= -log(1+b)`` the
    stopped ``L^b`` is uniformly integrable and ``E exp(-f(b, lam) T_b) = exp(-lam)``.
    Solving ``-f(b, lam) = theta`` on that branch gives the value for every
    ``theta <= h(b)``; beyond ``h(b)`` the expectation is infinite.
    """
    LowerBarrier(b)
    lam_star = -math.log1p(b)
    top = -f(b, lam_star)
    if theta > top:
        return math.inf
    if theta == top:
        return math.exp(-lam_star)
    lo, hi = lam_star, lam_star + 1.0
    while -f(b, hi) > theta:
        hi = lam_star + 2.0 * (hi - lam_star)
    # -f(b, .) decreases on [lam_star, inf)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if -f(b, mid) > theta:
            lo = mid
        else:
            hi = mid
    return math.exp(-0.5 * (lo + hi))


def terminal_mass_lower(a: float, b: float) -> float:
    """Exact ``E E(M)_∞`` of the lower-barrier construction with ``0 < b < a``."""
    if not 0.0 < b < a:
        raise DomainError("terminal_mass_lower needs 0 < b < a")
    return lower_passage_mgf(b, (1.0 + b) * math.log1p(a) - a) / (1.0 + a)
