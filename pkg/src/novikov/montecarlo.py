"""Reproducible Monte Carlo checks of the martingale statements.

Estimates are pure functions of (construction, n_paths, master_seed): paths
are generated per index from counter-based streams, chunked independently of
the worker count, and averaged with an exactly rounded sum (``math.fsum``),
so worker count and scheduling cannot change a single bit.

Simulation can only ever demonstrate *deficiency* (``E E(M)_∞ < 1``); it
cannot prove uniform integrability, and verdicts are only issued for
certificates whose analytic checks pass.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import asdict, dataclass
from statistics import NormalDist
from typing import Callable, NamedTuple, Optional, Sequence, Union

import numpy as np

from novikov.certificates import Certificate, CertificateError, verify_certificate
from novikov.exponential import (
    CompensatedPoissonSpec,
    lb_value,
    stochastic_exponential_at,
    terminal_log_value,
)
from novikov.poisson import (
    DEFAULT_MAX_JUMPS,
    FixedHorizon,
    PassageBatch,
    Stopping,
    simulate,
    simulate_jump_times,
)
from novikov.special import DomainError, alpha, beta, f, g, h

DEFAULT_SEED = 42
DEFAULT_CI_LEVEL = 0.99
CENSOR_TOLERANCE = 1e-3
MIN_PATHS = 100


class HeavyTailError(ValueError):
    """Exponent at or beyond the integrability boundary; no mean is reported."""


class VarianceWarning(UserWarning):
    pass


class Verdict(str, enum.Enum):
    DEFICIENT = "DEFICIENT"
    SATURATED = "SATURATED"
    INCONSISTENT = "INCONSISTENT"


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    n_effective: int
    n_censored: int
    ci_level: float
    ci: tuple[float, float]
    trusted: bool = True

    def contains(self, x: float) -> bool:
        return self.ci[0] <= x <= self.ci[1]

    def within_se(self, x: float, k: float) -> bool:
        return abs(self.mean - x) <= k * self.std_error

    def to_dict(self) -> dict:
        d = asdict(self)
        d["ci"] = list(self.ci)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "McEstimate":
        d = dict(d)
        d["ci"] = tuple(d["ci"])
        return cls(**d)


@dataclass(frozen=True)
class TailDiagnostic:
    exponent_used: float
    exponent_boundary: float
    margin: float
    top_decile_mass_share: float

    def to_dict(self) -> dict:
        return asdict(self)


def z_value(ci_level: float) -> float:
    if not 0.0 < ci_level < 1.0:
        raise ValueError("ci_level must lie in (0, 1)")
    return NormalDist().inv_cdf(0.5 + 0.5 * ci_level)


def summarize(values, n_censored: int = 0, ci_level: float = DEFAULT_CI_LEVEL) -> McEstimate:
    """Mean, standard error and normal CI of i.i.d. samples."""
    v = np.asarray(values, dtype=np.float64).ravel()
    n = v.size
    if n < 2:
        raise ValueError("need at least two effective samples")
    mean = math.fsum(v.tolist()) / n
    dev = v - mean
    var = math.fsum((dev * dev).tolist()) / (n - 1)
    se = math.sqrt(var / n)
    z = z_value(ci_level)
    trusted = n_censored <= CENSOR_TOLERANCE * (n + n_censored)
    return McEstimate(mean, se, n, int(n_censored), ci_level, (mean - z * se, mean + z * se), trusted)


@dataclass(frozen=True)
class JumpTimes:
    """Experiment yielding the first ``k`` jump times of every path."""

    k: int


Experiment = Union[Stopping, JumpTimes]


def estimate(
    functional: Callable,
    experiment: Experiment,
    n_paths: int,
    master_seed: int = DEFAULT_SEED,
    *,
    max_jumps: int = DEFAULT_MAX_JUMPS,
    workers: int = 1,
    ci_level: float = DEFAULT_CI_LEVEL,
) -> McEstimate:
    """Monte Carlo mean of a vectorized path functional.

    ``functional`` receives a ``PassageBatch`` of the paths that stopped
    (or, for ``JumpTimes``, the ``(n_paths, k)`` jump-time matrix) and returns
    one value per path. Censored paths are dropped and counted.
    """
    if n_paths < MIN_PATHS:
        raise ValueError(f"n_paths must be >= {MIN_PATHS}")
    if isinstance(experiment, JumpTimes):
        values = functional(simulate_jump_times(experiment.k, n_paths, master_seed, workers=workers))
        return summarize(values, 0, ci_level)
    batch = simulate(experiment, n_paths, master_seed, max_jumps=max_jumps, workers=workers)
    return summarize(functional(batch.hits()), batch.n_censored, ci_level)


def verdict_for(est: McEstimate, target: float = 1.0) -> Verdict:
    if est.ci[1] < target:
        return Verdict.DEFICIENT
    if est.ci[0] > target:
        return Verdict.INCONSISTENT
    return Verdict.SATURATED


def within_ceiling(est: McEstimate, k: float = 5.0) -> bool:
    """``E E(M)_∞ <= 1`` is a theorem; an estimate more than ``k`` SE above 1 means a bug."""
    return est.mean <= 1.0 + k * est.std_error


class TerminalMassResult(NamedTuple):
    estimate: McEstimate
    verdict: Verdict


class MomentBoundResult(NamedTuple):
    estimate: McEstimate
    bound: float
    passed: bool
    margin_se: float


class WitnessResult(NamedTuple):
    estimate: McEstimate
    diagnostic: TailDiagnostic


class LbRow(NamedTuple):
    t: float
    estimate: McEstimate
    passed: bool


class NovikovResult(NamedTuple):
    estimate: McEstimate
    passed: bool
    analytic: float


def _require_verified(cert: Certificate) -> None:
    report = verify_certificate(cert)
    if not report.passed:
        raise CertificateError(f"certificate failed analytic checks: {', '.join(report.failed)}")


def terminal_mass_test(
    construction: Union[Certificate, CompensatedPoissonSpec],
    n_paths: int,
    master_seed: int = DEFAULT_SEED,
    *,
    max_jumps: int = DEFAULT_MAX_JUMPS,
    workers: int = 1,
    ci_level: float = DEFAULT_CI_LEVEL,
) -> TerminalMassResult:
    """Estimate ``E E(M)_∞`` for a certificate's martingale (or any stopped spec).

    DEFICIENT when the whole CI lies below 1, SATURATED when it covers 1,
    INCONSISTENT when it lies above 1 (impossible for a nonnegative
    supermartingale started at 1).
    """
    if isinstance(construction, Certificate):
        _require_verified(construction)
        spec = construction.spec()
    else:
        spec = construction
    if spec.stopping is None:
        raise ValueError("terminal mass needs a stopping rule")
    est = estimate(
        lambda batch: np.exp(terminal_log_value(spec, batch)),
        spec.stopping,
        n_paths,
        master_seed,
        max_jumps=max_jumps,
        workers=workers,
        ci_level=ci_level,
    )
    return TerminalMassResult(est, verdict_for(est))


def moment_bound_test(
    cert: Certificate,
    n_paths: int,
    master_seed: int = DEFAULT_SEED,
    *,
    lam: Optional[float] = None,
    max_jumps: int = DEFAULT_MAX_JUMPS,
    workers: int = 1,
    ci_level: float = DEFAULT_CI_LEVEL,
) -> MomentBoundResult:
    """Check ``E exp(-T f_b(lam)) <= bound`` by simulation.

    The bound is ``exp(-lam)`` for the lower barrier and ``exp((c+1) lam)``
    (``lam >= 0``) for the upper one. One-sided: passes unless the whole CI
    lies above the bound.
    """
    _require_verified(cert)
    lam = cert.lambda_ if lam is None else float(lam)
    b = cert.b
    if cert.c is None:
        bound = math.exp(-lam)
    else:
        if lam < 0:
            raise DomainError("upper-barrier moment bound needs lam >= 0")
        bound = math.exp((cert.c + 1.0) * lam)
    rate = f(b, lam)
    est = estimate(
        lambda batch: np.exp(-batch.passage_time * rate),
        cert.stopping,
        n_paths,
        master_seed,
        max_jumps=max_jumps,
        workers=workers,
        ci_level=ci_level,
    )
    gap = bound - est.mean
    margin_se = gap / est.std_error if est.std_error > 0 else math.copysign(math.inf, gap) if gap else 0.0
    return MomentBoundResult(est, bound, est.ci[0] <= bound, margin_se)


def integrability_witness(
    cert: Certificate,
    n_paths: int,
    master_seed: int = DEFAULT_SEED,
    *,
    theta: Optional[float] = None,
    max_jumps: int = DEFAULT_MAX_JUMPS,
    workers: int = 1,
    ci_level: float = DEFAULT_CI_LEVEL,
) -> WitnessResult:
    """Sample mean of ``exp(theta T)`` (alpha kind) or ``exp(theta N_T)`` (beta kind).

    ``theta`` defaults to the certificate's exponent ``a^2 (1-eps) coef(a)``
    and must stay strictly below the finiteness boundary ``h(b)`` (alpha) or
    ``g(b)`` (beta). Close to the boundary the samples are heavy tailed, so
    the result is a witness of a finite mean, not a proof; the top-decile
    mass share shows how concentrated the sum is.
    """
    _require_verified(cert)
    a, eps, b = cert.construction_a, cert.construction_eps, cert.b
    beta_kind = cert.variant == "beta"
    if theta is None:
        theta = a * a * (1.0 - eps) * (beta(a) if beta_kind else alpha(a))
    boundary = g(b) if beta_kind else h(b)
    margin = 1.0 - theta / boundary
    if not margin > 0.0:
        raise HeavyTailError(
            f"exponent {theta:.6g} is not below the integrability boundary {boundary:.6g}; refusing to report a mean"
        )
    if beta_kind:
        functional = lambda batch: np.exp(theta * batch.jumps_at_passage)  # noqa: E731
    else:
        functional = lambda batch: np.exp(theta * batch.passage_time)  # noqa: E731

    if n_paths < MIN_PATHS:
        raise ValueError(f"n_paths must be >= {MIN_PATHS}")
    batch = simulate(cert.stopping, n_paths, master_seed, max_jumps=max_jumps, workers=workers)
    values = functional(batch.hits())
    est = summarize(values, batch.n_censored, ci_level)
    ordered = np.sort(values)
    top = ordered[ordered.size - max(1, ordered.size // 10):]
    share = math.fsum(top.tolist()) / math.fsum(ordered.tolist())
    return WitnessResult(est, TailDiagnostic(theta, boundary, margin, share))


def lb_martingale_test(
    b: float,
    lam: float,
    times: Sequence[float],
    n_paths: int,
    master_seed: int = DEFAULT_SEED,
    *,
    max_jumps: int = DEFAULT_MAX_JUMPS,
    workers: int = 1,
    ci_level: float = DEFAULT_CI_LEVEL,
) -> list[LbRow]:
    """Constant-mean test of ``L^b_t``: each ``E L^b_t`` should cover 1."""
    rows = []
    for t in times:
        t = float(t)
        if not (math.isfinite(t) and t > 0):
            raise ValueError("times must be positive and finite")
        # E (L^b_t)^2 = exp(t (f(b, 2 lam) - 2 f(b, lam)))
        rel_var = math.expm1(t * (f(b, 2 * lam) - 2 * f(b, lam)))
        if rel_var > n_paths / 100:
            warnings.warn(
                f"relative variance of L^b_{t:g} is {rel_var:.3g}; {n_paths} paths will not resolve the mean",
                VarianceWarning,
                stacklevel=2,
            )
        est = estimate(
            lambda batch: lb_value(b, lam, batch.jumps_at_passage, t),
            FixedHorizon(t),
            n_paths,
            master_seed,
            max_jumps=max_jumps,
            workers=workers,
            ci_level=ci_level,
        )
        rows.append(LbRow(t, est, est.contains(1.0)))
    return rows


def novikov_demo(
    a: float,
    t0: float,
    n_paths: int,
    master_seed: int = DEFAULT_SEED,
    *,
    max_jumps: int = DEFAULT_MAX_JUMPS,
    workers: int = 1,
    ci_level: float = DEFAULT_CI_LEVEL,
) -> NovikovResult:
    """``E E(M)_{t0}`` for nonnegative jumps ``a`` on a fixed horizon; exactly 1 in theory."""
    if not a >= 0:
        raise DomainError(f"the Novikov extension covers nonnegative jumps only, got a={a!r}")
    if not t0 > 0:
        raise ValueError("t0 must be positive")
    spec = CompensatedPoissonSpec(a, FixedHorizon(t0))
    est = estimate(
        lambda batch: stochastic_exponential_at(spec, batch.jumps_at_passage, batch.passage_time),
        spec.stopping,
        n_paths,
        master_seed,
        max_jumps=max_jumps,
        workers=workers,
        ci_level=ci_level,
    )
    return NovikovResult(est, est.contains(1.0), 1.0)
