"""Constructive parameter selection for the optimality counterexamples.

Given a jump floor ``a`` and a slack ``eps`` the solver returns a
``Certificate``: parameters ``b`` (and ``c`` for negative ``a``) of a stopped
compensated Poisson martingale with jumps ``a`` for which

* ``exp((1-eps) coef(a) <M^d>_∞)`` (alpha kind) or
  ``exp((1-eps) coef(a) [M^d]_∞)`` (beta kind) is integrable, and
* ``E E(M)_∞ < 1``, so ``E(M)`` is not a uniformly integrable martingale.

Existence is only asserted nonconstructively ("b close enough to a", "c large
enough"). Here ``b`` is the midpoint between ``a`` and the root ``b0`` of the
binding equality, and ``c`` is the first power of two passing both
``rho_b(c) > 0`` and ``lambda(b, c) >= 0``.

``verify_certificate`` re-derives every inequality from the parameters alone
and does not share code with the solver's bookkeeping.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Literal, Optional

from novikov.exponential import CompensatedPoissonSpec
from novikov.poisson import LowerBarrier, UpperBarrier
from novikov.special import BetaNonexistenceError, DomainError, alpha, beta, f, g, h

Variant = Literal["alpha", "beta"]
Case = Literal["positive", "zero-surrogate", "negative", "minus-one-surrogate"]

ROOT_XTOL = 1e-12
MAX_C = 2.0**60


class RootBracketError(RuntimeError):
    """The root finder was handed an interval without a sign change."""


class CertificateError(RuntimeError):
    """A certificate failed its analytic checks or could not be constructed."""


@dataclass(frozen=True)
class Check:
    name: str
    lhs: float
    relation: str
    rhs: float
    passed: bool


def _check(name: str, lhs: float, relation: str, rhs: float) -> Check:
    ok = {
        "<=": lhs <= rhs,
        "<": lhs < rhs,
        ">=": lhs >= rhs,
        ">": lhs > rhs,
    }[relation]
    return Check(name, float(lhs), relation, float(rhs), bool(ok))


@dataclass(frozen=True)
class Certificate:
    """Parameters of one counterexample together with the checks they passed.

    ``a`` and ``epsilon`` are the requested floor and slack. For the surrogate
    cases the martingale is built with jump size ``surrogate_a`` and slack
    ``construction_epsilon = epsilon / 2``; otherwise those coincide with
    ``a`` and ``epsilon``.
    """

    a: float
    epsilon: float
    variant: Variant
    case: Case
    b: float
    c: Optional[float]
    lambda_: float
    b_root: float
    checks: tuple[Check, ...] = ()
    surrogate_a: Optional[float] = None
    construction_epsilon: Optional[float] = None
    surrogate_probes: tuple[float, ...] = ()
    c_probes: tuple[float, ...] = ()
    # informational only, never part of ``passed``
    diagnostics: tuple[Check, ...] = ()

    @property
    def construction_a(self) -> float:
        return self.a if self.surrogate_a is None else self.surrogate_a

    @property
    def construction_eps(self) -> float:
        return self.epsilon if self.construction_epsilon is None else self.construction_epsilon

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    @property
    def stopping(self):
        if self.c is None:
            return LowerBarrier(self.b)
        return UpperBarrier(self.b, self.c)

    def spec(self) -> CompensatedPoissonSpec:
        return CompensatedPoissonSpec(self.construction_a, self.stopping)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("lambda_")
        d["checks"] = [asdict(c) for c in self.checks]
        d["surrogate_probes"] = list(self.surrogate_probes)
        d["c_probes"] = list(self.c_probes)
        d["diagnostics"] = [asdict(c) for c in self.diagnostics]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Certificate":
        d = dict(d)
        d["lambda_"] = d.pop("lambda")
        d["checks"] = tuple(Check(**c) for c in d.get("checks", ()))
        d["surrogate_probes"] = tuple(d.get("surrogate_probes", ()))
        d["c_probes"] = tuple(d.get("c_probes", ()))
        d["diagnostics"] = tuple(Check(**c) for c in d.get("diagnostics", ()))
        return cls(**d)


CASE_LABELS = {
    ("alpha", "positive"): "alpha criterion (<M^d> coefficient), case a>0",
    ("alpha", "zero-surrogate"): "alpha criterion (<M^d> coefficient), case a=0 via surrogate a'>0",
    ("alpha", "negative"): "alpha criterion (<M^d> coefficient), case -1<a<0",
    ("alpha", "minus-one-surrogate"): "alpha criterion (<M^d> coefficient), case a=-1 via surrogate -1<a'<0",
    ("beta", "positive"): "beta criterion ([M^d] coefficient), case a>0",
    ("beta", "zero-surrogate"): "beta criterion ([M^d] coefficient), case a=0 via surrogate a'>0",
    ("beta", "negative"): "beta criterion ([M^d] coefficient), case -1<a<0",
}


def case_label(cert: Certificate) -> str:
    return CASE_LABELS[(cert.variant, cert.case)]


# --- closed-form pieces -----------------------------------------------------


def lambda_pos(a: float, b: float) -> float:
    """``-log((1+a) b/a)`` for ``0 < b < a``."""
    if not 0.0 < b < a:
        raise DomainError(f"lambda_pos needs 0 < b < a, got a={a!r}, b={b!r}")
    return -math.log((1.0 + a) * b / a)


def lambda_neg(a: float, b: float, c: float) -> float:
    """``log((1+a)^{-c} b/a) / (c+1)`` for ``-1 < a < b < 0`` and ``c > 0``."""
    if not (-1.0 < a < b < 0.0 and c > 0.0):
        raise DomainError(f"lambda_neg needs -1 < a < b < 0 < c, got a={a!r}, b={b!r}, c={c!r}")
    return (math.log(b / a) - c * math.log1p(a)) / (c + 1.0)


def _neg_args(a: float, b: float, c: float) -> None:
    if not (-1.0 < a < b < 0.0 and c > 0.0):
        raise DomainError(f"rho needs -1 < a < b < 0 < c, got a={a!r}, b={b!r}, c={c!r}")


def rho(a: float, b: float, c: float) -> float:
    """Slack in the first requirement of the negative case; positive iff it holds."""
    _neg_args(a, b, c)
    la = math.log1p(a)
    lab = math.log(a / b)
    power = math.exp((c * la + lab) / (c + 1.0))
    return 1.0 + a - power + (1.0 + b) / (c + 1.0) * (lab - la)


def rho_prime(a: float, b: float, c: float) -> float:
    """Derivative of ``rho`` in ``c``."""
    _neg_args(a, b, c)
    la = math.log1p(a)
    lab = math.log(a / b)
    power = math.exp((c * la + lab) / (c + 1.0))
    return (la - lab) / (c + 1.0) ** 2 * (1.0 + b - power)


def reduced_first_requirement(a: float, b: float) -> tuple[float, float]:
    """Both sides of ``(1+b) log(b/a)/(b/a - 1) <= 1+a`` (positive case, ``0 < b < a``).

    Equivalent to ``(1+b) log(1+a) - a <= -f(b, lambda_pos(a, b))``. With
    ``x = b/a`` it reads ``phi(x) = (1+a)(1-x) + (1+ax) log x >= 0``; since
    ``phi(1) = phi'(1) = 0`` and ``phi''(x) = (ax-1)/x**2`` it fails for every
    ``b`` when ``a <= 1`` and for small ``b/a`` when ``a > 1``.
    """
    r = b / a
    return (1.0 + b) * math.log(r) / (r - 1.0), 1.0 + a


def bisect(fn: Callable[[float], float], lo: float, hi: float, xtol: float = ROOT_XTOL, max_iter: int = 200) -> float:
    """Root of ``fn`` in ``[lo, hi]`` by bisection; endpoints must differ in sign."""
    flo, fhi = fn(lo), fn(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise RootBracketError(f"no sign change on [{lo}, {hi}]: f(lo)={flo}, f(hi)={fhi}")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= xtol or mid in (lo, hi):
            break
        fm = fn(mid)
        if fm == 0.0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


# --- solver -----------------------------------------------------------------


def _variant_functions(variant: Variant):
    if variant == "alpha":
        return h, alpha
    if variant == "beta":
        return g, beta
    raise ValueError(f"variant must be 'alpha' or 'beta', got {variant!r}")


def _check_eps(eps: float) -> None:
    if not 0.0 < eps < 1.0:
        raise DomainError(f"eps must lie in (0, 1), got {eps!r}")


def solve_positive(a: float, eps: float, variant: Variant = "alpha") -> Certificate:
    if not a > 0:
        raise DomainError(f"solve_positive needs a > 0, got {a!r}")
    _check_eps(eps)
    fn, coef = _variant_functions(variant)
    target = (1.0 - eps) * fn(a)
    # fn increases on (0, a] from fn(0) = 0
    b0 = bisect(lambda x: fn(x) - target, 0.0, a)
    b = 0.5 * (b0 + a)
    # lambda = argmin f(b, .): then -f = h(b) >= (1+b) log(1+a) - a for all b < a,
    # and optional stopping gives E exp(T h(b)) <= 1+b < 1+a
    lam = -math.log1p(b)
    drift = (1.0 + b) * math.log1p(a) - a
    checks = (
        _check("b_in_range_lower", 0.0, "<", b),
        _check("b_in_range_upper", b, "<", a),
        _check("first_requirement", drift, "<=", -f(b, lam)),
        _check("second_requirement", a * a * (1.0 - eps) * coef(a), "<=", fn(b)),
        _check("moment_bound_below_1_plus_a", math.exp(-lam), "<", 1.0 + a),
    )
    red_lhs, red_rhs = reduced_first_requirement(a, b)
    diagnostics = (
        _check("first_requirement_at_lambda_pos", drift, "<=", -f(b, lambda_pos(a, b))),
        _check("first_requirement_reduced", red_lhs, "<=", red_rhs),
    )
    return Certificate(a, eps, variant, "positive", b, None, lam, b0, checks, diagnostics=diagnostics)


def solve_negative(a: float, eps: float, variant: Variant = "alpha") -> Certificate:
    if not -1.0 < a < 0.0:
        raise DomainError(f"solve_negative needs -1 < a < 0, got {a!r}")
    _check_eps(eps)
    fn, coef = _variant_functions(variant)
    target = (1.0 - eps) * fn(a)
    # fn decreases on [a, 0) down to fn(0) = 0
    b0 = bisect(lambda x: fn(x) - target, a, 0.0)
    b = 0.5 * (b0 + a)
    if not a < b:
        raise CertificateError(f"midpoint collapsed onto a={a!r}; eps too small for double precision")
    c = 1.0
    probes = []
    while True:
        probes.append(c)
        if rho(a, b, c) > 0.0 and lambda_neg(a, b, c) >= 0.0:
            break
        c *= 2.0
        if c > MAX_C:
            raise CertificateError(f"no c <= 2^60 with rho > 0 and lambda >= 0 (a={a}, b={b})")
    lam = lambda_neg(a, b, c)
    la = math.log1p(a)
    checks = [
        _check("b_in_range_lower", a, "<", b),
        _check("b_in_range_upper", b, "<", 0.0),
        _check("c_positive", c, ">", 0.0),
        _check("log_condition", la - math.log(a / b), "<", 0.0),
        _check("lambda_nonnegative", lam, ">=", 0.0),
        _check("lambda_window", b, "<=", a * (1.0 + a) ** c),
        _check("rho_positive", rho(a, b, c), ">", 0.0),
        _check("first_requirement", (1.0 + b) * la - a, "<=", -f(b, lam)),
        _check("second_requirement", a * a * (1.0 - eps) * coef(a), "<=", fn(b)),
        _check("log_moment_bound_below_threshold", math.log(b / a) - c * la, "<", -c * la),
    ]
    if variant == "beta":
        # E exp(N g(b)) <= exp((c+1) g(b)) E exp(T h(b)) via N <= (1+b)T + c + 1
        checks.append(_check("jump_count_chain", abs(g(b) * (1.0 + b) - h(b)), "<=", 1e-12))
    return Certificate(a, eps, variant, "negative", b, c, lam, b0, tuple(checks), c_probes=tuple(probes))


def surrogate(a: float, eps: float, variant: Variant = "alpha") -> Certificate:
    """Certificates for ``a = 0`` and ``a = -1`` through a nearby floor ``a'``.

    ``a'`` is chosen so that ``(1-eps) coef(a) <= (1-eps/2) coef(a')``; the
    construction for ``a'`` is then solved with slack ``eps/2``.
    """
    _check_eps(eps)
    _, coef = _variant_functions(variant)
    if a == 0.0:
        probe, step = 1.0, lambda p: 0.5 * p
        delegate, case = solve_positive, "zero-surrogate"
    elif a == -1.0:
        if variant == "beta":
            raise BetaNonexistenceError()
        probe, step = -0.5, lambda p: -1.0 + 0.5 * (p + 1.0)
        delegate, case = solve_negative, "minus-one-surrogate"
    else:
        raise DomainError(f"surrogate construction only covers a in {{0, -1}}, got {a!r}")
    need = (1.0 - eps) * coef(a)
    probes = []
    while True:
        probes.append(probe)
        if need <= (1.0 - 0.5 * eps) * coef(probe):
            break
        probe = step(probe)
        if len(probes) > 1100:
            raise CertificateError("surrogate search did not terminate")
    inner = delegate(probe, 0.5 * eps, variant)
    fn = h if variant == "alpha" else g
    extra = (
        _check("surrogate_rule", need, "<=", (1.0 - 0.5 * eps) * coef(probe)),
        _check("original_coefficient_integrable", need * probe * probe, "<=", fn(inner.b)),
    )
    return replace(
        inner,
        a=a,
        epsilon=eps,
        case=case,
        checks=extra + inner.checks,
        surrogate_a=probe,
        construction_epsilon=0.5 * eps,
        surrogate_probes=tuple(probes),
    )


def solve(a: float, eps: float, variant: Variant = "alpha") -> Certificate:
    """Dispatch on the sign of the jump floor."""
    a = float(a)
    if variant == "beta" and a == -1.0:
        raise BetaNonexistenceError()
    if a > 0:
        return solve_positive(a, eps, variant)
    if a == 0.0 or a == -1.0:
        return surrogate(a, eps, variant)
    if -1.0 < a < 0.0:
        return solve_negative(a, eps, variant)
    raise DomainError(f"jump floor must be >= -1, got {a!r}")


# --- verification -----------------------------------------------------------


@dataclass
class VerificationReport:
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    @property
    def failed(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]


def _h_direct(x: float) -> float:
    return 1.0 if x == -1.0 else (1.0 + x) * math.log1p(x) - x


def verify_certificate(cert: Certificate) -> VerificationReport:
    """Recompute every inequality of ``cert`` from its parameters.

    Uses only the raw formulas (the special functions ``alpha``/``beta`` for
    the coefficients) and never the solver's check list, so a tampered
    parameter shows up as a failing check.
    """
    rep = VerificationReport()
    add = lambda *args: rep.checks.append(_check(*args))  # noqa: E731
    a0, eps0 = cert.a, cert.epsilon
    a, eps, b, c, lam = cert.construction_a, cert.construction_eps, cert.b, cert.c, cert.lambda_
    beta_kind = cert.variant == "beta"

    def boundary(x: float) -> float:
        return _h_direct(x) / (1.0 + x) if beta_kind else _h_direct(x)

    def coefficient(x: float) -> float:
        return beta(x) if beta_kind else alpha(x)

    add("epsilon_in_range_lower", 0.0, "<", eps0)
    add("epsilon_in_range_upper", eps0, "<", 1.0)
    if cert.surrogate_a is not None:
        add("surrogate_rule", (1.0 - eps0) * coefficient(a0), "<=", (1.0 - 0.5 * eps0) * coefficient(a))
        add("construction_epsilon_halved", abs(eps - 0.5 * eps0), "<=", 0.0)
        add("original_coefficient_integrable", (1.0 - eps0) * coefficient(a0) * a * a, "<=", boundary(b))

    log1pa = math.log1p(a)
    drift_exponent = (1.0 + b) * log1pa - a
    neg_f = 1.0 - math.exp(-lam) - lam * (1.0 + b)

    if cert.c is None:
        add("b_in_range_lower", 0.0, "<", b)
        add("b_in_range_upper", b, "<", a)
        add("lambda_matches", abs(lam + math.log1p(b)), "<=", 1e-12 * max(1.0, abs(lam)))
        add("first_requirement", drift_exponent, "<=", neg_f)
        add("second_requirement", a * a * (1.0 - eps) * coefficient(a), "<=", boundary(b))
        add("moment_bound_below_1_plus_a", math.exp(-lam), "<", 1.0 + a)
    else:
        add("b_in_range_lower", a, "<", b)
        add("b_in_range_upper", b, "<", 0.0)
        add("c_positive", c, ">", 0.0)
        add("log_condition", log1pa - math.log(a / b), "<", 0.0)
        expected = (math.log(b / a) - c * log1pa) / (c + 1.0)
        add("lambda_matches", abs(lam - expected), "<=", 1e-12 * max(1.0, abs(lam)))
        add("lambda_nonnegative", lam, ">=", 0.0)
        add("lambda_window", b, "<=", a * (1.0 + a) ** c)
        slack = (
            1.0 + a
            - (1.0 + a) ** (c / (c + 1.0)) * (a / b) ** (1.0 / (c + 1.0))
            + (1.0 + b) / (c + 1.0) * (math.log(a / b) - log1pa)
        )
        add("rho_positive", slack, ">", 0.0)
        add("first_requirement", drift_exponent, "<=", neg_f)
        add("second_requirement", a * a * (1.0 - eps) * coefficient(a), "<=", boundary(b))
        add("log_moment_bound_below_threshold", math.log(b / a) - c * log1pa, "<", -c * log1pa)
    return rep
