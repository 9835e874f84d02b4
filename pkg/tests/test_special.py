import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from novikov.special import (
    ALPHA_PRIME_SERIES_RADIUS,
    DEFAULT_POLICY,
    BetaNonexistenceError,
    DomainError,
    EvalPolicy,
    JumpFloor,
    alpha,
    _series_alpha,
    _series_alpha_prime,
    _series_g,
    _series_h,
    alpha_prime,
    argmin_f,
    beta,
    check_jump_domination,
    f,
    g,
    h,
)

mpmath.mp.dps = 50
E = math.e


def mp_h(x):
    x = mpmath.mpf(x)
    return (1 + x) * mpmath.log1p(x) - x


def mp_alpha(x):
    x = mpmath.mpf(x)
    return mp_h(x) / x**2


def mp_alpha_prime(x):
    return mpmath.diff(mp_alpha, mpmath.mpf(x))


class TestExamples:
    def test_h(self):
        assert h(-1) == 1.0
        assert h(0) == 0.0
        assert h(1) == pytest.approx(2 * math.log(2) - 1, abs=1e-15)
        assert h(1) == pytest.approx(0.3862944, abs=1e-7)

    def test_g(self):
        assert g(0) == 0.0
        assert g(1) == pytest.approx(math.log(2) - 0.5, abs=1e-15)
        assert g(E - 1) == pytest.approx(1 - (E - 1) / E, abs=1e-15)
        assert g(E - 1) == pytest.approx(0.3678794, abs=1e-7)

    def test_alpha(self):
        assert alpha(0) == 0.5
        assert alpha(-1) == 1.0
        # h(e-1) = 1, so alpha(e-1) = 1/(e-1)^2 = 0.33869688...
        assert alpha(E - 1) == pytest.approx(1 / (E - 1) ** 2, rel=1e-14)
        assert alpha(E - 1) == pytest.approx(0.3386969, abs=1e-7)

    def test_beta(self):
        assert beta(0) == 0.5
        assert beta(1) == pytest.approx((2 * math.log(2) - 1) / 2, abs=1e-15)
        assert beta(-0.99) > 50
        assert beta(-0.99) == pytest.approx(float(mp_h(-0.99) / (mpmath.mpf(-0.99) ** 2 * mpmath.mpf("0.01"))), rel=1e-12)

    def test_beta_minus_one_refused(self):
        with pytest.raises(BetaNonexistenceError, match="does not exist"):
            beta(-1)
        assert issubclass(BetaNonexistenceError, DomainError)

    def test_alpha_prime(self):
        assert alpha_prime(0) == pytest.approx(-1 / 6, abs=1e-15)
        assert alpha_prime(1) == pytest.approx(2 - 3 * math.log(2), abs=1e-15)
        step = 1e-5
        fd = (alpha(0.5 + step) - alpha(0.5 - step)) / (2 * step)
        assert alpha_prime(0.5) == pytest.approx(fd, abs=1e-8)

    def test_f(self):
        for b in (-0.9, 0, 1, 7):
            assert f(b, 0) == 0.0
        assert f(1, -math.log(2)) == pytest.approx(1 - 2 * math.log(2), abs=1e-15)
        assert f(1, -math.log(2)) == pytest.approx(-h(1), abs=1e-15)
        assert f(0.5, 1) == pytest.approx(math.exp(-1) + 0.5, abs=1e-15)

    def test_argmin_f(self):
        assert argmin_f(0) == (0.0, 0.0)
        lam, val = argmin_f(1)
        assert lam == pytest.approx(-math.log(2), abs=1e-16)
        assert val == pytest.approx(h(1), abs=1e-15)
        lam, val = argmin_f(-0.5)
        assert lam == pytest.approx(math.log(2), abs=1e-16)
        assert val == pytest.approx(0.1534264, abs=1e-7)
        assert val == pytest.approx(h(-0.5), abs=1e-15)

    def test_jump_domination_examples(self):
        assert check_jump_domination(0, "alpha", [0, 0.5, 1, 5, 100]) <= 0
        assert check_jump_domination(-0.5, "beta", [-0.5, 0, 1, 10]) <= 0
        for a in (-0.7, 0.3, 2.0, 13.0):
            assert abs(h(a) - alpha(a) * a * a) <= 1e-12 * max(1.0, h(a))


class TestDomains:
    @pytest.mark.parametrize("fn", [h, alpha])
    def test_below_minus_one(self, fn):
        with pytest.raises(DomainError):
            fn(-1.0000001)

    @pytest.mark.parametrize("fn", [g, alpha_prime])
    def test_at_minus_one(self, fn):
        with pytest.raises(DomainError):
            fn(-1)

    def test_beta_below_minus_one_is_plain_domain_error(self):
        with pytest.raises(DomainError) as info:
            beta(-2)
        assert not isinstance(info.value, BetaNonexistenceError)

    def test_nan_rejected(self):
        with pytest.raises(DomainError):
            h(float("nan"))
        with pytest.raises(DomainError):
            JumpFloor(float("nan"))

    def test_jump_floor(self):
        assert float(JumpFloor(-1)) == -1.0
        with pytest.raises(DomainError):
            JumpFloor(-1.5)

    def test_policy_validation(self):
        with pytest.raises(ValueError):
            EvalPolicy(series_threshold=0.2)
        with pytest.raises(ValueError):
            EvalPolicy(tolerance=0)

    def test_grid_below_floor(self):
        with pytest.raises(DomainError):
            check_jump_domination(0.5, "alpha", [0.4])
        with pytest.raises(ValueError):
            check_jump_domination(0.5, "gamma", [1.0])


class TestAccuracy:
    """Against 50-digit references, including the series branches."""

    @pytest.mark.parametrize(
        "x", [-0.999, -0.5, -1e-3, -9.99e-5, -1e-7, 1e-12, 3e-5, 9.99e-5, 1.001e-4, 0.01, 1.0, 50.0]
    )
    def test_h_g_alpha(self, x):
        ref_h = mp_h(x)
        assert h(x) == pytest.approx(float(ref_h), rel=1e-13)
        assert g(x) == pytest.approx(float(ref_h / (1 + mpmath.mpf(x))), rel=1e-13)
        assert alpha(x) == pytest.approx(float(mp_alpha(x)), rel=1e-13)

    @pytest.mark.parametrize("x", [-0.9, -0.2, -0.0499, -1e-3, 1e-6, 0.03, 0.0501, 0.2, 3.0])
    def test_alpha_prime(self, x):
        assert alpha_prime(x) == pytest.approx(float(mp_alpha_prime(x)), rel=1e-11, abs=1e-13)

    def test_alpha_prime_branches_agree_at_radius(self):
        r = ALPHA_PRIME_SERIES_RADIUS
        for x in (r * (1 + 1e-9), -r * (1 + 1e-9)):
            direct = alpha_prime(x)
            assert abs(_series_alpha_prime(x) - direct) < 1e-12


class TestInvariants:
    def test_monotone_on_dense_grid(self):
        grid = np.linspace(-1, 20, 10_000)
        a_vals = np.array([alpha(a) for a in grid])
        assert np.all(np.diff(a_vals) < 0)
        b_vals = np.array([beta(a) for a in grid[1:]])
        assert np.all(np.diff(b_vals) < 0)
        assert np.all(a_vals > 0) and np.all(b_vals > 0)

    def test_seams(self):
        # closed form just outside the switch radius vs. the series at the same point
        t = DEFAULT_POLICY.series_threshold
        n = DEFAULT_POLICY.series_terms
        for x in (t * (1 + 1e-6), -t * (1 + 1e-6)):
            assert abs(alpha(x) - _series_alpha(x, n)) < DEFAULT_POLICY.tolerance
            assert abs(h(x) - _series_h(x, n)) < DEFAULT_POLICY.tolerance
            assert abs(g(x) - _series_g(x, n)) < DEFAULT_POLICY.tolerance
        for x in (t * (1 - 1e-6), -t * (1 - 1e-6)):
            assert abs(alpha(x) - float(mp_alpha(x))) < DEFAULT_POLICY.tolerance
        assert abs(alpha(-1 + 1e-8) - 1) < 1e-6

    def test_narrow_policy_still_accurate(self):
        narrow = EvalPolicy(series_threshold=1e-4)
        assert narrow.series_terms == 6
        for x in (-3e-5, 5e-5, 2e-4):
            assert alpha(x, narrow) == pytest.approx(float(mp_alpha(x)), abs=5e-12)

    def test_identity_g_h(self):
        for x in np.linspace(-0.999, 100, 2001):
            assert abs(g(x) - h(x) / (1 + x)) < 1e-12

    def test_derivative_consistency(self):
        t = DEFAULT_POLICY.series_threshold
        for a in np.linspace(-0.99, 10, 997):
            if abs(a) < 2 * t:
                continue
            # smaller step near -1, where the third derivative blows up
            step = 1e-5 * min(1.0, 10 * (1 + a))
            fd = (alpha(a + step) - alpha(a - step)) / (2 * step)
            assert abs(alpha_prime(a) - fd) < 1e-7
            assert alpha_prime(a) < 0

    def test_optimum_consistency(self):
        for b in np.linspace(-0.999, 10, 1001):
            lam, val = argmin_f(b)
            assert abs(val - h(b)) < 1e-12
            # a minimum: neighbours are not lower
            assert f(b, lam - 1e-4) >= f(b, lam) and f(b, lam + 1e-4) >= f(b, lam)

    def test_domination_grid(self):
        for a in np.linspace(-1, 20, 100):
            xs = np.linspace(a, a + 30, 100)
            assert check_jump_domination(a, "alpha", xs) <= 1e-12
            if a > -1:
                assert check_jump_domination(a, "beta", xs) <= 1e-12


@settings(max_examples=300, deadline=None)
@given(st.floats(-1, 1e3), st.floats(-1, 1e3))
def test_alpha_order_reversing(x, y):
    if x < y:
        assert alpha(x) >= alpha(y)


@settings(max_examples=300, deadline=None)
@given(st.floats(-0.999, 1e3), st.floats(0, 1))
def test_h_convex_combination(x, w):
    # h is convex: h(w x) <= w h(x) for w in [0, 1] since h(0) = 0
    assert h(w * x) <= w * h(x) + 1e-12 * (1 + abs(h(x)))


@settings(max_examples=300, deadline=None)
@given(st.floats(-0.999, 50), st.floats(-20, 20), st.floats(-20, 20), st.floats(0, 1))
def test_f_convex_in_lambda(b, l1, l2, w):
    lhs = f(b, w * l1 + (1 - w) * l2)
    rhs = w * f(b, l1) + (1 - w) * f(b, l2)
    assert lhs <= rhs + 1e-9 * (1 + abs(rhs))


@settings(max_examples=300, deadline=None)
@given(st.floats(-0.999, 100), st.floats(0, 50))
def test_domination_property(a, dx):
    x = a + dx
    assert h(x) - alpha(a) * x * x <= 1e-12 * (1 + x * x)
    assert g(x) - beta(a) * x * x <= 1e-12 * (1 + beta(a) * x * x)
