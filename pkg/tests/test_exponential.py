import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import optimize

from novikov.exponential import (
    CensoredRecordError,
    CompensatedPoissonSpec,
    lb_value,
    log_terminal_exponential_lower,
    lower_passage_mgf,
    stochastic_exponential_at,
    terminal_bound_upper,
    terminal_exponential_lower,
    terminal_exponential_upper,
    terminal_log_value,
    terminal_mass_lower,
    variation_functionals,
)
from novikov.poisson import FixedHorizon, LowerBarrier, StoppingRecord, UpperBarrier, simulate
from novikov.special import DomainError, f, h

SEED = 42


def rec(t, n, hit=True):
    return StoppingRecord(t, n, hit, n + 1)


class TestStochasticExponential:
    def test_examples(self):
        zero = CompensatedPoissonSpec(0.0)
        assert stochastic_exponential_at(zero, 7, 3.2) == 1.0
        assert stochastic_exponential_at(CompensatedPoissonSpec(1.0), 2, 1.0) == pytest.approx(4 * math.exp(-1), rel=1e-15)
        assert stochastic_exponential_at(CompensatedPoissonSpec(1.0), 2, 1.0) == pytest.approx(1.4715178, abs=1e-7)
        minus_one = CompensatedPoissonSpec(-1.0)
        assert stochastic_exponential_at(minus_one, 1, 0.5) == 0.0
        assert stochastic_exponential_at(minus_one, 0, 0.5) == pytest.approx(math.exp(0.5))

    def test_product_formula(self):
        # E(M)_t = exp(M_t) prod (1+dM) exp(-dM) with M_t = a (n - t)
        a, n, t = 0.7, 5, 2.3
        direct = math.exp(a * (n - t)) * ((1 + a) * math.exp(-a)) ** n
        assert stochastic_exponential_at(CompensatedPoissonSpec(a), n, t) == pytest.approx(direct, rel=1e-14)

    def test_continuous_part(self):
        spec = CompensatedPoissonSpec(0.5, continuous_qv=0.8)
        base = stochastic_exponential_at(CompensatedPoissonSpec(0.5), 3, 1.0)
        assert stochastic_exponential_at(spec, 3, 1.0) == pytest.approx(base * math.exp(-0.4), rel=1e-15)

    def test_vectorized(self):
        out = stochastic_exponential_at(CompensatedPoissonSpec(0.5), np.array([0, 1, 2]), np.array([0.0, 1.0, 2.0]))
        assert out.shape == (3,) and out[0] == 1.0

    def test_domain(self):
        with pytest.raises(DomainError):
            CompensatedPoissonSpec(-1.5)
        with pytest.raises(ValueError):
            CompensatedPoissonSpec(0.5, continuous_qv=-1.0)

    def test_no_overflow_in_log_space(self):
        # T in the thousands: the log form stays finite where a naive product would overflow
        r = rec(5000.0, 2 * 5000 - 1)
        logv = log_terminal_exponential_lower(1.0, 1.0, r)
        assert math.isfinite(logv)


class TestTerminalValues:
    def test_lower_example(self):
        value = terminal_exponential_lower(1.0, 1.0, rec(1.5, 2))
        assert value == pytest.approx(0.5 * math.exp(1.5 * (2 * math.log(2) - 1)), rel=1e-15)
        assert value == pytest.approx(4 * math.exp(-1.5), rel=1e-14)

    def test_lower_matches_generic_on_simulated_records(self):
        a, b = 0.8, 0.6
        batch = simulate(LowerBarrier(b), 1000, SEED)
        closed = terminal_exponential_lower(a, b, batch)
        generic = stochastic_exponential_at(CompensatedPoissonSpec(a), batch.jumps_at_passage, batch.passage_time)
        assert np.allclose(closed, generic, rtol=1e-10, atol=0)

    def test_lower_small_a_continuity(self):
        assert terminal_exponential_lower(1e-8, 0.5, rec(3.0, 3)) == pytest.approx(1.0, abs=1e-6)

    def test_upper_example(self):
        value = terminal_exponential_upper(-0.5, rec(0.3, 1))
        assert value == pytest.approx(0.5 * math.exp(0.15), rel=1e-15)
        assert value == pytest.approx(0.5809, abs=1e-4)

    def test_upper_bound_on_simulated_records(self):
        a, b, c = -0.5, -0.47, 8.0
        batch = simulate(UpperBarrier(b, c), 1000, SEED)
        value = terminal_exponential_upper(a, batch)
        bound = terminal_bound_upper(a, b, c, batch)
        assert np.all(value <= bound * (1 + 1e-12))

    def test_upper_small_a_continuity(self):
        assert terminal_exponential_upper(-1e-9, rec(2.0, 4)) == pytest.approx(1.0, abs=1e-7)

    def test_censored_rejected(self):
        bad = StoppingRecord(math.nan, 0, False, 10)
        with pytest.raises(CensoredRecordError):
            terminal_exponential_lower(1.0, 1.0, bad)
        with pytest.raises(CensoredRecordError):
            terminal_exponential_upper(-0.5, bad)
        with pytest.raises(CensoredRecordError):
            variation_functionals(CompensatedPoissonSpec(1.0), bad)

    def test_domain_checks(self):
        with pytest.raises(DomainError):
            terminal_exponential_lower(-0.5, 1.0, rec(1.0, 1))
        with pytest.raises(DomainError):
            terminal_exponential_upper(0.5, rec(1.0, 1))

    def test_dispatch(self):
        r = rec(1.5, 2)
        lower = CompensatedPoissonSpec(1.0, LowerBarrier(1.0))
        assert terminal_log_value(lower, r) == pytest.approx(math.log(4) - 1.5)
        fixed = CompensatedPoissonSpec(1.0, FixedHorizon(1.5))
        assert terminal_log_value(fixed, r) == pytest.approx(math.log(4) - 1.5)
        with pytest.raises(ValueError):
            terminal_log_value(CompensatedPoissonSpec(1.0), r)


class TestVariation:
    def test_examples(self):
        assert variation_functionals(CompensatedPoissonSpec(1.0), rec(1.5, 2)) == (2.0, 1.5)
        assert variation_functionals(CompensatedPoissonSpec(0.0), rec(1.5, 2)) == (0.0, 0.0)

    def test_lower_identity_on_records(self):
        a, b = 0.4, 1.0
        batch = simulate(LowerBarrier(b), 1000, SEED)
        qv, pqv = variation_functionals(CompensatedPoissonSpec(a, LowerBarrier(b)), batch)
        assert np.allclose(qv, a * a * ((1 + b) * pqv / (a * a) - 1), rtol=1e-9)


class TestLb:
    def test_examples(self):
        assert lb_value(0.3, 0.0, 5, 2.0) == 1.0
        assert lb_value(0.3, 1.7, 0, 0.0) == 1.0
        v = lb_value(1.0, -math.log(2), 2, 1.5)
        assert v == pytest.approx(math.exp(-math.log(2) + 1.5 * (2 * math.log(2) - 1)), rel=1e-14)

    @settings(max_examples=200, deadline=None)
    @given(
        st.floats(-0.9, 3), st.floats(-2, 2), st.integers(0, 20), st.floats(0, 5), st.floats(0, 5)
    )
    def test_telescoping(self, b, lam, n, s, dt):
        t = s + dt
        lhs = lb_value(b, lam, n, t)
        rhs = lb_value(b, lam, n, s) * math.exp(lam * (1 + b) * dt - dt * f(b, lam))
        assert lhs == pytest.approx(rhs, rel=1e-9)


class TestPassageMgf:
    """Exact E exp(theta T_b) against the ballot-formula series for the law of T_b."""

    @staticmethod
    def density_oracle(b, theta, n_max=200_000):
        # P(T_b = n/(1+b)) = P(first n with U_n >= n/(1+b) is n); exact via the ballot-type
        # formula P(N_{n/(1+b)} = n-1, no earlier crossing) = (1/n) e^{-t} t^{n-1}/(n-1)!
        s = 1.0 + b
        total = 0.0
        for n in range(1, n_max):
            t = n / s
            logp = -math.log(n) - t + (n - 1) * math.log(t) - math.lgamma(n)
            term = math.exp(logp + theta * t)
            total += term
            if n > 10 and term < 1e-18 * total:
                break
        return total

    @pytest.mark.parametrize("b,theta", [(1.0, 0.0), (1.0, 0.2), (0.5, -0.3), (3.0, 1.0), (0.25, 0.01)])
    def test_against_series(self, b, theta):
        assert theta <= h(b)
        assert lower_passage_mgf(b, theta) == pytest.approx(self.density_oracle(b, theta), rel=1e-9)

    def test_brentq_root(self):
        b, theta = 0.9, 0.15
        lam = optimize.brentq(lambda l: -f(b, l) - theta, -math.log1p(b), 20)
        assert lower_passage_mgf(b, theta) == pytest.approx(math.exp(-lam), rel=1e-12)

    def test_boundary_and_beyond(self):
        b = 0.7
        assert lower_passage_mgf(b, h(b)) == pytest.approx(1 + b, rel=1e-12)
        assert lower_passage_mgf(b, h(b) * 1.01) == math.inf

    def test_terminal_mass_below_one(self):
        for a in (0.2, 1.0, 4.0):
            for frac in (0.1, 0.5, 0.99):
                b = frac * a
                m = terminal_mass_lower(a, b)
                assert 0 < m <= (1 + b) / (1 + a) < 1

    def test_probabilities_sum_to_one(self):
        # theta = 0: total mass 1, i.e. T_b is finite almost surely
        assert self.density_oracle(1.0, 0.0) == pytest.approx(1.0, rel=1e-12)
