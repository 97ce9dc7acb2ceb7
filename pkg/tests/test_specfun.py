import itertools
import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from risrelay import specfun
from risrelay.specfun import (
    DomainError,
    LogScaledValue,
    binomial,
    compensated_sum,
    log_factorial,
    log_poly_power,
    log_trunc_exp_poly_power,
    signed_logsumexp,
    trunc_exp_poly_power,
    upper_gamma_int,
)


@pytest.mark.parametrize("n, expected", [(0, 0.0), (1, 0.0), (5, math.log(120))])
def test_log_factorial_small(n, expected):
    assert log_factorial(n) == pytest.approx(expected, rel=1e-15, abs=0)


def test_log_factorial_matches_big_integer_up_to_10000():
    # exact integer factorials, log taken in extended precision
    mpmath.mp.dps = 40
    for n in (2, 17, 170, 171, 1000, 9999, 10_000):
        exact = float(mpmath.log(mpmath.mpf(math.factorial(n))))
        assert abs(log_factorial(n) - exact) <= 1e-14 * exact


def test_log_factorial_rejects_negative():
    with pytest.raises(DomainError):
        log_factorial(-1)


@pytest.mark.parametrize("n, k, expected", [(4, 2, 6), (7, 0, 1), (0, 0, 1), (60, 30, 118264581564861424)])
def test_binomial_examples(n, k, expected):
    # exp of a log near 39 costs a few dozen ulps
    assert binomial(n, k).value == pytest.approx(expected, rel=1e-14)
    assert math.comb(n, k) == expected


@given(st.integers(0, 400), st.data())
def test_binomial_matches_exact_integer(n, data):
    k = data.draw(st.integers(0, n))
    exact = math.comb(n, k)
    assert binomial(n, k).log_magnitude == pytest.approx(math.log(exact), rel=1e-14, abs=1e-14)


def test_binomial_domain():
    with pytest.raises(DomainError):
        binomial(3, 4)


@pytest.mark.parametrize("x", [0.0, 0.3, 1.0, 7.5, 700.0, 2000.0])
def test_upper_gamma_one_is_exponential(x):
    v = upper_gamma_int(1, x)
    assert v.log_magnitude == pytest.approx(-x, rel=1e-14, abs=1e-15)


@pytest.mark.parametrize("a, x, expected", [(2, 1.0, 2 / math.e), (3, 2.0, 10 * math.exp(-2))])
def test_upper_gamma_examples(a, x, expected):
    assert upper_gamma_int(a, x).value == pytest.approx(expected, rel=1e-14)


def test_upper_gamma_three_two_by_quadrature():
    ref = mpmath.quad(lambda t: t**2 * mpmath.exp(-t), [2, mpmath.inf])
    assert upper_gamma_int(3, 2.0).value == pytest.approx(float(ref), rel=1e-13)


@pytest.mark.parametrize("a", [1, 2, 5, 20, 171, 500])
def test_upper_gamma_at_zero_is_factorial(a):
    assert upper_gamma_int(a, 0.0).log_magnitude == pytest.approx(log_factorial(a - 1), rel=1e-13, abs=1e-15)


@settings(max_examples=300)
@given(st.integers(1, 50), st.floats(0.0, 100.0))
def test_upper_gamma_recurrence(a, x):
    lhs = upper_gamma_int(a + 1, x).value
    tail = 0.0 if x == 0 else math.exp(a * math.log(x) - x)
    rhs = a * upper_gamma_int(a, x).value + tail
    assert lhs == pytest.approx(rhs, rel=1e-11)


@pytest.mark.parametrize("a, x", [(1, -0.1), (0, 1.0), (2.5, 1.0)])
def test_upper_gamma_domain(a, x):
    with pytest.raises(DomainError):
        upper_gamma_int(a, x)


def test_upper_gamma_beyond_double_range():
    # Γ(400, 10) is about 399!, far beyond 1e308
    v = upper_gamma_int(400, 10.0)
    ref = mpmath.log(mpmath.gammainc(400, 10))
    assert v.log_magnitude == pytest.approx(float(ref), rel=1e-13)


@pytest.mark.parametrize(
    "n, p, expected",
    [(2, 2, [1, 2, 1]), (3, 1, [1, 1, 0.5]), (3, 2, [1, 2, 2, 1, 0.25]), (4, 0, [1])],
)
def test_trunc_exp_poly_power_examples(n, p, expected):
    np.testing.assert_allclose(trunc_exp_poly_power(n, p).coefficients, expected, rtol=1e-15)


def _brute_force(n, p):
    out = [Fraction(0)] * ((n - 1) * p + 1)
    for js in itertools.product(range(n), repeat=p):
        term = Fraction(1)
        for j in js:
            term /= math.factorial(j)
        out[sum(js)] += term
    return out


@pytest.mark.parametrize("n", range(1, 6))
@pytest.mark.parametrize("p", range(0, 5))
def test_trunc_exp_poly_power_matches_enumeration(n, p):
    exact = trunc_exp_poly_power(n, p, exact=True)
    assert list(exact.coefficients) == _brute_force(n, p)
    np.testing.assert_allclose(
        trunc_exp_poly_power(n, p).coefficients, [float(c) for c in exact.coefficients], rtol=1e-14
    )
    np.testing.assert_allclose(
        np.exp(log_trunc_exp_poly_power(n, p)), [float(c) for c in exact.coefficients], rtol=1e-13
    )


@given(st.integers(1, 8), st.integers(0, 5), st.floats(0.0, 10.0))
def test_trunc_exp_poly_power_evaluates_to_power(n, p, u):
    poly = trunc_exp_poly_power(n, p)
    direct = sum(u**j / math.factorial(j) for j in range(n)) ** p
    assert poly(u) == pytest.approx(direct, rel=1e-12)


def test_log_poly_power_truncation():
    full = log_poly_power(np.log([1.0, 1.0]), 5)
    cut = log_poly_power(np.log([1.0, 1.0]), 5, max_degree=2)
    np.testing.assert_allclose(np.exp(full), [1, 5, 10, 10, 5, 1], rtol=1e-14)
    np.testing.assert_allclose(np.exp(cut), [1, 5, 10], rtol=1e-14)


def test_compensated_sum_designed_cancellation():
    total, ratio = compensated_sum([1.0, -1.0, 1e-16])
    assert total == 1e-16
    assert ratio == pytest.approx(2e16, rel=1e-12)


def test_compensated_sum_same_sign():
    assert compensated_sum([1, 2, 3]) == (6.0, 1.0)


def test_compensated_sum_alternating_harmonic():
    terms = [(-1) ** (n + 1) / n for n in range(1, 10_001)]
    mpmath.mp.dps = 50
    ref = mpmath.fsum(mpmath.mpf(-1) ** (n + 1) / n for n in range(1, 10_001))
    total, _ = compensated_sum(terms)
    assert abs(total - float(ref)) <= 1e-12


def test_compensated_sum_empty_and_zero():
    assert compensated_sum([]) == (0.0, 1.0)
    assert compensated_sum([0.0, 0.0]) == (0.0, 1.0)


def test_signed_logsumexp_matches_direct():
    vals = [3.0, -2.5, 1e-3, -1e-3]
    lm, sg, ratio = signed_logsumexp(np.log(np.abs(vals)), np.sign(vals))
    assert sg * math.exp(lm) == pytest.approx(0.5, rel=1e-14)
    assert ratio == pytest.approx(sum(abs(v) for v in vals) / 0.5, rel=1e-12)


def test_signed_logsumexp_far_out_of_range():
    lm, sg, _ = signed_logsumexp([5000.0, 5000.0 + math.log(3)], [1, -1])
    assert sg == -1
    assert lm == pytest.approx(5000.0 + math.log(2), rel=1e-15)


@given(st.floats(-1e300, 1e300, allow_nan=False))
def test_log_scaled_round_trip(x):
    v = LogScaledValue.from_value(x)
    if x == 0:
        assert v.sign == 0 and v.value == 0.0
    else:
        assert v.value == x
        assert v.log_magnitude == pytest.approx(math.log(abs(x)), rel=1e-15, abs=1e-300)


def test_log_scaled_zero_ignores_magnitude():
    assert LogScaledValue(123.0, 0).value == 0.0
    prod = LogScaledValue(5.0, 0) * LogScaledValue(1.0, -1)
    assert prod.sign == 0


def test_log_scaled_arithmetic():
    a, b = LogScaledValue.from_value(-6.0), LogScaledValue.from_value(3.0)
    assert (a * b).value == pytest.approx(-18.0)
    assert (a / b).value == pytest.approx(-2.0)
    with pytest.raises(ZeroDivisionError):
        a / LogScaledValue.from_value(0.0)
    with pytest.raises(ValueError):
        LogScaledValue(0.0, 2)


def test_log_sum_positive():
    assert specfun.log_sum_positive([]) == -math.inf
    assert specfun.log_sum_positive(np.log([1.0, 2.0, 3.0])) == pytest.approx(math.log(6.0))
