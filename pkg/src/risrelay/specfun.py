"""Special functions and series machinery for the closed-form outage expressions.

Everything that multiplies factorials, powers and exponentials is composed in
log space; values only return to linear scale at the final summation.  The
nested sums over truncated exponential series are collapsed into polynomial
powers instead of being enumerated.
"""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from scipy.special import gammaln

__all__ = [
    "DomainError",
    "LogScaledValue",
    "PolyCoeffs",
    "log_factorial",
    "binomial",
    "upper_gamma_int",
    "log_upper_gamma_int_table",
    "trunc_exp_poly_power",
    "log_trunc_exp_poly_power",
    "log_poly_power",
    "log_convolve",
    "compensated_sum",
    "signed_logsumexp",
    "log_sum_positive",
]

_TINY = sys.float_info.min


class DomainError(ValueError):
    """Argument outside the domain of a special function."""


@dataclass(frozen=True)
class LogScaledValue:
    """A real number stored as ``sign * exp(log_magnitude)``.

    ``sign == 0`` encodes an exact zero and the magnitude is then ignored.
    Values built with :meth:`from_value` remember the original float, so the
    round trip back through :attr:`value` is exact.
    """

    log_magnitude: float
    sign: int = 1
    exact: float | None = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        if self.sign not in (-1, 0, 1):
            raise ValueError(f"sign must be -1, 0 or +1, got {self.sign}")

    @classmethod
    def from_value(cls, value: float) -> "LogScaledValue":
        if value == 0:
            return cls(-math.inf, 0)
        return cls(math.log(abs(value)), 1 if value > 0 else -1, float(value))

    @property
    def value(self) -> float:
        if self.sign == 0:
            return 0.0
        if self.exact is not None:
            return self.exact
        return self.sign * math.exp(self.log_magnitude)

    def __float__(self) -> float:
        return self.value

    def __mul__(self, other: "LogScaledValue") -> "LogScaledValue":
        if self.sign == 0 or other.sign == 0:
            return LogScaledValue(-math.inf, 0)
        return LogScaledValue(self.log_magnitude + other.log_magnitude, self.sign * other.sign)

    def __truediv__(self, other: "LogScaledValue") -> "LogScaledValue":
        if other.sign == 0:
            raise ZeroDivisionError("division by a zero LogScaledValue")
        if self.sign == 0:
            return self
        return LogScaledValue(self.log_magnitude - other.log_magnitude, self.sign * other.sign)


@dataclass(frozen=True)
class PolyCoeffs:
    """Polynomial coefficients, ``coefficients[s]`` multiplies ``x**s``."""

    coefficients: np.ndarray

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __len__(self) -> int:
        return len(self.coefficients)

    def __getitem__(self, s):
        return self.coefficients[s]

    def __call__(self, x):
        acc = 0 * x
        for c in self.coefficients[::-1]:
            acc = acc * x + c
        return acc


def log_factorial(n: int) -> float:
    """Natural log of ``n!``."""
    if n < 0:
        raise DomainError(f"log_factorial needs n >= 0, got {n}")
    if n < 2:
        return 0.0
    return math.lgamma(n + 1)


def binomial(n: int, k: int) -> LogScaledValue:
    """Binomial coefficient ``C(n, k)`` in log scale."""
    if n < 0 or k < 0 or k > n:
        raise DomainError(f"binomial needs 0 <= k <= n, got n={n}, k={k}")
    # exact integer, then a single correctly rounded log
    return LogScaledValue(math.log(math.comb(n, k)), 1)


def upper_gamma_int(a: int, x: float) -> LogScaledValue:
    """Upper incomplete gamma ``Γ(a, x)`` for integer ``a >= 1``.

    Uses ``Γ(n+1, x) = n! e^{-x} Σ_{m=0}^{n} x^m / m!`` with every term in
    log space, so it stays finite far beyond the double range of ``(a-1)!``.
    """
    if int(a) != a or a < 1:
        raise DomainError(f"upper_gamma_int needs an integer a >= 1, got {a}")
    if x < 0:
        raise DomainError(f"upper_gamma_int needs x >= 0, got {x}")
    return LogScaledValue(float(log_upper_gamma_int_table(int(a), x)[-1]), 1)


def log_upper_gamma_int_table(a_max: int, x: float) -> np.ndarray:
    """``ln Γ(a, x)`` for ``a = 1 .. a_max`` at fixed ``x``; index ``a - 1``."""
    if a_max < 1:
        raise DomainError(f"a_max must be >= 1, got {a_max}")
    if x < 0:
        raise DomainError(f"x must be >= 0, got {x}")
    m = np.arange(a_max)
    log_fact = gammaln(m + 1.0)
    if x == 0:
        return log_fact
    terms = m * math.log(x) - log_fact
    return log_fact - x + np.logaddexp.accumulate(terms)


def log_convolve(la: np.ndarray, lb: np.ndarray) -> np.ndarray:
    """Convolution of two non-negative sequences given by their logs."""
    if len(la) < len(lb):
        la, lb = lb, la
    out = np.full(len(la) + len(lb) - 1, -np.inf)
    for i, v in enumerate(lb):
        if v == -np.inf:
            continue
        seg = out[i : i + len(la)]
        np.logaddexp(seg, la + v, out=seg)
    return out


def log_poly_power(log_coeffs: np.ndarray, p: int, max_degree: int | None = None) -> np.ndarray:
    """Log coefficients of ``P(x)**p`` for a polynomial with non-negative coefficients.

    ``max_degree`` truncates the result (and every intermediate product),
    which is how power series are raised to a power.
    """
    if p < 0:
        raise DomainError(f"power must be >= 0, got {p}")
    log_coeffs = np.asarray(log_coeffs, dtype=float)
    result = np.zeros(1)
    for _ in range(p):
        result = log_convolve(result, log_coeffs)
        if max_degree is not None:
            result = result[: max_degree + 1]
    return result


def trunc_exp_poly_power(n_terms: int, p: int, exact: bool = False) -> PolyCoeffs:
    """Coefficients of ``T(x)**p`` with ``T(x) = Σ_{j<n_terms} x^j / j!``.

    Equivalent to summing ``Π 1/j_i!`` over all ``(j_1..j_p)`` of equal total
    degree, at ``O(p² n²)`` cost instead of ``O(n^p)``.  ``exact=True`` works
    in rationals.
    """
    if n_terms < 1:
        raise DomainError(f"n_terms must be >= 1, got {n_terms}")
    if p < 0:
        raise DomainError(f"power must be >= 0, got {p}")
    if exact:
        base = [Fraction(1, math.factorial(j)) for j in range(n_terms)]
        result = [Fraction(1)]
        for _ in range(p):
            nxt = [Fraction(0)] * (len(result) + n_terms - 1)
            for i, ri in enumerate(result):
                for j, bj in enumerate(base):
                    nxt[i + j] += ri * bj
            result = nxt
        return PolyCoeffs(np.array(result, dtype=object))
    base = np.exp(-gammaln(np.arange(n_terms) + 1.0))
    result = np.ones(1)
    for _ in range(p):
        result = np.convolve(result, base)
    return PolyCoeffs(result)


def log_trunc_exp_poly_power(n_terms: int, p: int) -> np.ndarray:
    """Log-space version of :func:`trunc_exp_poly_power`; safe for large ``n_terms * p``."""
    if n_terms < 1:
        raise DomainError(f"n_terms must be >= 1, got {n_terms}")
    return log_poly_power(-gammaln(np.arange(n_terms) + 1.0), p)


def compensated_sum(terms: Iterable[float]) -> tuple[float, float]:
    """Error-free-transformation sum plus a cancellation diagnostic.

    Returns ``(total, Σ|t| / max(|total|, tiny))``.  A ratio near 1 means
    no cancellation; ``ratio * eps`` bounds the relative error inherited
    from rounding in the individual terms.
    """
    terms = [float(t) for t in terms]
    total = math.fsum(terms)
    mass = math.fsum(abs(t) for t in terms)
    if mass == 0.0:
        return total, 1.0
    return total, mass / max(abs(total), _TINY)


def signed_logsumexp(log_mags: Sequence[float], signs: Sequence[int]) -> tuple[float, int, float]:
    """Sum ``Σ sign_i exp(l_i)`` returned as ``(log|S|, sign(S), cancellation_ratio)``.

    Terms are rescaled by the largest magnitude and summed with
    :func:`compensated_sum` in ascending magnitude order.
    """
    l = np.asarray(log_mags, dtype=float)
    s = np.asarray(signs, dtype=float)
    keep = np.isfinite(l) & (s != 0)
    if not keep.any():
        return -math.inf, 0, 1.0
    l, s = l[keep], s[keep]
    top = l.max()
    scaled = s * np.exp(l - top)
    order = np.argsort(np.abs(scaled))
    total, ratio = compensated_sum(scaled[order])
    if total == 0.0:
        return -math.inf, 0, math.inf
    return top + math.log(abs(total)), (1 if total > 0 else -1), ratio


def log_sum_positive(log_terms) -> float:
    """``ln Σ exp(l_i)`` for positive terms."""
    log_terms = np.asarray(log_terms, dtype=float)
    if log_terms.size == 0:
        return -math.inf
    top = log_terms.max()
    if top == -math.inf:
        return -math.inf
    return float(top + math.log(np.exp(log_terms - top).sum()))
