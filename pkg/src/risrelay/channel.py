"""Distribution layer: RIS hop CDFs, aggregate interference and parameter bookkeeping.

A hop through an ``N``-element RIS with ideal phase alignment has SNR
``rho * (sum of N Rayleigh amplitudes)**2``.  It is modelled by the
moment-matched gamma law

    F(g) = 1 - exp(-rate*g/C) * sum_{k<N} (rate*g/C)**k / k!,
    C = 1 + (N - 1) * Gamma(3/2)**2,

which is the regularized lower incomplete gamma ``P(N, rate*g/C)``; the
latter is what is evaluated, since the textbook form loses every digit to
cancellation in the lower tail.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import gammainc, gammaln

from .specfun import DomainError

__all__ = [
    "HopModel",
    "InterferenceProfile",
    "SystemConfig",
    "scaling_constant",
    "outage_threshold",
    "ris_hop_cdf",
    "ris_hop_cdf_asymptotic",
    "interference_plus_one_pdf",
    "best_relay_cdf",
    "db_to_linear",
]

GAMMA_3_2_SQ = math.pi / 4.0


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def scaling_constant(n_elements: int) -> float:
    """``1 + (n - 1) * Gamma(3/2)**2``, i.e. mean RIS gain per element."""
    if n_elements < 1:
        raise DomainError(f"n_elements must be >= 1, got {n_elements}")
    return 1.0 + (n_elements - 1) * GAMMA_3_2_SQ


def outage_threshold(rate_threshold: float) -> float:
    """SINR threshold ``u = 2**(2R) - 1`` for a two-phase DF link at rate ``R``."""
    if rate_threshold < 0:
        raise DomainError(f"rate threshold must be >= 0, got {rate_threshold}")
    return 2.0 ** (2.0 * rate_threshold) - 1.0


@dataclass(frozen=True)
class HopModel:
    """One RIS-assisted hop: element count, exponential rate ``1/(rho*power)``."""

    n_elements: int
    rate: float

    def __post_init__(self) -> None:
        if self.n_elements < 1:
            raise ValueError(f"n_elements must be >= 1, got {self.n_elements}")
        if not self.rate > 0:
            raise ValueError(f"rate must be > 0, got {self.rate}")

    @property
    def scaling(self) -> float:
        return scaling_constant(self.n_elements)

    @property
    def shape_rate(self) -> float:
        """Rate of the equivalent gamma law, ``rate / C``."""
        return self.rate / self.scaling


@dataclass(frozen=True)
class InterferenceProfile:
    """``count`` i.i.d. exponential interferers of rate ``1/(rho_I*sigma_I**2)``.

    ``absent=True`` is the pure-noise receiver; ``count`` and ``rate`` are
    then ignored.
    """

    count: int = 1
    rate: float = 1.0
    absent: bool = False

    def __post_init__(self) -> None:
        if self.absent:
            return
        if self.count < 1:
            raise ValueError("count must be >= 1; use InterferenceProfile.none() for no interference")
        if not self.rate > 0:
            raise ValueError(f"rate must be > 0, got {self.rate}")

    @classmethod
    def none(cls) -> "InterferenceProfile":
        return cls(count=0, rate=1.0, absent=True)

    @classmethod
    def from_db(cls, count: int, rho_i_db: float, sigma_sq: float = 1.0) -> "InterferenceProfile":
        if count == 0:
            return cls.none()
        return cls(count=count, rate=1.0 / (db_to_linear(rho_i_db) * sigma_sq))

    @property
    def mean_power(self) -> float:
        """Mean interference power per interferer (``1/rate``)."""
        return 0.0 if self.absent else 1.0 / self.rate


@dataclass(frozen=True)
class SystemConfig:
    """Full network parameterization.

    Field names double as the keys of the flat configuration file.
    ``i_relay`` interferers hit every relay (i.i.d. across relays), ``i_dest``
    hit the destination; a count of 0 means no interference at that node.
    """

    n1: int
    n2: int
    k_relays: int
    rate_threshold: float
    snr_db: float
    i_relay: int = 1
    i_dest: int = 1
    rho_i_relay_db: float = 0.0
    rho_i_dest_db: float = 0.0
    mean_power_first: float = 1.0
    mean_power_second: float = 1.0

    def __post_init__(self) -> None:
        for name in ("n1", "n2", "k_relays"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v}")
        for name in ("i_relay", "i_dest"):
            v = getattr(self, name)
            if int(v) != v or v < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {v}")
        if not self.rate_threshold >= 0:
            raise ValueError(f"rate_threshold must be >= 0, got {self.rate_threshold}")
        if not (self.mean_power_first > 0 and self.mean_power_second > 0):
            raise ValueError("mean channel powers must be > 0")
        for name in ("snr_db", "rho_i_relay_db", "rho_i_dest_db"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    def replace(self, **changes) -> "SystemConfig":
        return replace(self, **changes)

    @property
    def u(self) -> float:
        return outage_threshold(self.rate_threshold)

    @property
    def rho(self) -> float:
        return db_to_linear(self.snr_db)

    @property
    def first_hop(self) -> HopModel:
        return HopModel(self.n1, 1.0 / (self.rho * self.mean_power_first))

    @property
    def second_hop(self) -> HopModel:
        return HopModel(self.n2, 1.0 / (self.rho * self.mean_power_second))

    @property
    def relay_interference(self) -> InterferenceProfile:
        return InterferenceProfile.from_db(self.i_relay, self.rho_i_relay_db)

    @property
    def dest_interference(self) -> InterferenceProfile:
        return InterferenceProfile.from_db(self.i_dest, self.rho_i_dest_db)

    @property
    def unit_power(self) -> bool:
        return self.mean_power_first == 1.0 and self.mean_power_second == 1.0


def _check_nonneg(x) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise DomainError("argument must be >= 0")
    return arr


def _scalar_or_array(arr: np.ndarray, like):
    return float(arr) if np.ndim(like) == 0 else arr


def ris_hop_cdf(gamma, hop: HopModel):
    """CDF of the RIS hop SNR at ``gamma`` (scalar or array)."""
    g = _check_nonneg(gamma)
    x = hop.shape_rate * g
    if hop.n_elements == 1:
        # gammainc(1, x) drifts by ~1e-14 relative at tiny x
        return _scalar_or_array(-np.expm1(-x), gamma)
    return _scalar_or_array(gammainc(hop.n_elements, x), gamma)


def ris_hop_cdf_asymptotic(gamma, hop: HopModel):
    """Leading small-argument term ``(rate*g/C)**N / N!`` of :func:`ris_hop_cdf`."""
    g = _check_nonneg(gamma)
    n = hop.n_elements
    with np.errstate(divide="ignore"):
        out = np.exp(n * np.log(hop.shape_rate * g) - gammaln(n + 1.0))
    return _scalar_or_array(out, gamma)


def interference_plus_one_pdf(z, prof: InterferenceProfile):
    """Density of ``Z = 1 + X`` with ``X`` the Erlang aggregate interference.

    Direct shifted-Erlang form ``rate**I (z-1)**(I-1) exp(-rate (z-1)) / (I-1)!``
    evaluated through logs; zero for ``z < 1``.
    """
    if prof.absent:
        raise ValueError("no-interference profile has a point mass at z = 1, not a density")
    zz = np.asarray(z, dtype=float)
    x = zz - 1.0
    inside = x >= 0
    xs = np.where(inside, x, 1.0)
    i = prof.count
    with np.errstate(divide="ignore"):
        logx = np.log(xs) if i > 1 else np.zeros_like(xs)
    logpdf = i * math.log(prof.rate) + (i - 1) * logx - prof.rate * xs - gammaln(i)
    out = np.where(inside, np.exp(logpdf), 0.0)
    return _scalar_or_array(out, z)


def best_relay_cdf(y, hop: HopModel, set_size: int):
    """CDF of the best of ``set_size`` i.i.d. hops; the empty set gives 1."""
    if set_size < 0:
        raise DomainError(f"set_size must be >= 0, got {set_size}")
    g = _check_nonneg(y)
    if set_size == 0:
        return _scalar_or_array(np.ones_like(g), y)
    return _scalar_or_array(np.asarray(ris_hop_cdf(g, hop)) ** set_size, y)
