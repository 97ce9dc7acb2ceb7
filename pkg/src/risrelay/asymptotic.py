"""High-SNR outage: diversity order, coding gain and the dominant hop.

At high SNR each hop CDF is replaced by its leading power law
``(rate*g/C)**N / N!``, so both conditional outage terms reduce to a power
of ``rate*u/C`` times a moment ``E[Z**n]`` of the interference-plus-one
variable.  Outage then behaves as ``(G_c * rho) ** -G_d``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from . import specfun
from .analytic import decoding_set_pmf
from .channel import HopModel, InterferenceProfile, SystemConfig

__all__ = [
    "AsymptoticResult",
    "log_interference_moment",
    "asymptotic_dest_term",
    "asymptotic_relay_term",
    "first_hop_dominated_outage",
    "second_hop_dominated_outage",
    "asymptotic_outage",
    "fit_diversity_slope",
    "fit_coding_gain",
]

DOMINANT_HOPS = ("first", "second", "interference-decided-first", "interference-decided-second")


@dataclass(frozen=True)
class AsymptoticResult:
    probability: float
    diversity_order: int
    coding_gain: float
    dominant_hop: str
    # rho-free coefficients of the two competing hop contributions
    first_hop_coefficient: float = math.nan
    second_hop_coefficient: float = math.nan


def log_interference_moment(prof: InterferenceProfile, n: int) -> float:
    """``ln E[(1 + X)**n]`` for Erlang interference ``X``.

    Summed as ``Σ_m C(n, m) E[X**m]`` with ``E[X**m] = Γ(I+m) / (Γ(I) rate**m)``,
    which has no sign changes.
    """
    if n < 0:
        raise specfun.DomainError(f"moment order must be >= 0, got {n}")
    if prof.absent or n == 0:
        return 0.0
    m = np.arange(n + 1)
    terms = (
        gammaln(n + 1.0) - gammaln(m + 1.0) - gammaln(n - m + 1.0)
        + gammaln(prof.count + m) - gammaln(prof.count)
        - m * math.log(prof.rate)
    )
    return specfun.log_sum_positive(terms)


def _log_hop_term(hop: HopModel, prof: InterferenceProfile, u: float, set_size: int) -> float:
    n_tot = hop.n_elements * set_size
    return (
        n_tot * math.log(hop.shape_rate * u)
        - set_size * gammaln(hop.n_elements + 1.0)
        + log_interference_moment(prof, n_tot)
    )


def asymptotic_dest_term(cfg: SystemConfig, set_size: int) -> float:
    """High-SNR ``P[gamma_d < u | L]``, proportional to ``(rate*u)**(N2*L)``."""
    if set_size < 0:
        raise specfun.DomainError(f"set_size must be >= 0, got {set_size}")
    if set_size == 0:
        return 1.0
    if cfg.u == 0:
        return 0.0
    return math.exp(_log_hop_term(cfg.second_hop, cfg.dest_interference, cfg.u, set_size))


def asymptotic_relay_term(cfg: SystemConfig) -> float:
    """High-SNR per-relay decoding failure, proportional to ``(rate*u)**N1``."""
    if cfg.u == 0:
        return 0.0
    return math.exp(_log_hop_term(cfg.first_hop, cfg.relay_interference, cfg.u, 1))


def first_hop_dominated_outage(cfg: SystemConfig) -> float:
    """Outage when every relay failing to decode is the leading event: ``q**K``."""
    return asymptotic_relay_term(cfg) ** cfg.k_relays


def second_hop_dominated_outage(cfg: SystemConfig) -> float:
    """Outage when all ``K`` relays decode and the best second hop still fails."""
    return asymptotic_dest_term(cfg, cfg.k_relays)


def asymptotic_outage(cfg: SystemConfig) -> AsymptoticResult:
    """Full decoding-set sum of the high-SNR terms, with ``G_d``, ``G_c`` and dominance.

    The per-relay failure enters the binomial set law clipped to ``[0, 1]``,
    which only matters at SNRs where the power law exceeds one anyway.
    """
    k = cfg.k_relays
    q = asymptotic_relay_term(cfg)
    q_set = min(q, 1.0)
    pieces = [p_set * asymptotic_dest_term(cfg, L) for L, p_set in decoding_set_pmf(k, q_set)]
    prob, _ = specfun.compensated_sum(sorted(pieces))
    g_d = min(cfg.n1, cfg.n2) * k

    rho = cfg.rho
    first = (q * rho ** cfg.n1) ** k if cfg.u > 0 else 0.0
    second = asymptotic_dest_term(cfg, k) * rho ** (cfg.n2 * k) if cfg.u > 0 else 0.0
    if cfg.n1 < cfg.n2:
        dominant = "first"
    elif cfg.n2 < cfg.n1:
        dominant = "second"
    elif first > second and not math.isclose(first, second, rel_tol=1e-9):
        dominant = "interference-decided-first"
    else:
        dominant = "interference-decided-second"

    if prob > 0:
        coding_gain = math.exp(-math.log(prob) / g_d - math.log(rho))
    else:
        coding_gain = math.inf
    return AsymptoticResult(prob, g_d, coding_gain, dominant, first, second)


def _validated_points(points) -> tuple[np.ndarray, np.ndarray]:
    pts = list(points)
    if len(pts) < 2:
        raise specfun.DomainError("need at least two (snr_db, pout) points")
    snr = np.array([p[0] for p in pts], dtype=float)
    pout = np.array([p[1] for p in pts], dtype=float)
    if np.any(pout <= 0) or np.any(~np.isfinite(pout)):
        raise specfun.DomainError("all outage probabilities must be positive and finite")
    if np.any(np.diff(snr) <= 0):
        raise specfun.DomainError("snr_db must be strictly increasing")
    return snr, np.log10(pout)


def fit_diversity_slope(points) -> float:
    """Empirical diversity order: ``-10 *`` LS slope of ``log10(pout)`` vs SNR in dB."""
    snr, lp = _validated_points(points)
    slope = np.polyfit(snr, lp, 1)[0]
    return float(-10.0 * slope)


def fit_coding_gain(points) -> tuple[float, float]:
    """Fit ``pout = (G_c * rho)**-G_d``; returns ``(G_d, G_c)`` with ``G_c`` linear."""
    snr, lp = _validated_points(points)
    slope, intercept = np.polyfit(snr, lp, 1)
    g_d = -10.0 * slope
    return float(g_d), float(10.0 ** (-intercept / g_d))
