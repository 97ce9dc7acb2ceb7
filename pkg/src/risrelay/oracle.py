"""Quadrature referee for the closed-form terms.

Integrates ``f_Z(z) F(uz)^L`` numerically with the same hop CDF the closed
forms use, so disagreement points at the algebra rather than at the hop
model.  Also hosts the expanded (alternating) forms of the interference
density and its moments, which production code avoids.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import gammainccinv, gammaln

from .analytic import decoding_set_pmf
from .channel import (
    HopModel,
    InterferenceProfile,
    SystemConfig,
    best_relay_cdf,
    interference_plus_one_pdf,
)
from .specfun import compensated_sum

__all__ = [
    "OracleError",
    "QuadratureSettings",
    "tail_cut",
    "quad_hop_outage",
    "quad_dest_outage",
    "quad_relay_outage",
    "quad_outage_probability",
    "expanded_interference_plus_one_pdf",
    "expanded_interference_moment",
]


class OracleError(RuntimeError):
    """Quadrature did not converge within its subdivision budget."""


@dataclass(frozen=True)
class QuadratureSettings:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    # None: derive per integrand from the Erlang survival function
    tail_cut: float | None = None
    limit: int = 1000

    def __post_init__(self) -> None:
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.tail_cut is not None and not self.tail_cut > 1:
            raise ValueError("tail_cut must exceed 1")


def tail_cut(prof: InterferenceProfile, extra_shape: int = 0, mass: float = 1e-14) -> float:
    """Upper integration limit for ``z = 1 + X``.

    The integrand grows at most like ``z**extra_shape`` times the Erlang
    density, so the cut is where an Erlang of shape ``count + extra_shape``
    keeps less than ``mass`` in its tail (with a small safety factor).
    """
    shape = prof.count + extra_shape
    x = float(gammainccinv(shape, mass * 1e-3)) / prof.rate
    return 1.0 + 1.5 * x + 10.0 / prof.rate


def quad_hop_outage(
    hop: HopModel,
    prof: InterferenceProfile,
    u: float,
    set_size: int,
    settings: QuadratureSettings = QuadratureSettings(),
) -> float:
    """``∫_1^∞ f_Z(z) F(uz)^L dz`` by adaptive quadrature."""
    if set_size < 0:
        raise ValueError(f"set_size must be >= 0, got {set_size}")
    if prof.absent:
        return float(best_relay_cdf(u, hop, set_size))
    if u == 0 and set_size > 0:
        return 0.0
    upper = settings.tail_cut or tail_cut(prof, hop.n_elements * set_size, settings.abs_tol)

    def integrand(z: float) -> float:
        return interference_plus_one_pdf(z, prof) * best_relay_cdf(u * z, hop, set_size)

    # breakpoints at the Erlang mode and the mode of the size-biased law
    pts = sorted({1.0 + max(prof.count - 1, 0) / prof.rate,
                  1.0 + (prof.count - 1 + hop.n_elements * set_size) / prof.rate})
    pts = [p for p in pts if 1.0 < p < upper]
    value, err, info, *rest = integrate.quad(
        integrand, 1.0, upper,
        epsabs=0.0, epsrel=settings.rel_tol, limit=settings.limit,
        points=pts or None, full_output=1,
    )
    if rest:
        raise OracleError(f"quadrature failed: {rest[0]}")
    return float(value)


def quad_dest_outage(cfg: SystemConfig, set_size: int,
                     settings: QuadratureSettings = QuadratureSettings()) -> float:
    return quad_hop_outage(cfg.second_hop, cfg.dest_interference, cfg.u, set_size, settings)


def quad_relay_outage(cfg: SystemConfig, settings: QuadratureSettings = QuadratureSettings()) -> float:
    return quad_hop_outage(cfg.first_hop, cfg.relay_interference, cfg.u, 1, settings)


def quad_outage_probability(cfg: SystemConfig, settings: QuadratureSettings = QuadratureSettings()) -> float:
    """End-to-end outage with every conditional term taken from quadrature."""
    if cfg.u == 0:
        return 0.0
    q = quad_relay_outage(cfg, settings)
    pieces = [p * quad_dest_outage(cfg, L, settings) for L, p in decoding_set_pmf(cfg.k_relays, q)]
    return compensated_sum(sorted(pieces))[0]


def expanded_interference_plus_one_pdf(z, prof: InterferenceProfile):
    """Density of ``Z = 1 + X`` as a binomially expanded alternating sum.

    ``-(rate^I / (I-1)!) (-1)^I e^{rate} Σ_g C(I-1, g) (-1)^g z^g e^{-rate z}`` on
    ``z >= 1``; equal to the shifted Erlang, but cancellation-prone.
    """
    zz = np.asarray(z, dtype=float)
    i, lam = prof.count, prof.rate
    pref = -(lam ** i) / math.factorial(i - 1) * (-1) ** i * math.exp(lam)
    acc = np.zeros_like(zz)
    for g in range(i):
        acc = acc + math.comb(i - 1, g) * (-1) ** g * zz ** g * np.exp(-lam * zz)
    out = np.where(zz >= 1.0, pref * acc, 0.0)
    return float(out) if np.ndim(z) == 0 else out


def expanded_interference_moment(prof: InterferenceProfile, n: int) -> float:
    """``E[Z**n]`` through the alternating incomplete-gamma sum over ``g``."""
    from scipy.special import gammaincc

    i, lam = prof.count, prof.rate
    pref = -(lam ** i) / math.factorial(i - 1) * (-1) ** i * math.exp(lam)
    terms = []
    for g in range(i):
        order = g + n + 1
        upper_gamma = math.exp(gammaln(order)) * gammaincc(order, lam)
        terms.append(pref * math.comb(i - 1, g) * (-1) ** g * upper_gamma / lam ** order)
    return compensated_sum(terms)[0]
