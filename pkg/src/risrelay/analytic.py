"""Closed-form outage probability of the RIS-assisted DF relay network.

Both the per-relay decoding failure and the destination outage given ``L``
decoded relays are instances of one integral,

    P_L = ∫_1^∞ f_Z(z) F(u z)^L dz,

with ``F`` the RIS hop CDF and ``Z = 1 + X`` the interference-plus-noise
term.  Expanding ``F^L`` binomially and ``f_Z`` over the powers of ``z``
gives a finite alternating sum of upper incomplete gamma functions
(:func:`closed_form_hop_outage`).  Deep in the high-SNR tail that sum
cancels to far below double precision, so the same integral is also
available as a positive-term series (:func:`series_hop_outage`); ``form="auto"``
starts from the closed form and switches when its cancellation ratio says
the digits are gone.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from . import specfun
from .channel import HopModel, InterferenceProfile, SystemConfig, ris_hop_cdf
from .specfun import log_trunc_exp_poly_power, log_upper_gamma_int_table, signed_logsumexp

__all__ = [
    "CancellationWarning",
    "OutageEstimate",
    "HopOutageTerm",
    "CANCELLATION_WARN",
    "closed_form_hop_outage",
    "series_hop_outage",
    "hop_outage",
    "relay_decode_failure",
    "dest_outage_given_set",
    "decoding_set_distribution",
    "decoding_set_pmf",
    "outage_probability",
]

CANCELLATION_WARN = 1e12
# closed form is accepted in "auto" mode while ratio * eps stays below ~1e-11
_AUTO_SWITCH_RATIO = 1e5
_SERIES_TMAX = 1 << 15
_SERIES_REL_STOP = -42.0  # ln(~6e-19)


class CancellationWarning(RuntimeWarning):
    """The alternating closed form lost most of its significant digits."""


@dataclass(frozen=True)
class HopOutageTerm:
    value: float
    cancellation_ratio: float = 1.0
    terms: int = 0
    form: str = "closed"
    converged: bool = True

    @property
    def flags(self) -> tuple[str, ...]:
        out = []
        if self.form == "closed" and self.cancellation_ratio > CANCELLATION_WARN:
            out.append("cancellation")
        if not self.converged:
            out.append("series-not-converged")
        return tuple(out)


@dataclass(frozen=True)
class OutageEstimate:
    """An outage probability with the diagnostics of the path that produced it."""

    probability: float
    method: str
    cancellation_ratio: float = 1.0
    ci_halfwidth: float = 0.0
    terms_evaluated: int = 0
    raw_probability: float | None = None
    flags: tuple[str, ...] = field(default_factory=tuple)

    @classmethod
    def clamped(cls, raw: float, method: str, **kw) -> "OutageEstimate":
        flags = tuple(kw.pop("flags", ()))
        prob = min(max(raw, 0.0), 1.0)
        if prob != raw:
            flags = flags + ("clamped",)
        return cls(probability=prob, method=method, raw_probability=raw, flags=flags, **kw)


def _check_unit_power(cfg: SystemConfig) -> None:
    if not cfg.unit_power:
        raise ValueError("closed-form analysis assumes unit mean channel power on both hops")


def _no_interference(hop: HopModel, u: float, set_size: int) -> HopOutageTerm:
    return HopOutageTerm(float(ris_hop_cdf(u, hop)) ** set_size, terms=1, form="no-interference")


def closed_form_hop_outage(
    hop: HopModel,
    prof: InterferenceProfile,
    u: float,
    set_size: int,
    literal: bool = False,
) -> HopOutageTerm:
    """Alternating closed form of ``∫ f_Z(z) F(uz)^L dz``.

    Term ``(g, k, s)`` is

        rate_I^I e^{rate_I} / (I-1)! * C(I-1, g) (-1)^{I-1-g} * C(L, k) (-1)^k
        * c_s a^s * Γ(g+s+1, mu_k) / mu_k^{g+s+1},

    with ``a = rate*u/C``, ``mu_k = rate_I + k a`` and ``c_s`` the
    coefficients of ``(Σ_{j<N} x^j/j!)^k``.

    ``literal=True`` reproduces the printed typography instead: the power
    prefactor uses ``rate_I + k*rate*u`` (no ``1/C``) and the polynomial
    power is ``k + 1``.  It only exists to document that discrepancy.
    """
    if set_size < 0:
        raise specfun.DomainError(f"set_size must be >= 0, got {set_size}")
    if set_size == 0:
        return HopOutageTerm(1.0, terms=1)
    if u == 0:
        return HopOutageTerm(0.0, terms=1)
    if prof.absent:
        return _no_interference(hop, u, set_size)

    n, lam_i, count = hop.n_elements, prof.rate, prof.count
    a = hop.shape_rate * u
    log_a = math.log(a)
    log_pref = count * math.log(lam_i) + lam_i - gammaln(count)
    g = np.arange(count)
    log_binom_g = gammaln(count) - gammaln(g + 1.0) - gammaln(count - g)
    sign_g = np.where((count - 1 - g) % 2 == 0, 1, -1)

    logs: list[np.ndarray] = []
    signs: list[np.ndarray] = []
    for k in range(set_size + 1):
        mu = lam_i + k * a
        mu_pref = lam_i + k * hop.rate * u if literal else mu
        power = k + 1 if literal else k
        lc = log_trunc_exp_poly_power(n, power)
        s = np.arange(len(lc))
        log_gamma = log_upper_gamma_int_table(count + len(lc) - 1, mu)
        gs = g[:, None] + s[None, :]
        log_terms = (
            log_pref
            + math.lgamma(set_size + 1) - math.lgamma(k + 1) - math.lgamma(set_size - k + 1)
            + log_binom_g[:, None]
            + lc[None, :]
            + s[None, :] * log_a
            + log_gamma[gs]
            - (gs + 1) * math.log(mu_pref)
        )
        sign = sign_g[:, None] * (-1 if k % 2 else 1) * np.ones_like(gs)
        logs.append(log_terms.ravel())
        signs.append(sign.ravel())

    log_all = np.concatenate(logs)
    sign_all = np.concatenate(signs)
    log_mag, sgn, ratio = signed_logsumexp(log_all, sign_all)
    value = 0.0 if sgn == 0 else sgn * math.exp(log_mag)
    return HopOutageTerm(value, cancellation_ratio=ratio, terms=len(log_all), form="closed")


def _log_shifted_moments(count: int, lam_i: float, nu: float, n_max: int) -> np.ndarray:
    """``ln ∫_0^∞ Erlang(count, lam_i)(x) (1+x)^n e^{-(nu-lam_i) x} dx`` for ``n = 0..n_max``.

    With ``W ~ Gamma(count, nu)`` and ``M_n = E[(1+W)^n]``, integration by
    parts gives ``M_{n+1} = M_n (1 + (n+count)/nu) - (n/nu) M_{n-1}``; run on
    the ratio ``M_{n-1}/M_n <= 1`` the step factor stays positive, so the
    recurrence is stable and never leaves log space.
    """
    log_m = np.empty(n_max + 1)
    log_m[0] = 0.0
    if n_max >= 1:
        log_m[1] = math.log1p(count / nu)
    for n in range(1, n_max):
        ratio = math.exp(log_m[n - 1] - log_m[n])
        log_m[n + 1] = log_m[n] + math.log(1.0 + (n + count) / nu - n / nu * ratio)
    return count * (math.log(lam_i) - math.log(nu)) + log_m


def series_hop_outage(hop: HopModel, prof: InterferenceProfile, u: float, set_size: int) -> HopOutageTerm:
    """Positive-term series for ``∫ f_Z(z) F(uz)^L dz``.

    Uses ``F(x) = e^{-x} Σ_{j>=N} x^j/j!`` so that
    ``F(az)^L = e^{-Laz} Σ_t e_t (az)^{NL+t}`` with ``e_t >= 0``, and integrates
    each power against the shifted Erlang exactly.  Terms decay geometrically
    with ratio ``L a / (rate_I + L a)``; intended for the small-``a`` regime
    where the alternating form cancels.
    """
    if set_size == 0:
        return HopOutageTerm(1.0, terms=1, form="series")
    if u == 0:
        return HopOutageTerm(0.0, terms=1, form="series")
    if prof.absent:
        return _no_interference(hop, u, set_size)

    n, lam_i, count, L = hop.n_elements, prof.rate, prof.count, set_size
    a = hop.shape_rate * u
    log_a = math.log(a)
    nu = lam_i + L * a
    head = n * L

    t_max = 64
    while True:
        log_tail = -gammaln(n + np.arange(t_max + 1) + 1.0)
        log_e = specfun.log_poly_power(log_tail, L, max_degree=t_max)
        t = np.arange(len(log_e))
        log_terms = log_e + (head + t) * log_a - L * a + _log_shifted_moments(count, lam_i, nu, head + t_max)[head:]
        total = specfun.log_sum_positive(log_terms)
        tail = log_terms[-4:]
        converged = bool(np.all(tail - total < _SERIES_REL_STOP) and np.all(np.diff(tail) < 0))
        if converged or t_max >= _SERIES_TMAX:
            break
        t_max *= 2
    return HopOutageTerm(math.exp(total), terms=len(log_terms), form="series", converged=converged)


def hop_outage(
    hop: HopModel,
    prof: InterferenceProfile,
    u: float,
    set_size: int,
    form: str = "auto",
) -> HopOutageTerm:
    """``P[max of set_size hop SNRs / Z < u]`` by the requested evaluation form.

    ``form`` is one of ``"auto"``, ``"closed"``, ``"series"``, ``"literal"``.
    """
    if form == "closed":
        return closed_form_hop_outage(hop, prof, u, set_size)
    if form == "literal":
        return closed_form_hop_outage(hop, prof, u, set_size, literal=True)
    if form == "series":
        return series_hop_outage(hop, prof, u, set_size)
    if form != "auto":
        raise ValueError(f"unknown form {form!r}")
    closed = closed_form_hop_outage(hop, prof, u, set_size)
    if closed.cancellation_ratio <= _AUTO_SWITCH_RATIO:
        return closed
    series = series_hop_outage(hop, prof, u, set_size)
    if series.converged:
        return HopOutageTerm(
            series.value,
            cancellation_ratio=closed.cancellation_ratio,
            terms=closed.terms + series.terms,
            form="series",
        )
    return closed


def _warn(term: HopOutageTerm, what: str) -> None:
    if term.cancellation_ratio > CANCELLATION_WARN and term.form == "closed":
        warnings.warn(
            f"{what}: cancellation ratio {term.cancellation_ratio:.3g}, result unreliable",
            CancellationWarning,
            stacklevel=3,
        )


def relay_term(cfg: SystemConfig, form: str = "auto") -> HopOutageTerm:
    _check_unit_power(cfg)
    return hop_outage(cfg.first_hop, cfg.relay_interference, cfg.u, 1, form)


def dest_term(cfg: SystemConfig, set_size: int, form: str = "auto") -> HopOutageTerm:
    _check_unit_power(cfg)
    if not 0 <= set_size <= cfg.k_relays:
        raise specfun.DomainError(f"set_size must lie in [0, {cfg.k_relays}], got {set_size}")
    return hop_outage(cfg.second_hop, cfg.dest_interference, cfg.u, set_size, form)


def relay_decode_failure(cfg: SystemConfig, form: str = "auto") -> float:
    """Probability that one relay fails to decode, ``P[gamma_s,k < u]``."""
    term = relay_term(cfg, form)
    _warn(term, "relay_decode_failure")
    return term.value


def dest_outage_given_set(cfg: SystemConfig, set_size: int, form: str = "auto") -> float:
    """``P[gamma_d < u | |B_L| = set_size]``; 1 for an empty decoding set."""
    term = dest_term(cfg, set_size, form)
    _warn(term, "dest_outage_given_set")
    return term.value


def decoding_set_pmf(k_relays: int, q: float) -> list[tuple[int, float]]:
    """Binomial law of the decoding-set size for per-relay failure ``q``."""
    return [
        (L, math.comb(k_relays, L) * (1.0 - q) ** L * q ** (k_relays - L))
        for L in range(k_relays + 1)
    ]


def decoding_set_distribution(cfg: SystemConfig, form: str = "auto") -> list[tuple[int, float]]:
    """``[(L, P[|B_L| = L]) for L in 0..K]`` under i.i.d. relays."""
    return decoding_set_pmf(cfg.k_relays, relay_decode_failure(cfg, form))


def outage_probability(cfg: SystemConfig, form: str = "auto") -> OutageEstimate:
    """End-to-end outage probability, summing over decoding-set sizes."""
    if cfg.u == 0:
        return OutageEstimate(0.0, "analytic", raw_probability=0.0, terms_evaluated=0)
    q_term = relay_term(cfg, form)
    terms = [q_term]
    pieces = []
    for L, p_set in decoding_set_pmf(cfg.k_relays, q_term.value):
        d = dest_term(cfg, L, form)
        terms.append(d)
        pieces.append(d.value * p_set)
    raw, _ = specfun.compensated_sum(sorted(pieces, key=abs))
    flags = sorted({f for t in terms for f in t.flags})
    worst = max(t.cancellation_ratio for t in terms)
    est = OutageEstimate.clamped(
        raw,
        "analytic",
        cancellation_ratio=worst,
        terms_evaluated=sum(t.terms for t in terms),
        flags=tuple(flags),
    )
    if "cancellation" in est.flags:
        warnings.warn(
            f"outage_probability: cancellation ratio {worst:.3g}, result unreliable",
            CancellationWarning,
            stacklevel=2,
        )
    return est
