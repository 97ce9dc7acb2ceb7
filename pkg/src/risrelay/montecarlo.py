"""Monte Carlo simulation of the two-phase RIS-assisted DF protocol.

Every random number is a pure function of ``(key, trial, slot)``: the
SplitMix64 finalizer applied to ``key + counter * golden``, where
``counter = trial * 2**20 + slot``.  Any partition of the trial range over
workers therefore yields the same draws and the same outage count.

Draw layout of one trial (slot order):
    for each relay: N1 first-hop amplitudes, then I_k relay interferers
    for each relay: N2 second-hop amplitudes
    I_d destination interferers
All draws are unit exponentials ``E``; a Rayleigh amplitude of unit mean
power is ``sqrt(E)`` and an interferer of mean power ``rho_I`` is ``rho_I*E``.
Draws are independent of SNR, interference power and threshold, so configs
differing only in those share their random numbers (see
:func:`simulate_batch`).
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numba
import numpy as np
from scipy.stats import norm

from .channel import InterferenceProfile, SystemConfig

__all__ = [
    "SimSpec",
    "SimResult",
    "CounterStream",
    "derive_key",
    "draw_ris_gain",
    "draw_interference",
    "run_trial",
    "simulate",
    "simulate_batch",
    "wilson_interval",
    "trial_stream",
]

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
SLOT_BITS = 20
MAX_TRIALS = 1 << (64 - SLOT_BITS)
Z99 = float(norm.ppf(0.995))
LOW_EVENT_COUNT = 10


def _mix64_py(z: int) -> int:
    z &= _MASK
    z = ((z ^ (z >> 30)) * _M1) & _MASK
    z = ((z ^ (z >> 27)) * _M2) & _MASK
    return z ^ (z >> 31)


def derive_key(seed: int, *path: int) -> int:
    """64-bit stream key for ``seed`` and an optional derivation path."""
    if not 0 <= seed <= _MASK:
        raise ValueError("seed must be an unsigned 64-bit integer")
    key = _mix64_py(seed ^ 0x6A09E667F3BCC908)
    for p in path:
        key = _mix64_py(key ^ _mix64_py((p + 1) * _GOLDEN))
    return key


def _exp_from_bits(bits: int) -> float:
    # U = (m + 1) / 2**53 lies in (0, 1] and is exact, so -log(U) keeps full
    # relative precision in both tails
    return -math.log(((bits >> 11) + 1) * 2.0 ** -53)


class CounterStream:
    """The random numbers of one trial, drawn in slot order.

    Exposes the subset of the :class:`numpy.random.Generator` interface that
    the draw functions use, so the pure-Python trial can be checked against
    the compiled kernel draw by draw.
    """

    def __init__(self, key: int, trial: int):
        self.key = key & _MASK
        self.counter = trial << SLOT_BITS
        self.trial = trial

    def _next_bits(self) -> int:
        bits = _mix64_py(self.key + self.counter * _GOLDEN)
        self.counter += 1
        return bits

    def random(self, size=None):
        if size is None:
            return ((self._next_bits() >> 11) + 1) * 2.0 ** -53
        return np.array([self.random() for _ in range(int(np.prod(size)))]).reshape(size)

    def standard_exponential(self, size=None):
        if size is None:
            return _exp_from_bits(self._next_bits())
        n = int(np.prod(size))
        return np.array([_exp_from_bits(self._next_bits()) for _ in range(n)]).reshape(size)


def draw_ris_gain(n_elements: int, rng, size=None, mean_power: float = 1.0):
    """``(Σ_i a_i)**2`` for ``n_elements`` Rayleigh amplitudes with ``E[a**2] = mean_power``.

    Ideal phase alignment: amplitudes add coherently.
    """
    if n_elements < 1:
        raise ValueError("n_elements must be >= 1")
    if size is None:
        acc = 0.0
        for e in rng.standard_exponential(n_elements):
            acc += math.sqrt(e)
        return acc * acc * mean_power
    e = rng.standard_exponential((*np.atleast_1d(size), n_elements))
    return np.sqrt(e).sum(axis=-1) ** 2 * mean_power


def draw_interference(prof: InterferenceProfile, rho_i_linear: float, rng, size=None):
    """Aggregate interference: ``count`` exponentials of mean ``rho_i_linear`` each."""
    if prof.absent:
        return 0.0 if size is None else np.zeros(size)
    if size is None:
        acc = 0.0
        for e in rng.standard_exponential(prof.count):
            acc += e
        return rho_i_linear * acc
    return rho_i_linear * rng.standard_exponential((*np.atleast_1d(size), prof.count)).sum(axis=-1)


def _interference_power(cfg: SystemConfig) -> tuple[float, float]:
    r = cfg.relay_interference
    d = cfg.dest_interference
    return (0.0 if r.absent else r.mean_power), (0.0 if d.absent else d.mean_power)


def run_trial(cfg: SystemConfig, rng) -> bool:
    """One realization of the protocol; ``True`` on end-to-end outage.

    Relays whose first-hop SINR reaches ``u`` form the decoding set; the one
    with the largest second-hop gain forwards (lowest index on ties).
    """
    rho, u = cfg.rho, cfg.u
    rho_ir, rho_id = _interference_power(cfg)
    relay_prof, dest_prof = cfg.relay_interference, cfg.dest_interference
    decoded = []
    for _ in range(cfg.k_relays):
        g = draw_ris_gain(cfg.n1, rng)
        x = draw_interference(relay_prof, 1.0, rng)
        decoded.append(rho * cfg.mean_power_first * g / (rho_ir * x + 1.0) >= u)
    best = -1.0
    for r in range(cfg.k_relays):
        g = draw_ris_gain(cfg.n2, rng)
        if decoded[r] and g > best:
            best = g
    x_d = draw_interference(dest_prof, 1.0, rng)
    if best < 0.0:
        return True
    return rho * cfg.mean_power_second * best / (rho_id * x_d + 1.0) < u


@numba.njit(inline="always")
def _mix64(z):
    z = (z ^ (z >> numba.uint64(30))) * numba.uint64(_M1)
    z = (z ^ (z >> numba.uint64(27))) * numba.uint64(_M2)
    return z ^ (z >> numba.uint64(31))


@numba.njit(inline="always")
def _unit_exp(key, counter):
    bits = _mix64(key + counter * numba.uint64(_GOLDEN))
    return -math.log((np.float64(np.int64(bits >> numba.uint64(11))) + 1.0) * 1.1102230246251565e-16)


@numba.njit(nogil=True, cache=True)
def _count_outages(key, start, stop, n1, n2, k, i_r, i_d, pw1, pw2, params):
    """Outage counts over trials ``[start, stop)`` for each row of ``params``.

    ``params[p] = (rho, rho_i_relay, rho_i_dest, u)`` in linear scale.
    """
    n_par = params.shape[0]
    counts = np.zeros(n_par, dtype=np.int64)
    g1 = np.empty(k)
    x1 = np.empty(k)
    g2 = np.empty(k)
    ukey = numba.uint64(key)
    for t in range(start, stop):
        ctr = numba.uint64(t) << numba.uint64(SLOT_BITS)
        for r in range(k):
            acc = 0.0
            for _ in range(n1):
                acc += math.sqrt(_unit_exp(ukey, ctr))
                ctr += numba.uint64(1)
            g1[r] = acc * acc
            acc = 0.0
            for _ in range(i_r):
                acc += _unit_exp(ukey, ctr)
                ctr += numba.uint64(1)
            x1[r] = acc
        for r in range(k):
            acc = 0.0
            for _ in range(n2):
                acc += math.sqrt(_unit_exp(ukey, ctr))
                ctr += numba.uint64(1)
            g2[r] = acc * acc
        x2 = 0.0
        for _ in range(i_d):
            x2 += _unit_exp(ukey, ctr)
            ctr += numba.uint64(1)
        for p in range(n_par):
            rho = params[p, 0]
            u = params[p, 3]
            best = -1.0
            for r in range(k):
                if rho * pw1 * g1[r] / (params[p, 1] * x1[r] + 1.0) >= u and g2[r] > best:
                    best = g2[r]
            if best < 0.0 or rho * pw2 * best / (params[p, 2] * x2 + 1.0) < u:
                counts[p] += 1
    return counts


def wilson_interval(count: int, trials: int, z: float = Z99) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    p = count / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    centre = (p + z2 / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z2 / (4 * trials * trials)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


@dataclass(frozen=True)
class SimSpec:
    config: SystemConfig
    trials: int
    seed: int = 0
    workers: int = 1
    # derivation path below the master seed (e.g. sweep point index)
    stream: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if not 1 <= self.trials < MAX_TRIALS:
            raise ValueError(f"trials must lie in [1, 2**{64 - SLOT_BITS})")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if not 0 <= self.seed <= _MASK:
            raise ValueError("seed must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class SimResult:
    outage_count: int
    trials: int
    estimate: float
    ci99_halfwidth: float
    ci_low: float
    ci_high: float
    flags: tuple[str, ...] = field(default_factory=tuple)

    @classmethod
    def from_count(cls, count: int, trials: int) -> "SimResult":
        lo, hi = wilson_interval(count, trials)
        flags = ("low-event-count",) if count < LOW_EVENT_COUNT else ()
        return cls(count, trials, count / trials, (hi - lo) / 2.0, lo, hi, flags)

    def wilson(self, z: float) -> tuple[float, float]:
        return wilson_interval(self.outage_count, self.trials, z)


def _structure(cfg: SystemConfig) -> tuple:
    r, d = cfg.relay_interference, cfg.dest_interference
    return (cfg.n1, cfg.n2, cfg.k_relays,
            0 if r.absent else r.count, 0 if d.absent else d.count,
            cfg.mean_power_first, cfg.mean_power_second)


def _chunks(trials: int, workers: int) -> list[tuple[int, int]]:
    bounds = np.linspace(0, trials, workers + 1).astype(np.int64)
    return [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def simulate_batch(configs, trials: int, seed: int = 0, workers: int = 1,
                   stream: tuple[int, ...] = ()) -> list[SimResult]:
    """Simulate several configs that differ only in SNR, interference power and ``R``.

    They share one draw set, and each result is bit-identical to
    ``simulate(SimSpec(cfg, trials, seed, stream=stream))``.
    """
    configs = list(configs)
    if not configs:
        return []
    shapes = {_structure(c) for c in configs}
    if len(shapes) != 1:
        raise ValueError("batched configs must share element, relay and interferer counts")
    n1, n2, k, i_r, i_d, pw1, pw2 = shapes.pop()
    if k * (n1 + n2 + i_r) + i_d >= 1 << SLOT_BITS:
        raise ValueError("too many draws per trial for the counter layout")
    SimSpec(configs[0], trials, seed, workers, stream)  # validation
    params = np.array([[c.rho, *_interference_power(c), c.u] for c in configs], dtype=np.float64)
    key = derive_key(seed, *stream)
    # uint64 keys cross into numba as a signed int64 bit pattern
    key_arg = np.uint64(key)

    def work(span):
        return _count_outages(key_arg, span[0], span[1], n1, n2, k, i_r, i_d, pw1, pw2, params)

    spans = _chunks(trials, workers)
    if workers == 1:
        parts = [work(s) for s in spans]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(work, spans))
    counts = np.sum(parts, axis=0)
    return [SimResult.from_count(int(c), trials) for c in counts]


def simulate(spec: SimSpec) -> SimResult:
    """Outage count over ``spec.trials`` independent protocol realizations."""
    return simulate_batch([spec.config], spec.trials, spec.seed, spec.workers, spec.stream)[0]


def trial_stream(seed: int, trial: int, stream: tuple[int, ...] = ()) -> CounterStream:
    """The :class:`CounterStream` the kernel uses for ``trial``."""
    return CounterStream(derive_key(seed, *stream), trial)
