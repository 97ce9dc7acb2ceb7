import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from risrelay.channel import (
    HopModel,
    InterferenceProfile,
    SystemConfig,
    best_relay_cdf,
    db_to_linear,
    interference_plus_one_pdf,
    outage_threshold,
    ris_hop_cdf,
    ris_hop_cdf_asymptotic,
    scaling_constant,
)
from risrelay.oracle import expanded_interference_plus_one_pdf
from risrelay.specfun import DomainError


@pytest.mark.parametrize("n, expected", [(1, 1.0), (2, 1 + math.pi / 4), (5, 1 + math.pi)])
def test_scaling_constant(n, expected):
    assert scaling_constant(n) == pytest.approx(expected, rel=1e-15)
    assert HopModel(n, 0.3).scaling == scaling_constant(n)


@pytest.mark.parametrize("rate, u", [(0.5, 1.0), (1.0, 3.0), (0.0, 0.0)])
def test_outage_threshold(rate, u):
    assert outage_threshold(rate) == u


def test_outage_threshold_rejects_negative_rate():
    with pytest.raises(DomainError):
        outage_threshold(-0.1)


def test_hop_model_rejects_bad_parameters():
    with pytest.raises(ValueError):
        HopModel(0, 1.0)
    with pytest.raises(ValueError):
        HopModel(2, 0.0)


def test_interference_profile_validation():
    with pytest.raises(ValueError):
        InterferenceProfile(count=0, rate=1.0)
    with pytest.raises(ValueError):
        InterferenceProfile(count=1, rate=-1.0)
    assert InterferenceProfile.from_db(0, 10).absent
    prof = InterferenceProfile.from_db(2, 10)
    assert prof.rate == pytest.approx(0.1)
    assert prof.mean_power == pytest.approx(10.0)


def test_system_config_derived_values():
    cfg = SystemConfig(2, 3, 2, 0.5, 10.0, i_relay=2, rho_i_relay_db=10.0)
    assert cfg.u == 1.0
    assert cfg.rho == pytest.approx(10.0)
    assert cfg.first_hop.rate == pytest.approx(0.1)
    assert cfg.relay_interference.count == 2
    assert cfg.relay_interference.rate == pytest.approx(0.1)
    assert cfg.dest_interference.rate == pytest.approx(1.0)
    assert cfg.replace(snr_db=20.0).rho == pytest.approx(100.0)


@pytest.mark.parametrize("kwargs", [dict(n1=0), dict(k_relays=0), dict(rate_threshold=-1), dict(i_dest=-1),
                                    dict(snr_db=math.inf), dict(mean_power_first=0.0)])
def test_system_config_rejects(kwargs):
    base = dict(n1=1, n2=1, k_relays=1, rate_threshold=0.5, snr_db=0.0)
    base.update(kwargs)
    with pytest.raises(ValueError):
        SystemConfig(**base)


def test_hop_cdf_at_origin():
    for n in (1, 4, 64):
        assert ris_hop_cdf(0.0, HopModel(n, 0.1)) == 0.0


@given(st.floats(0.0, 500.0), st.floats(1e-3, 10.0))
def test_hop_cdf_single_element_is_exponential(gamma, rate):
    assert ris_hop_cdf(gamma, HopModel(1, rate)) == pytest.approx(-math.expm1(-rate * gamma), rel=4e-16, abs=1e-300)


def test_hop_cdf_single_element_example():
    g = np.linspace(0, 100, 11)
    np.testing.assert_allclose(ris_hop_cdf(g, HopModel(1, 0.1)), 1 - np.exp(-0.1 * g), rtol=1e-14)


@pytest.mark.parametrize("n", [1, 2, 4, 16, 64, 256])
def test_hop_cdf_monotone_and_bounded(n):
    hop = HopModel(n, 1.0)
    grid = np.linspace(0.0, 3 * n * hop.scaling, 1000)
    cdf = ris_hop_cdf(grid, hop)
    assert np.all(np.diff(cdf) >= 0)
    assert cdf.min() >= 0.0 and cdf.max() <= 1.0


def test_hop_cdf_rejects_negative():
    with pytest.raises(DomainError):
        ris_hop_cdf(-1.0, HopModel(2, 1.0))


def test_hop_cdf_approximation_vs_sampled_rayleigh_sum():
    # rate 0.1 is an average SNR of 10, so the sampled hop SNR is 10 (Σ a_i)^2
    rng = np.random.default_rng(20240501)
    hits = 0
    n_draws = 10_000_000
    for _ in range(10):
        a = np.sqrt(rng.standard_exponential((n_draws // 10, 4)))
        hits += np.count_nonzero(10.0 * a.sum(axis=1) ** 2 <= 20.0)
    emp = hits / n_draws
    assert abs(ris_hop_cdf(20.0, HopModel(4, 0.1)) - emp) <= 0.02


@pytest.mark.parametrize("rate", [0.05, 1.0, 7.0])
def test_hop_cdf_asymptotic_single_element(rate):
    assert ris_hop_cdf_asymptotic(0.0, HopModel(1, rate)) == 0.0
    assert ris_hop_cdf_asymptotic(2.0, HopModel(1, rate)) == pytest.approx(2.0 * rate, rel=1e-14)


@pytest.mark.parametrize("n", range(1, 9))
def test_hop_cdf_asymptotic_limit(n):
    hop = HopModel(n, 0.2)
    gamma = 1e-3 * hop.scaling / hop.rate
    ratio = ris_hop_cdf_asymptotic(gamma, hop) / ris_hop_cdf(gamma, hop)
    assert ratio == pytest.approx(1.0, rel=5e-3)


def test_pdf_support():
    prof = InterferenceProfile(3, 0.7)
    assert interference_plus_one_pdf(0.5, prof) == 0.0
    assert np.all(interference_plus_one_pdf(np.array([0.0, 0.99]), prof) == 0.0)


@given(st.floats(1.0, 60.0))
def test_pdf_single_interferer(z):
    prof = InterferenceProfile(1, 1.0)
    assert interference_plus_one_pdf(z, prof) == pytest.approx(math.exp(-(z - 1)), rel=1e-14)


@pytest.mark.parametrize("count", [1, 2, 3, 5])
@pytest.mark.parametrize("rate", [0.1, 1.0, 10.0])
def test_pdf_normalizes(count, rate):
    mode = 1.0 + (count - 1) / rate
    head, _ = integrate.quad(interference_plus_one_pdf, 1.0, mode + 1.0, args=(InterferenceProfile(count, rate),),
                             epsabs=0, epsrel=1e-13, limit=500)
    tail, _ = integrate.quad(interference_plus_one_pdf, mode + 1.0, np.inf, args=(InterferenceProfile(count, rate),),
                             epsabs=1e-15, epsrel=1e-13, limit=500)
    assert head + tail == pytest.approx(1.0, abs=1e-10)


def test_pdf_rejects_absent_profile():
    with pytest.raises(ValueError):
        interference_plus_one_pdf(1.5, InterferenceProfile.none())


@pytest.mark.parametrize("count", range(1, 7))
@pytest.mark.parametrize("rate", [0.1, 0.5, 1.0, 3.0])
def test_expanded_pdf_matches_direct(count, rate):
    # the printed binomial expansion, sign structure included, against the shifted Erlang
    prof = InterferenceProfile(count, rate)
    z = np.linspace(1.0, 50.0, 400)
    direct = interference_plus_one_pdf(z, prof)
    expanded = expanded_interference_plus_one_pdf(z, prof)
    mask = direct > 1e-250
    np.testing.assert_allclose(expanded[mask], direct[mask], rtol=1e-9)


def test_best_relay_cdf_empty_set_is_one():
    assert best_relay_cdf(3.7, HopModel(2, 1.0), 0) == 1.0
    assert best_relay_cdf(0.0, HopModel(2, 1.0), 0) == 1.0


def test_best_relay_cdf_single():
    hop = HopModel(3, 0.4)
    assert best_relay_cdf(5.0, hop, 1) == ris_hop_cdf(5.0, hop)


@given(st.floats(0.0, 50.0), st.integers(1, 6), st.integers(1, 8))
def test_best_relay_cdf_decreases_in_set_size(y, n, set_size):
    hop = HopModel(n, 0.5)
    assert best_relay_cdf(y, hop, set_size) <= best_relay_cdf(y, hop, set_size - 1)


def test_best_relay_cdf_three_relays_sampled():
    # max of three exponential hops (N=1, exact law), 1e6 samples, 3 sigma
    hop = HopModel(1, 0.5)
    rng = np.random.default_rng(7)
    y = 3.0
    draws = rng.standard_exponential((1_000_000, 3)) / hop.rate
    emp = np.mean(draws.max(axis=1) <= y)
    p = best_relay_cdf(y, hop, 3)
    assert p == pytest.approx(ris_hop_cdf(y, hop) ** 3, rel=1e-14)
    assert abs(emp - p) <= 3 * math.sqrt(p * (1 - p) / 1_000_000)


def test_db_to_linear():
    assert db_to_linear(0.0) == 1.0
    assert db_to_linear(20.0) == pytest.approx(100.0)
