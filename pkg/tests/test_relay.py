import math

import pytest

from conftest import link
from invariants import REGISTRY
from uwqkd.bb84 import BracketError, IndeterminateError, achievable_distance
from uwqkd.numerics import DomainError
from uwqkd.relay import (
    RelayChain,
    build_chain,
    direct_form_qber,
    optimal_relay_count,
    relay_achievable_distance,
    relay_coefficients,
    relay_qber,
    relay_qber_upper,
    relay_qber_upper_halved,
)


@pytest.mark.parametrize("fn", [f for m, _, f in REGISTRY if m == "relay"], ids=lambda f: f.__name__)
def test_relay_invariant(fn):
    fn()


def test_coefficients_by_hand():
    chain = RelayChain(90.0, 2, 0.9, 0.5)
    n_S, n_B0, n_D, eta = 1.0, 1e-4, 2e-6, 0.5
    c = relay_coefficients(chain, n_S, n_B0, n_D, eta)
    plain = n_S * 0.5**3 + 2 * n_B0 * (0.5 + 0.25)
    faded = n_S * 0.45**3 + 2 * n_B0 * (0.45 + 0.45**2)
    assert c.a == pytest.approx(eta * plain, rel=1e-15)
    assert c.b == pytest.approx(eta * (2 * n_B0 + 4 * n_D), rel=1e-15)
    assert c.c == pytest.approx(faded / plain, rel=1e-15)
    assert c.a >= 0 and c.b >= 0 and 0 <= c.c <= 1


def test_halved_form_is_the_same_bound():
    for mu, h, K in ((0.9, 0.3, 0), (0.5, 0.8, 3), (0.99, 0.01, 6)):
        chain = RelayChain(100.0, K, mu, h)
        coef = relay_coefficients(chain, 1.0, 3e-5, 2e-6, 0.5)
        n_hat = 4e-5
        assert relay_qber_upper(chain, coef, n_hat, 0.5, 1.0) == pytest.approx(
            relay_qber_upper_halved(chain, coef, n_hat, 0.5, 1.0), rel=1e-14
        )


def test_direct_link_setup_agrees_with_relay_path():
    s = link("clear_ocean", "moderate", 0.05)
    chain = build_chain(s, 70.0, 0)
    q = relay_qber(s, 70.0, 0)
    assert q == pytest.approx(direct_form_qber(s.noise(), 1.0, chain.per_hop_mu, chain.per_hop_loss, 0.5), rel=1e-12)
    assert relay_achievable_distance(0, "qber", s) == pytest.approx(achievable_distance("qber", s), abs=1e-3)


def test_chain_hops_partition_the_link():
    s = link("coastal", "weak", 0.05)
    chain = build_chain(s, 77.0, 6)
    assert chain.hop_length * 7 == pytest.approx(77.0, rel=1e-15)
    assert chain.per_hop_loss == s.loss(11.0)


def test_chain_validation():
    with pytest.raises(DomainError):
        RelayChain(10.0, -1, 0.5, 0.5)
    with pytest.raises(DomainError):
        RelayChain(10.0, 1, 1.2, 0.5)


def test_dark_link_is_indeterminate():
    with pytest.raises(IndeterminateError):
        relay_coefficients(RelayChain(10.0, 0, 0.5, 0.0), 1.0, 0.0, 0.0, 0.5)


def test_optimal_count_ties_prefer_fewer_relays(monkeypatch):
    import uwqkd.relay as relay

    fake = {0: 50.0, 1: 60.0, 2: 60.0, 3: 55.0}
    monkeypatch.setattr(relay, "relay_achievable_distance", lambda K, c, s, r: fake[K])
    assert relay.optimal_relay_count(None, 3) == (1, 60.0, [50.0, 60.0, 60.0, 55.0])


def test_optimal_count_scores_failed_counts_as_zero(monkeypatch):
    import uwqkd.relay as relay

    def fake(K, c, s, r):
        if K == 2:
            raise BracketError("criterion already fails at 2 m")
        return 10.0 + K

    monkeypatch.setattr(relay, "relay_achievable_distance", fake)
    assert relay.optimal_relay_count(None, 3) == (3, 13.0, [10.0, 11.0, 0.0, 13.0])


def test_negative_inputs_rejected():
    s = link()
    with pytest.raises(DomainError):
        relay_achievable_distance(-1, "qber", s)
    with pytest.raises(DomainError):
        optimal_relay_count(s, -1)


def test_relays_help_in_clear_water_but_not_in_coastal():
    clear = [relay_achievable_distance(K, "qber", link("clear_ocean", "strong", 0.05)) for K in (0, 2)]
    coastal = [relay_achievable_distance(K, "qber", link("coastal", "moderate", 0.05)) for K in (0, 2)]
    assert clear[1] > clear[0]
    assert coastal[1] < coastal[0]
    assert math.isfinite(sum(clear + coastal))
