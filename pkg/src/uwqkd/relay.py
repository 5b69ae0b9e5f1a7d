"""Multi-hop BB84 through equally spaced passive relays."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .bb84 import (
    Bb84Params,
    BracketError,
    IndeterminateError,
    LinkSetup,
    criterion_margin,
    skr_lower_bound,
    solve_cutoff,
)
from .noise import background_photons_per_polarization, dark_counts, relay_noise_upper
from .numerics import DomainError

__all__ = [
    "RelayChain",
    "RelayCoefficients",
    "build_chain",
    "relay_coefficients",
    "relay_qber_upper",
    "relay_qber_upper_halved",
    "direct_form_qber",
    "relay_skr_lower",
    "relay_qber",
    "relay_achievable_distance",
    "optimal_relay_count",
]


@dataclass(frozen=True)
class RelayChain:
    total_length: float
    relay_count: int
    per_hop_mu: float
    per_hop_loss: float

    def __post_init__(self):
        if self.relay_count < 0:
            raise DomainError("relay count must be non-negative")
        if not (0 <= self.per_hop_mu <= 1 and 0 <= self.per_hop_loss <= 1):
            raise DomainError("per-hop transfer and loss must lie in [0, 1]")

    @property
    def hop_length(self) -> float:
        return self.total_length / (self.relay_count + 1)


@dataclass(frozen=True)
class RelayCoefficients:
    a: float
    b: float
    c: float


def _tail_sum(x: float, K: int) -> float:
    """x + x^2 + ... + x^K, summed directly (no 1/(1-x) singularity)."""
    total = 0.0
    power = 1.0
    for _ in range(K):
        power *= x
        total += power
    return total


def relay_coefficients(chain: RelayChain, n_S: float, n_B0: float, n_D: float, eta: float) -> RelayCoefficients:
    K = chain.relay_count
    h = chain.per_hop_loss
    mh = chain.per_hop_mu * h
    plain = n_S * h ** (K + 1) + 2.0 * n_B0 * _tail_sum(h, K)
    faded = n_S * mh ** (K + 1) + 2.0 * n_B0 * _tail_sum(mh, K)
    a = eta * plain
    b = eta * (2.0 * n_B0 + 4.0 * n_D)
    if plain == 0.0:
        raise IndeterminateError("no signal or relayed background reaches Bob")
    return RelayCoefficients(a=a, b=b, c=faded / plain)


def _numerator(chain: RelayChain, n_hat: float, eta: float, n_S: float) -> float:
    K = chain.relay_count
    mK = chain.per_hop_mu ** (K + 1)
    hK = chain.per_hop_loss ** (K + 1)
    return 2.0 * eta * n_hat * math.exp(-4.0 * eta * n_hat) * (1.0 - mK + math.exp(-eta * n_S * hK) * mK)


def relay_qber_upper(chain: RelayChain, coef: RelayCoefficients, n_hat: float, eta: float, n_S: float) -> float:
    """QBER upper bound behind K relays, capped at 0.5."""
    a, b, c = coef.a, coef.b, coef.c
    den = b * math.exp(-b) * (1.0 - c) + (a + b) * math.exp(-(a + b)) * c
    num = _numerator(chain, n_hat, eta, n_S)
    if den == 0.0:
        raise IndeterminateError("relay QBER denominator vanished")
    return min(num / den, 0.5)


def relay_qber_upper_halved(chain: RelayChain, coef: RelayCoefficients, n_hat: float, eta: float, n_S: float) -> float:
    """Same bound written with the numerator and both denominator weights halved."""
    a, b, c = coef.a, coef.b, coef.c
    den = 0.5 * b * math.exp(-b) * (1.0 - c) + 0.5 * (a + b) * math.exp(-(a + b)) * c
    num = 0.5 * _numerator(chain, n_hat, eta, n_S)
    if den == 0.0:
        raise IndeterminateError("relay QBER denominator vanished")
    return min(num / den, 0.5)


def direct_form_qber(n_hat: float, n_S: float, mu_L: float, h_L: float, eta: float) -> float:
    """The K = 0 specialisation written out in closed form."""
    miss = 1.0 - mu_L + mu_L * math.exp(-eta * n_S * h_L)
    num = n_hat * miss
    return num / (0.5 * n_S * mu_L * h_L * math.exp(-eta * n_S * h_L) + 2.0 * num)


def relay_skr_lower(qber_bound: float, ldpc: Bb84Params) -> float:
    return skr_lower_bound(qber_bound, ldpc)


def build_chain(setup: LinkSetup, total_length: float, K: int) -> RelayChain:
    hop = total_length / (K + 1)
    return RelayChain(
        total_length=total_length,
        relay_count=K,
        per_hop_mu=setup.mu(hop),
        per_hop_loss=setup.loss(hop),
    )


def relay_qber(setup: LinkSetup, total_length: float, K: int) -> float:
    """End-to-end QBER bound for ``K`` relays over ``total_length`` metres."""
    chain = build_chain(setup, total_length, K)
    rx = setup.receiver
    geom = setup.geometry.at(total_length, K)
    n_B0 = background_photons_per_polarization(setup.environment, rx, geom.wavelength)
    n_D = dark_counts(rx)
    n_hat = relay_noise_upper(setup.environment, rx, setup.water, geom)
    eta = rx.quantum_efficiency
    n_S = setup.params.mean_photon_number
    coef = relay_coefficients(chain, n_S, n_B0, n_D, eta)
    return relay_qber_upper(chain, coef, n_hat, eta, n_S)


def relay_achievable_distance(K: int, criterion: str, setup: LinkSetup, search: tuple[float, float] = (2.0, 400.0)) -> float:
    """Longest total length that still meets ``criterion`` with ``K`` relays."""
    if K < 0:
        raise DomainError("K must be non-negative")
    criterion_margin(criterion, 0.0, setup.params)
    return solve_cutoff(
        lambda L: criterion_margin(criterion, relay_qber(setup, L, K), setup.params), *search
    )


def optimal_relay_count(
    setup: LinkSetup,
    K_max: int = 10,
    criterion: str = "qber",
    search: tuple[float, float] = (2.0, 400.0),
) -> tuple[int, float, list[float]]:
    """Try K = 0..K_max and keep the longest reach; ties go to fewer relays.

    Returns ``(K_best, distance_best, distances)``.  A K whose criterion
    fails even at the shortest search length contributes a distance of 0.
    """
    if K_max < 0:
        raise DomainError("K_max must be non-negative")
    distances = []
    for K in range(K_max + 1):
        try:
            distances.append(relay_achievable_distance(K, criterion, setup, search))
        except BracketError as exc:
            if "still holds" in str(exc):
                raise
            distances.append(0.0)
    best = max(range(len(distances)), key=lambda k: (round(distances[k], 6), -k))
    return best, distances[best], distances

