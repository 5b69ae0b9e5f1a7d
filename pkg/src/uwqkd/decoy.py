"""Vacuum + weak decoy-state BB84 key-rate bounds for a turbulent link."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .bb84 import LinkSetup, solve_cutoff
from .noise import decoy_noise_yield_Y0
from .numerics import DomainError, binary_entropy

__all__ = [
    "DecoyParams",
    "DecoyReport",
    "eta_fraction",
    "gains_lower",
    "gain_upper_mu",
    "qber_upper_mu",
    "single_photon_bounds",
    "single_photon_error_upper",
    "decoy_rate_lower",
    "ideal_bb84_rate",
    "decoy_report",
    "decoy_cutoff",
    "ideal_bb84_rate_at",
    "ideal_bb84_cutoff",
]


@dataclass(frozen=True)
class DecoyParams:
    signal_intensity: float = 0.48
    decoy_intensity: float = 0.05
    detector_error: float = 0.033
    noise_error: float = 0.5
    sift_factor: float = 0.5
    ec_efficiency: float = 1.22

    def __post_init__(self):
        if not 0 < self.decoy_intensity < self.signal_intensity:
            raise DomainError("need 0 < decoy intensity < signal intensity")
        if not 0 <= self.detector_error < 0.5:
            raise DomainError("detector error must lie in [0, 0.5)")


@dataclass(frozen=True)
class DecoyReport:
    distance: float
    Q_mu_U: float
    Q_mu_L: float
    Q_nu_L: float
    E_mu_U: float
    Y1_L: float
    Q1_L: float
    e1_U: float
    rate_lower: float
    flags: tuple[str, ...] = field(default=())


def eta_fraction(l: float, alpha_power: float, eta_bob: float) -> float:
    """Received fraction of transmitted photons."""
    return l * alpha_power * eta_bob


def gains_lower(Y0: float, alpha_power: float, l: float, eta_bob: float, p: DecoyParams) -> tuple[float, float]:
    """Lower bounds on the decoy and signal gains, ``(Q_nu_L, Q_mu_L)``."""

    def gain(x):
        return Y0 + alpha_power * -math.expm1(-x * eta_bob * l)

    return gain(p.decoy_intensity), gain(p.signal_intensity)


def gain_upper_mu(Y0: float, l: float, eta_bob: float, p: DecoyParams) -> float:
    return Y0 - math.expm1(-p.signal_intensity * eta_bob * l)


def qber_upper_mu(Y0: float, Q_mu_L: float, l: float, eta_bob: float, p: DecoyParams) -> float:
    clicks = -math.expm1(-p.signal_intensity * eta_bob * l)
    return (p.noise_error * Y0 + p.detector_error * clicks) / Q_mu_L


def single_photon_bounds(Q_nu_L: float, Q_mu_U: float, Y0: float, p: DecoyParams) -> tuple[float, float]:
    """Lower bounds on the single-photon yield and gain, ``(Y1_L, Q1_L)``.

    The yield bound is returned as computed, even when negative; callers
    decide how to flag a collapsed bound.
    """
    mu, nu = p.signal_intensity, p.decoy_intensity
    inner = Q_nu_L * math.exp(nu) - Q_mu_U * math.exp(mu) * nu * nu / (mu * mu) - (mu * mu - nu * nu) / (mu * mu) * Y0
    Y1 = mu / (mu * nu - nu * nu) * inner
    return Y1, mu * math.exp(-mu) * Y1


def single_photon_error_upper(Y0: float, Y1_L: float, eta: float, p: DecoyParams) -> float:
    """Upper bound on the single-photon error rate.

    ``eta`` is the total received fraction h(l) * alpha * eta_Bob (see
    :func:`eta_fraction`).  Returns ``inf`` when ``Y1_L`` is not positive.
    """
    if Y1_L <= 0:
        return math.inf
    nu = p.decoy_intensity
    errors = p.noise_error * Y0 + p.detector_error * -math.expm1(-nu * eta)
    return (errors * math.exp(nu) - p.noise_error * Y0) / (Y1_L * nu)


def decoy_rate_lower(Q_mu_U: float, E_mu_U: float, Q1_L: float, e1_U: float, p: DecoyParams) -> float:
    """Key rate lower bound in bits per pulse (may be negative)."""
    cost = Q_mu_U * p.ec_efficiency * binary_entropy(min(max(E_mu_U, 0.0), 1.0))
    gain = Q1_L * (1.0 - binary_entropy(min(max(e1_U, 0.0), 1.0)))
    return p.sift_factor * (gain - cost)


def ideal_bb84_rate(eta_total: float, Y0: float, p: DecoyParams) -> float:
    """Rate bound for an ideal single-photon BB84 source."""
    e1 = (0.5 * Y0 + p.detector_error * eta_total) / (Y0 + eta_total)
    mu = p.signal_intensity
    Q1 = (Y0 + eta_total) * mu * math.exp(-mu)
    return 0.5 * Q1 * (1.0 - binary_entropy(e1) * (1.0 + p.ec_efficiency))


def _link_terms(setup: LinkSetup, distance: float):
    Y0 = decoy_noise_yield_Y0(setup.environment, setup.receiver, setup.geometry.wavelength)
    return Y0, setup.loss(distance), setup.mu(distance), setup.receiver.bob_transmittance


def decoy_report(setup: LinkSetup, distance: float, p: DecoyParams | None = None) -> DecoyReport:
    """Evaluate every decoy bound at one distance.

    When the yield bound collapses (Y1_L <= 0) or e1_U exceeds 1/2 the rate
    is reported as 0 and the reason is listed in ``flags``; a collapsed
    yield bound is reported as 0 and e1_U is clamped to 1.
    """
    p = p or DecoyParams()
    Y0, l, alpha, eta_bob = _link_terms(setup, distance)
    Q_nu_L, Q_mu_L = gains_lower(Y0, alpha, l, eta_bob, p)
    Q_mu_U = gain_upper_mu(Y0, l, eta_bob, p)
    E_mu_U = qber_upper_mu(Y0, Q_mu_L, l, eta_bob, p)
    Y1_L, Q1_L = single_photon_bounds(Q_nu_L, Q_mu_U, Y0, p)
    e1_U = single_photon_error_upper(Y0, Y1_L, eta_fraction(l, alpha, eta_bob), p)
    flags = []
    if Y1_L <= 0:
        flags.append("bound-collapsed")
        Y1_L = Q1_L = 0.0
    if e1_U > 0.5:
        flags.append("e1-above-half")
    rate = 0.0 if flags else decoy_rate_lower(Q_mu_U, E_mu_U, Q1_L, e1_U, p)
    return DecoyReport(distance, Q_mu_U, Q_mu_L, Q_nu_L, E_mu_U, Y1_L, Q1_L, min(e1_U, 1.0), rate, tuple(flags))


def decoy_cutoff(setup: LinkSetup, p: DecoyParams | None = None, search=(1.0, 300.0)) -> float:
    """Longest distance with a strictly positive decoy key rate."""
    return solve_cutoff(lambda L: decoy_report(setup, L, p).rate_lower, *search)


def ideal_bb84_rate_at(setup: LinkSetup, distance: float, p: DecoyParams | None = None) -> float:
    p = p or DecoyParams()
    Y0, l, alpha, eta_bob = _link_terms(setup, distance)
    return ideal_bb84_rate(eta_fraction(l, alpha, eta_bob), Y0, p)


def ideal_bb84_cutoff(setup: LinkSetup, p: DecoyParams | None = None, search=(1.0, 300.0)) -> float:
    return solve_cutoff(lambda L: ideal_bb84_rate_at(setup, L, p), *search)
