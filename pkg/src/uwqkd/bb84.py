"""Direct-link BB84 over a turbulent underwater channel."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy import optimize

from .channel import LinkGeometry, TurbulenceParams, WaterType, path_loss, power_transfer_mu
from .noise import Environment, ReceiverParams, noise_per_detector
from .numerics import DomainError, QuadratureSpec, binary_entropy

__all__ = [
    "Bb84Params",
    "LinkSetup",
    "LinkReport",
    "BracketError",
    "IndeterminateError",
    "qber_upper_bound",
    "qber_nonturbulent",
    "reconciliation_efficiency",
    "skr_lower_bound",
    "direct_link_report",
    "achievable_distance",
    "solve_cutoff",
]


class BracketError(RuntimeError):
    """A distance search found no sign change of its criterion."""


class IndeterminateError(ArithmeticError):
    """A bound evaluated to 0/0."""


@dataclass(frozen=True)
class Bb84Params:
    mean_photon_number: float = 1.0
    ldpc_rate: float = 0.5
    qber_threshold: float = 0.1071
    qber_security_limit: float = 0.11

    def __post_init__(self):
        if not self.mean_photon_number > 0:
            raise DomainError("mean photon number must be positive")
        if not 0 < self.ldpc_rate < 1:
            raise DomainError("LDPC code rate must lie in (0, 1)")
        if not 0 < self.qber_threshold < 0.5:
            raise DomainError("QBER threshold must lie in (0, 0.5)")


@dataclass(frozen=True)
class LinkSetup:
    """Everything needed to evaluate one link configuration.

    ``turbulence=None`` models a turbulence-free channel (W = 0).  The
    geometry's length is ignored by the distance solvers, which vary it.
    """

    water: WaterType
    geometry: LinkGeometry
    turbulence: TurbulenceParams | None = None
    receiver: ReceiverParams = field(default_factory=ReceiverParams)
    environment: Environment = field(default_factory=Environment)
    params: Bb84Params = field(default_factory=Bb84Params)
    quad: QuadratureSpec | None = None

    def with_length(self, length: float) -> "LinkSetup":
        return replace(self, geometry=self.geometry.at(length))

    def noise(self) -> float:
        return noise_per_detector(self.environment, self.receiver, self.geometry.wavelength)

    def mu(self, hop_length: float) -> float:
        return power_transfer_mu(self.geometry, self.turbulence, hop_length, self.quad)

    def mu0(self, hop_length: float) -> float:
        return power_transfer_mu(self.geometry, None, hop_length, self.quad)

    def loss(self, distance: float) -> float:
        return path_loss(self.geometry, self.water, distance)


@dataclass(frozen=True)
class LinkReport:
    distance: float
    qber_upper: float
    skr_lower: float
    mu: float
    mu0: float
    path_loss: float
    noise: float


def qber_upper_bound(n_N: float, n_S: float, mu: float, l: float, eta: float) -> float:
    """Upper bound on QBER for a direct link.

    ``l`` is the path transmittance and ``eta`` the detector efficiency.
    """
    if n_N < 0 or n_S <= 0 or not 0 <= mu <= 1 or not 0 <= l <= 1 or not 0 < eta <= 1:
        raise DomainError("invalid QBER bound inputs")
    att = math.exp(-eta * n_S * l)
    miss = 1.0 - mu + mu * att
    signal = 0.5 * n_S * l * mu * att
    num = n_N * miss
    den = signal + 2.0 * num
    if den == 0.0:
        raise IndeterminateError("no signal and no noise")
    return min(num / den, 0.5)


def qber_nonturbulent(n_N: float, n_S: float, mu0: float, l: float) -> float:
    den = n_S * mu0 * l + 4.0 * n_N
    if den == 0.0:
        raise IndeterminateError("no signal and no noise")
    return min(2.0 * n_N / den, 0.5)


def reconciliation_efficiency(p: Bb84Params) -> float:
    """LDPC reconciliation efficiency f = (1 - R_c) / h(QBER_th).

    Values below one are returned unchanged; they simply mean the chosen
    code beats the Shannon limit at the threshold, which is unphysical.
    """
    return (1.0 - p.ldpc_rate) / binary_entropy(p.qber_threshold)


def skr_lower_bound(qber, p: Bb84Params):
    """R = 1 - (1 + f) h(QBER), with QBER capped at 0.5.  May be negative."""
    q = np.minimum(np.asarray(qber, dtype=float), 0.5)
    out = 1.0 - (1.0 + reconciliation_efficiency(p)) * binary_entropy(q)
    return out if np.ndim(out) else float(out)


def direct_link_report(setup: LinkSetup, distance: float) -> LinkReport:
    n_N = setup.noise()
    l = setup.loss(distance)
    mu = setup.mu(distance)
    mu0 = setup.mu0(distance) if setup.turbulence is not None else mu
    q = qber_upper_bound(n_N, setup.params.mean_photon_number, mu, l, setup.receiver.quantum_efficiency)
    return LinkReport(
        distance=distance,
        qber_upper=q,
        skr_lower=skr_lower_bound(q, setup.params),
        mu=mu,
        mu0=mu0,
        path_loss=l,
        noise=n_N,
    )


def _direct_qber(setup: LinkSetup, distance: float) -> float:
    return qber_upper_bound(
        setup.noise(),
        setup.params.mean_photon_number,
        setup.mu(distance),
        setup.loss(distance),
        setup.receiver.quantum_efficiency,
    )


def criterion_margin(criterion: str, qber: float, params: Bb84Params) -> float:
    """Signed margin: positive while the link is usable."""
    if criterion == "qber":
        return params.qber_security_limit - qber
    if criterion == "skr":
        return skr_lower_bound(qber, params)
    raise DomainError(f"unknown criterion {criterion!r}; use 'qber' or 'skr'")


def solve_cutoff(margin: Callable[[float], float], lo: float, hi: float, step: float = 1.0, xtol: float = 1e-4) -> float:
    """Largest distance with ``margin > 0``.

    Scans a ``step`` grid from ``lo`` and refines the first cell where the
    margin turns non-positive.
    """
    if not lo < hi:
        raise DomainError("search range must be non-empty")
    prev = lo
    if not margin(prev) > 0:
        raise BracketError(f"criterion already fails at {lo} m")
    grid = np.arange(lo + step, hi + 0.5 * step, step)
    for x in grid:
        x = min(float(x), hi)
        if not margin(x) > 0:
            return float(optimize.brentq(margin, prev, x, xtol=xtol))
        prev = x
    raise BracketError(f"criterion still holds at {hi} m")


def achievable_distance(criterion: str, setup: LinkSetup, search: tuple[float, float] = (1.0, 400.0)) -> float:
    """Longest direct link meeting ``criterion`` ('qber' or 'skr')."""
    criterion_margin(criterion, 0.0, setup.params)  # validates the name
    return solve_cutoff(
        lambda L: criterion_margin(criterion, _direct_qber(setup, L), setup.params), *search
    )
