"""Background light and detector noise budgets."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .channel import LinkGeometry, WaterType
from .numerics import DomainError

PLANCK = 6.62607015e-34  # J s
LIGHT_SPEED = 2.99792458e8  # m / s

__all__ = [
    "PLANCK",
    "LIGHT_SPEED",
    "Environment",
    "ReceiverParams",
    "irradiance_at_depth",
    "background_photons_per_polarization",
    "dark_counts",
    "noise_per_detector",
    "decoy_noise_yield_Y0",
    "relay_accumulated_background",
    "relay_noise_upper",
]


@dataclass(frozen=True)
class Environment:
    """Ambient light conditions.  Defaults describe a clear full-moon night."""

    surface_irradiance: float = 1e-3
    diffuse_attenuation: float = 0.08
    depth: float = 100.0
    label: str = "clear night, full moon"

    def __post_init__(self):
        if self.surface_irradiance < 0 or self.diffuse_attenuation < 0 or self.depth < 0:
            raise DomainError("irradiance, attenuation and depth must be non-negative")


@dataclass(frozen=True)
class ReceiverParams:
    """Receiver optics and detector timing."""

    fov: float = math.pi
    filter_width: float = 30e-9
    bit_period: float = 35e-9
    gate_time: float = 200e-12
    dark_rate: float = 60.0
    quantum_efficiency: float = 0.5
    bob_transmittance: float = 0.045
    aperture_diameter: float = 0.10

    def __post_init__(self):
        if not 0 < self.fov <= math.pi:
            raise DomainError("field of view must lie in (0, pi]")
        if not (self.bit_period > 0 and self.gate_time > 0):
            raise DomainError("timing windows must be positive")
        if self.filter_width <= 0 or self.aperture_diameter <= 0:
            raise DomainError("filter width and aperture diameter must be positive")
        if self.dark_rate < 0:
            raise DomainError("dark count rate must be non-negative")
        if not 0 < self.quantum_efficiency <= 1 or not 0 < self.bob_transmittance <= 1:
            raise DomainError("efficiencies must lie in (0, 1]")

    @property
    def aperture_area(self) -> float:
        return math.pi * self.aperture_diameter**2 / 4.0

    def with_aperture(self, diameter: float) -> "ReceiverParams":
        return replace(self, aperture_diameter=diameter)


def irradiance_at_depth(env: Environment) -> float:
    return env.surface_irradiance * math.exp(-env.diffuse_attenuation * env.depth)


def background_photons_per_polarization(env: Environment, rx: ReceiverParams, wavelength: float) -> float:
    """Mean background photons per polarization inside one gate, n_B0."""
    radiance = irradiance_at_depth(env)
    solid = 1.0 - math.cos(rx.fov)
    return (
        math.pi * radiance * rx.aperture_area * rx.gate_time * wavelength * rx.filter_width * solid
        / (2.0 * PLANCK * LIGHT_SPEED)
    )


def dark_counts(rx: ReceiverParams) -> float:
    return rx.dark_rate * rx.bit_period


def noise_per_detector(env: Environment, rx: ReceiverParams, wavelength: float) -> float:
    """n_N = n_B0 / 2 + n_D for a direct link."""
    return background_photons_per_polarization(env, rx, wavelength) / 2.0 + dark_counts(rx)


def decoy_noise_yield_Y0(env: Environment, rx: ReceiverParams, wavelength: float) -> float:
    """Noise yield summed over Bob's four detectors."""
    return 4.0 * noise_per_detector(env, rx, wavelength)


def relay_accumulated_background(n_B0: float, gamma: float, K: int) -> float:
    """Background collected along a chain of K passive relays.

    Each upstream node's background is attenuated by another factor gamma,
    which gives a geometric series; gamma = 1 returns its limit.
    """
    if not 0 <= gamma <= 1:
        raise DomainError("gamma must lie in [0, 1]")
    if K < 0:
        raise DomainError("K must be non-negative")
    if gamma == 1.0:
        return (K + 1) * n_B0
    return n_B0 * (1.0 - gamma ** (K + 1)) / (1.0 - gamma)


def relay_noise_upper(env: Environment, rx: ReceiverParams, water: WaterType, geom: LinkGeometry) -> float:
    """Upper bound on the noise count per detector behind K relays.

    Uses the rearranged loss exponents for the full link and for a single
    hop, with the aperture diameter of ``geom``.
    """
    K = geom.relay_count
    n_B0 = background_photons_per_polarization(env, rx, geom.wavelength)
    n_D = dark_counts(rx)
    if K == 0:
        return n_B0 / 2.0 + n_D
    d = geom.rx_diameter
    T = water.T(geom.divergence, d)
    L = geom.length
    s = water.extinction
    num = -math.expm1(-s * L ** (1.0 - T) * ((K + 1) * d / geom.divergence) ** T)
    den = -math.expm1(-s * (L / (K + 1)) ** (1.0 - T) * (d / geom.divergence) ** T)
    return n_B0 / 2.0 * num / den + n_D

