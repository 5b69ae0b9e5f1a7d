"""Underwater optical propagation: attenuation, turbulence and power transfer."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import special

from .numerics import DomainError, QuadratureSpec, bessel_j0, bessel_j1, integrate

__all__ = [
    "WaterType",
    "TurbulenceParams",
    "LinkGeometry",
    "WATER_TYPES",
    "TURBULENCE_PRESETS",
    "correction_coefficient",
    "path_loss",
    "kolmogorov_microscale",
    "wave_structure_closed",
    "nikishov_spectrum",
    "wave_structure_numeric",
    "fresnel_number",
    "power_transfer_mu",
]


# Correction coefficient T of the modified Beer-Lambert law, tabulated for a
# 6 degree full-width divergence against receive aperture diameter.
T_TABLE_DIVERGENCE_DEG = 6.0
T_TABLE = ((0.05, 0.13), (0.10, 0.16), (0.20, 0.21), (0.30, 0.26))


def correction_coefficient(divergence: float, diameter: float) -> float:
    """Look up T for a divergence (radians) and receive diameter (metres).

    Diameters between table entries are interpolated linearly; anything
    outside the table, or any divergence other than the tabulated one, is
    rejected rather than extrapolated.
    """
    if not math.isclose(math.degrees(divergence), T_TABLE_DIVERGENCE_DEG, rel_tol=1e-6):
        raise DomainError(
            f"T is only tabulated for {T_TABLE_DIVERGENCE_DEG:g} deg divergence; "
            "give the water type an explicit correction_T"
        )
    ds = [d for d, _ in T_TABLE]
    ts = [t for _, t in T_TABLE]
    if not ds[0] - 1e-12 <= diameter <= ds[-1] + 1e-12:
        raise DomainError(f"diameter {diameter} m lies outside the T table [{ds[0]}, {ds[-1]}]")
    return float(np.interp(diameter, ds, ts))


@dataclass(frozen=True)
class WaterType:
    """Optical water body.  ``correction_T=None`` means "use the table"."""

    name: str
    extinction: float
    correction_T: float | None = None

    def __post_init__(self):
        if not self.extinction > 0:
            raise DomainError("extinction coefficient must be positive")
        if self.correction_T is not None and not 0 < self.correction_T < 1:
            raise DomainError("correction coefficient T must lie in (0, 1)")

    def T(self, divergence: float, diameter: float) -> float:
        if self.correction_T is not None:
            return self.correction_T
        return correction_coefficient(divergence, diameter)


WATER_TYPES = {
    "clear_ocean": WaterType("clear_ocean", 0.151),
    "coastal": WaterType("coastal", 0.339),
    "turbid_harbor": WaterType("turbid_harbor", 2.195),
}


@dataclass(frozen=True)
class TurbulenceParams:
    """Oceanic turbulence described by the Nikishov spectrum parameters."""

    chi_T: float
    epsilon: float
    omega: float = -2.2
    alpha_th: float = 2.56e-4
    d_r: float = 1.0
    kinematic_viscosity: float = 1.0576e-6
    prandtl_T: float = 7.0
    prandtl_S: float = 686.0
    prandtl_TS: float = 13.85

    def __post_init__(self):
        if not (self.chi_T > 0 and self.epsilon > 0 and self.kinematic_viscosity > 0):
            raise DomainError("chi_T, epsilon and viscosity must be positive")
        if self.omega == 0:
            raise DomainError("omega must be non-zero")
        if self.d_r < 0:
            raise DomainError("d_r must be non-negative")

    def with_d_r(self, d_r: float) -> "TurbulenceParams":
        return replace(self, d_r=d_r)

    @property
    def bracket(self) -> float:
        """Temperature/salinity weighting omega^2 + d_r - omega (d_r + 1)."""
        w = self.omega
        return w * w + self.d_r - w * (self.d_r + 1.0)


TURBULENCE_PRESETS = {
    "weak": TurbulenceParams(chi_T=2e-7, epsilon=2e-5),
    "moderate": TurbulenceParams(chi_T=1e-6, epsilon=5e-7),
    "strong": TurbulenceParams(chi_T=1e-5, epsilon=1e-5),
}


@dataclass(frozen=True)
class LinkGeometry:
    """Link layout.  Angles are stored in radians."""

    length: float
    tx_diameter: float
    rx_diameter: float
    divergence: float = math.radians(6.0)
    wavelength: float = 530e-9
    relay_count: int = 0

    def __post_init__(self):
        if not self.length > 0:
            raise DomainError("link length must be positive")
        if not (self.tx_diameter > 0 and self.rx_diameter > 0):
            raise DomainError("aperture diameters must be positive")
        if not 0 < self.divergence < math.pi:
            raise DomainError("divergence must lie in (0, pi) radians")
        if not self.wavelength > 0:
            raise DomainError("wavelength must be positive")
        if self.relay_count < 0 or int(self.relay_count) != self.relay_count:
            raise DomainError("relay_count must be a non-negative integer")

    @classmethod
    def from_degrees(cls, length, tx_diameter, rx_diameter, divergence_deg=6.0, **kw):
        return cls(length, tx_diameter, rx_diameter, math.radians(divergence_deg), **kw)

    @property
    def hop_length(self) -> float:
        return self.length / (self.relay_count + 1)

    def at(self, length: float, relay_count: int | None = None) -> "LinkGeometry":
        k = self.relay_count if relay_count is None else relay_count
        return replace(self, length=length, relay_count=k)


def path_loss(geom: LinkGeometry, water: WaterType, distance: float):
    """Modified Beer-Lambert transmittance over ``distance`` metres.

    Uses the receive diameter and divergence of ``geom``.
    """
    d = np.asarray(distance, dtype=float)
    if np.any(d <= 0):
        raise DomainError("distance must be positive")
    T = water.T(geom.divergence, geom.rx_diameter)
    out = np.exp(-water.extinction * d * (geom.rx_diameter / (geom.divergence * d)) ** T)
    return out if out.ndim else float(out)


def kolmogorov_microscale(t: TurbulenceParams) -> float:
    return (t.kinematic_viscosity**3 / t.epsilon) ** 0.25


def wave_structure_closed(rho, distance: float, t: TurbulenceParams, wavelength: float):
    """Closed-form spherical-wave structure function W(rho, L).

    Valid asymptotically for separations well above the Kolmogorov
    microscale.
    """
    r = np.asarray(rho, dtype=float)
    if np.any(r < 0):
        raise DomainError("rho must be non-negative")
    if not distance > 0:
        raise DomainError("distance must be positive")
    k = 2 * math.pi / wavelength
    eta = kolmogorov_microscale(t)
    scale = 1.44 * math.pi * k * k * distance * (t.alpha_th**2 * t.chi_T / t.omega**2)
    scale *= t.epsilon ** (-1.0 / 3.0) * t.bracket
    out = scale * (1.175 * eta ** (2.0 / 3.0) * r + 0.419 * r ** (5.0 / 3.0))
    return out if out.ndim else float(out)


def nikishov_spectrum(kappa, t: TurbulenceParams):
    """Power spectrum of refractive-index fluctuations, Phi_n(kappa)."""
    kap = np.asarray(kappa, dtype=float)
    if np.any(kap <= 0):
        raise DomainError("kappa must be positive")
    eta = kolmogorov_microscale(t)
    e43 = eta ** (4.0 / 3.0)
    e2 = eta * eta
    a, b = 1.08 / t.prandtl_T * e43, 1.692 / t.prandtl_T * e2
    c, d = 1.08 / t.prandtl_S * e43, 1.692 / t.prandtl_S * e2
    e, f = 0.54 / t.prandtl_TS * e43, 0.846 / t.prandtl_TS * e2
    g = 2.35 * eta ** (2.0 / 3.0)
    k43 = kap ** (4.0 / 3.0)
    k2 = kap * kap
    w = t.omega
    mix = (
        w * w * np.exp(-a * k43 - b * k2)
        + t.d_r * np.exp(-c * k43 - d * k2)
        - w * (t.d_r + 1.0) * np.exp(-e * k43 - f * k2)
    )
    pref = 0.18 / math.pi * (t.alpha_th**2 * t.chi_T / w**2) * t.epsilon ** (-1.0 / 3.0)
    out = pref * kap ** (-11.0 / 3.0) * (1.0 + g * kap ** (2.0 / 3.0)) * mix
    return out if out.ndim else float(out)


def _mean_one_minus_j0(x: np.ndarray) -> np.ndarray:
    """Integral over zeta in [0, 1] of 1 - J0(x zeta)."""
    out = np.empty_like(x)
    small = x < 1e-2
    xs = x[small]
    out[small] = xs * xs / 12.0 - xs**4 / 320.0 + xs**6 / 16128.0
    xl = x[~small]
    j0 = bessel_j0(xl)
    j1 = bessel_j1(xl)
    # integral of J0 from 0 to x via Struve functions
    int_j0 = xl * j0 + 0.5 * math.pi * xl * (j1 * special.struve(0, xl) - j0 * special.struve(1, xl))
    out[~small] = 1.0 - int_j0 / xl
    return out


_X_BREAKS = (1e-4, 1e-2, 0.1, 1.0, 3.0, 10.0, 30.0, 100.0, 300.0, 1e3, 3e3, 1e4, 3e4, 1e5)


def wave_structure_numeric(
    rho: float,
    distance: float,
    t: TurbulenceParams,
    wavelength: float,
    quad: QuadratureSpec | None = None,
) -> float:
    """Structure function from the spectrum by direct integration.

    The zeta integral is done analytically; the remaining kappa integral is
    carried out in the variable x = kappa * rho and truncated once the
    spectral cutoff has pushed the integrand below 1e-12 of its peak.
    This is the independent reference for :func:`wave_structure_closed`.
    """
    if rho < 0:
        raise DomainError("rho must be non-negative")
    if not distance > 0:
        raise DomainError("distance must be positive")
    if rho == 0:
        return 0.0
    quad = quad or QuadratureSpec(abs_tol=1e-300, rel_tol=1e-9, max_subdivisions=20_000)
    k = 2 * math.pi / wavelength

    def integrand(x):
        kap = x / rho
        return _mean_one_minus_j0(x) * nikishov_spectrum(kap, t) * kap / rho

    # Locate the truncation point on a log grid of kappa.  The integrand
    # itself grows without bound as kappa -> 0, so the peak is taken on the
    # log measure x * f(x), which is maximal in the dissipation range.
    eta = kolmogorov_microscale(t)
    kap_grid = np.logspace(-6, math.log10(1e4 / eta), 6000)
    vals = np.abs(kap_grid * integrand(kap_grid * rho))
    above = np.nonzero(vals >= 1e-12 * vals.max())[0]
    x_max = kap_grid[above[-1]] * rho * 1.05
    x_min = kap_grid[0] * rho
    breaks = [b for b in _X_BREAKS if x_min < b < x_max]
    value = integrate(integrand, x_min, x_max, quad, points=breaks)
    return 8.0 * math.pi**2 * k * k * distance * value


def fresnel_number(geom: LinkGeometry, hop_length: float) -> float:
    """Fresnel number product of transmit and receive apertures."""
    if not hop_length > 0:
        raise DomainError("hop length must be positive")
    return (math.pi * geom.tx_diameter * geom.rx_diameter / (4.0 * geom.wavelength * hop_length)) ** 2


def power_transfer_mu(
    geom: LinkGeometry,
    t: TurbulenceParams | None,
    hop_length: float,
    quad: QuadratureSpec | None = None,
) -> float:
    """Average power transfer over one hop.

    With ``t=None`` the structure function is identically zero and the
    result is the diffraction-limited value mu0.  The J1 factor makes the
    integrand oscillate, so the range is pre-split into pieces roughly one
    half-period long before adaptive refinement.
    """
    F = fresnel_number(geom, hop_length)
    sF = math.sqrt(F)
    freq = 4.0 * sF
    n_pieces = int(math.ceil(freq / math.pi)) + 1
    points = np.linspace(0.0, 1.0, n_pieces + 1)[1:-1]
    base = quad or QuadratureSpec(abs_tol=1e-13, rel_tol=1e-10)
    quad = replace(base, max_subdivisions=max(base.max_subdivisions, 40 * n_pieces))

    def integrand(x):
        shape = np.arccos(x) - x * np.sqrt(1.0 - x * x)
        if t is not None:
            shape = shape * np.exp(-0.5 * wave_structure_closed(geom.tx_diameter * x, hop_length, t, geom.wavelength))
        return shape * bessel_j1(freq * x)

    value = 8.0 * sF / math.pi * integrate(integrand, 0.0, 1.0, quad, points=points)
    return min(max(value, 0.0), 1.0)
