"""Two-term Henyey-Greenstein phase function and its sampling."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from ..numerics import DomainError

__all__ = [
    "ScatterModel",
    "backscatter_from_mean_cosine",
    "mean_cosine_from_backscatter",
    "g_backward",
    "tthg_weight",
    "tthg_params_from_B",
    "tthg_density",
    "hg_inverse_cdf",
    "sample_scatter_angle",
]

# cubic regression tying the backward asymmetry to the forward one
_GB_COEFFS = (-0.3061446, 1.000568, -0.01826338, 0.03643748)


def g_backward(g_F):
    c0, c1, c2, c3 = _GB_COEFFS
    return c0 + c1 * g_F + c2 * g_F**2 + c3 * g_F**3


def tthg_weight(g_F, g_B):
    """Forward-lobe weight a of the two-term phase function."""
    return g_B * (1.0 + g_B) / ((g_F + g_B) * (1.0 + g_B - g_F))


def mean_cosine_from_backscatter(B: float) -> float:
    return 2.0 * (1.0 - 2.0 * B) / (2.0 + B)


def backscatter_from_mean_cosine(mean_cosine: float) -> float:
    return 2.0 * (1.0 - mean_cosine) / (4.0 + mean_cosine)


def tthg_params_from_B(B: float) -> tuple[float, float, float, float]:
    """Return ``(mean_cosine, g_F, g_B, a)`` for a backscatter fraction B.

    g_F is the root of a(g_F + g_B) - g_B = mean cosine with g_B and a
    given by the regressions above.  The root is searched where both lobes
    have valid asymmetry parameters.
    """
    if not 0 < B < 1:
        raise DomainError("backscatter fraction must lie in (0, 1)")
    target = mean_cosine_from_backscatter(B)

    def mismatch(gf):
        gb = g_backward(gf)
        return tthg_weight(gf, gb) * (gf + gb) - gb - target

    # g_B crosses zero near g_F = 0.3063, so start just above it
    lo = optimize.brentq(g_backward, 0.0, 1.0) + 1e-9
    hi = 1.0 - 1e-12
    if mismatch(lo) * mismatch(hi) > 0:
        raise DomainError(f"no forward asymmetry reproduces mean cosine {target:.6g}")
    g_F = optimize.brentq(mismatch, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    g_B = g_backward(g_F)
    a = tthg_weight(g_F, g_B)
    if not 0 < a < 1:
        raise DomainError("forward weight outside (0, 1)")
    return target, float(g_F), float(g_B), float(a)


@dataclass(frozen=True)
class ScatterModel:
    """Absorption/scattering split plus the phase function it implies."""

    absorption: float
    scattering: float
    backscatter_fraction: float

    def __post_init__(self):
        if self.absorption < 0 or self.scattering < 0 or self.extinction <= 0:
            raise DomainError("absorption and scattering must be non-negative with a positive sum")
        params = tthg_params_from_B(self.backscatter_fraction)
        object.__setattr__(self, "_params", params)

    @classmethod
    def from_mean_cosine(cls, absorption: float, scattering: float, mean_cosine: float) -> "ScatterModel":
        return cls(absorption, scattering, backscatter_from_mean_cosine(mean_cosine))

    @property
    def extinction(self) -> float:
        return self.absorption + self.scattering

    @property
    def albedo(self) -> float:
        return self.scattering / self.extinction

    @property
    def mean_cosine(self) -> float:
        return self._params[0]

    @property
    def g_F(self) -> float:
        return self._params[1]

    @property
    def g_B(self) -> float:
        return self._params[2]

    @property
    def a(self) -> float:
        return self._params[3]


def _hg(cos_t, g):
    return 0.5 * (1.0 - g * g) / (1.0 + g * g - 2.0 * g * cos_t) ** 1.5


def tthg_density(cos_t, model: ScatterModel):
    """Density of cos(theta); integrates to one over [-1, 1]."""
    return model.a * _hg(cos_t, model.g_F) + (1.0 - model.a) * _hg(cos_t, -model.g_B)


def hg_inverse_cdf(g, u):
    """cos(theta) for a single Henyey-Greenstein lobe at uniform draw ``u``."""
    g = np.asarray(g, dtype=float)
    u = np.asarray(u, dtype=float)
    iso = np.abs(g) < 1e-8
    safe = np.where(iso, 0.5, g)  # placeholder, discarded below
    frac = (1.0 - safe * safe) / (1.0 - safe + 2.0 * safe * u)
    out = np.where(iso, 2.0 * u - 1.0, (1.0 + safe * safe - frac * frac) / (2.0 * safe))
    return np.clip(out, -1.0, 1.0)


def sample_scatter_angle(model: ScatterModel, rng, size=None):
    """Draw ``(theta, phi)`` from the two-term phase function.

    A lobe is picked with probability a (forward) or 1 - a (backward) and
    its closed-form inverse CDF is applied.
    """
    gen = getattr(rng, "generator", rng)
    n = 1 if size is None else size
    forward = gen.random(n) < model.a
    g = np.where(forward, model.g_F, -model.g_B)
    cos_t = hg_inverse_cdf(g, gen.random(n))
    phi = gen.uniform(0.0, 2.0 * math.pi, n)
    theta = np.arccos(cos_t)
    if size is None:
        return float(theta[0]), float(phi[0])
    return theta, phi
