"""Photon state and the elementary transport steps."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..numerics import DomainError

__all__ = [
    "Photon",
    "launch_photon",
    "launch_batch",
    "sample_path_length",
    "update_weight",
    "rotate_direction",
    "NEAR_AXIS",
]

NEAR_AXIS = 0.9999


@dataclass
class Photon:
    x: float
    y: float
    z: float
    ux: float
    uy: float
    uz: float
    weight: float = 1.0
    path: float = 0.0

    @property
    def direction(self) -> tuple[float, float, float]:
        return self.ux, self.uy, self.uz


def launch_batch(n: int, r0: float, theta0_max: float, rng):
    """Positions and directions for ``n`` photons leaving a ring of radius r0.

    The azimuth fixes both the launch point on the ring and the plane of
    the initial tilt; the tilt angle is uniform on [-theta0_max, theta0_max].
    """
    gen = getattr(rng, "generator", rng)
    phi = gen.uniform(0.0, 2.0 * math.pi, n)
    tilt = gen.uniform(-theta0_max, theta0_max, n) if theta0_max > 0 else np.zeros(n)
    cp, sp = np.cos(phi), np.sin(phi)
    st = np.sin(tilt)
    pos = (r0 * cp, r0 * sp, np.zeros(n))
    direction = (st * cp, st * sp, np.cos(tilt))
    return pos, direction


def launch_photon(r0: float, theta0_max: float, rng) -> Photon:
    (x, y, z), (ux, uy, uz) = launch_batch(1, r0, theta0_max, rng)
    return Photon(x[0], y[0], z[0], ux[0], uy[0], uz[0])


def sample_path_length(extinction: float, rng, size=None):
    """Free path -ln(q)/extinction with q uniform on (0, 1]."""
    if not extinction > 0:
        raise DomainError("extinction must be positive")
    gen = getattr(rng, "generator", rng)
    q = 1.0 - gen.random(size)
    return -np.log(q) / extinction


def update_weight(w, absorption: float, scattering: float):
    """Survival weight after one interaction: w * scattering / extinction."""
    return w * scattering / (absorption + scattering)


def rotate_direction(ux, uy, uz, theta, phi):
    """Turn unit vectors by polar angle ``theta`` and azimuth ``phi``.

    Directions within 0.9999 of the z axis use the simplified near-axis
    update.  Results are renormalised so that rounding does not build up
    over many scattering events.
    """
    ux, uy, uz = (np.asarray(v, dtype=float) for v in (ux, uy, uz))
    ct, st = np.cos(theta), np.sin(theta)
    cp, sp = np.cos(phi), np.sin(phi)
    near = np.abs(uz) > NEAR_AXIS
    den = np.sqrt(np.maximum(1.0 - uz * uz, 1e-300))
    nx = np.where(near, st * cp, st * (ux * uz * cp - uy * sp) / den + ux * ct)
    ny = np.where(near, st * sp, st * (uy * uz * cp + ux * sp) / den + uy * ct)
    nz = np.where(near, np.sign(uz) * ct, -st * cp * den + uz * ct)
    norm = np.sqrt(nx * nx + ny * ny + nz * nz)
    nx, ny, nz = nx / norm, ny / norm, nz / norm
    if nx.ndim == 0:
        return float(nx), float(ny), float(nz)
    return nx, ny, nz
