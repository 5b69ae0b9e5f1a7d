"""Received-fraction based QBER and the gate-time search."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from ..noise import Environment, ReceiverParams, background_photons_per_polarization, dark_counts
from ..numerics import DomainError
from .transport import McConfig, McResult, run_simulation

__all__ = ["mc_qber", "gate_noise", "GateCurve", "gate_curve", "optimize_gate_time"]


def mc_qber(gamma, n_S: float, n_N):
    """QBER from a received fraction; the 1/2 accounts for sifting."""
    gamma = np.asarray(gamma, dtype=float)
    n_N = np.asarray(n_N, dtype=float)
    den = 0.5 * gamma * n_S + 2.0 * n_N
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(den > 0, n_N / np.where(den > 0, den, 1.0), 0.5)
    out = np.where(gamma <= 0, 0.5, out)
    return out if out.ndim else float(out)


def gate_noise(gate: float, env: Environment, rx: ReceiverParams, wavelength: float) -> float:
    """Noise per detector when the receiver gate is ``gate`` seconds.

    Background scales with the gate; dark counts accrue over the bit period.
    """
    rx_g = replace(rx, gate_time=gate)
    return background_photons_per_polarization(env, rx_g, wavelength) / 2.0 + dark_counts(rx_g)


@dataclass
class GateCurve:
    gates: np.ndarray
    gamma: np.ndarray
    noise: np.ndarray
    qber: np.ndarray

    @property
    def best_index(self) -> int:
        return int(np.argmin(self.qber))

    @property
    def best_gate(self) -> float:
        return float(self.gates[self.best_index])

    @property
    def best_qber(self) -> float:
        return float(self.qber[self.best_index])

    def is_unimodal(self, tol: float = 0.0) -> bool:
        """True if the curve never rises before its minimum or falls after it."""
        k = self.best_index
        q = self.qber
        return bool(np.all(np.diff(q[: k + 1]) <= tol) and np.all(np.diff(q[k:]) >= -tol))


def gate_curve(result: McResult, gates, env: Environment, rx: ReceiverParams, wavelength: float, n_S: float = 1.0) -> GateCurve:
    """Re-filter one simulation's arrivals for every gate in ``gates``."""
    gates = np.asarray(sorted(set(float(g) for g in gates)))
    if gates.size == 0:
        raise DomainError("gate grid is empty")
    arr = result.arrivals.select(result.detector.fov)
    order = np.argsort(arr.toa, kind="stable")
    toa = arr.toa[order]
    cum = np.concatenate([[0.0], np.cumsum(arr.weight[order])])
    idx = np.searchsorted(toa, gates, side="left")
    gamma = cum[idx] / result.launched if result.launched else np.zeros_like(gates)
    noise = np.array([gate_noise(g, env, rx, wavelength) for g in gates])
    return GateCurve(gates, gamma, noise, mc_qber(gamma, n_S, noise))


def optimize_gate_time(
    cfg: McConfig,
    gate_grid,
    n_photons: int,
    seed: int,
    env: Environment | None = None,
    rx: ReceiverParams | None = None,
    wavelength: float = 532e-9,
    n_S: float = 1.0,
    threads: int | None = None,
    result: McResult | None = None,
) -> tuple[float, float, GateCurve]:
    """Exhaustive gate search on a single simulation.

    The photons are traced once with the gate open; each candidate gate
    then filters the same arrival records.  Returns ``(gate, qber, curve)``.
    """
    grid = list(gate_grid)
    if not grid:
        raise DomainError("gate grid is empty")
    env = env or Environment()
    if rx is None:
        rx = ReceiverParams(
            fov=cfg.detector.fov,
            bit_period=cfg.bit_period,
            aperture_diameter=2.0 * cfg.detector.aperture_radius,
        )
    if result is None:
        open_cfg = replace(cfg, detector=replace(cfg.detector, gate_time=math.inf))
        result = run_simulation(n_photons, open_cfg, seed, threads=threads)
    curve = gate_curve(result, grid, env, rx, wavelength, n_S)
    return curve.best_gate, curve.best_qber, curve
