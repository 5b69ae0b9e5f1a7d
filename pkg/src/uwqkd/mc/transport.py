"""Photon transport from the transmitter plane to the receiver plane."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..noise import LIGHT_SPEED
from ..numerics import DomainError, RandomStream
from .phase import ScatterModel, hg_inverse_cdf
from .photon import Photon, launch_batch, rotate_direction

__all__ = [
    "DetectorSpec",
    "McConfig",
    "Detected",
    "Absorbed",
    "Missed",
    "Arrivals",
    "McResult",
    "propagate",
    "transport_batch",
    "run_simulation",
]


@dataclass(frozen=True)
class DetectorSpec:
    aperture_radius: float = 0.10
    fov: float = math.pi
    gate_time: float = math.inf
    plane_z: float = 10.0
    refractive_index: float = 1.33

    def __post_init__(self):
        if not (self.aperture_radius > 0 and self.gate_time > 0 and self.plane_z > 0):
            raise DomainError("aperture radius, gate time and plane distance must be positive")
        if not 0 < self.fov <= math.pi:
            raise DomainError("field of view must lie in (0, pi]")
        if not self.refractive_index > 0:
            raise DomainError("refractive index must be positive")

    def accepts(self, radius2, toa, aoa):
        return (radius2 <= self.aperture_radius**2) & (aoa < self.fov) & (toa < self.gate_time)


@dataclass(frozen=True)
class McConfig:
    """Source, water and receiver description for one simulation."""

    model: ScatterModel
    detector: DetectorSpec
    source_radius: float = 3e-3
    source_half_angle: float = math.radians(20.0)
    weight_threshold: float = 1e-4
    max_interactions: int = 10_000
    bit_period: float = 20e-9
    hist_bins: int = 200
    chunk_size: int = 1_000_000


@dataclass(frozen=True)
class Detected:
    toa: float
    aoa: float
    weight: float


@dataclass(frozen=True)
class Absorbed:
    truncated: bool = False


@dataclass(frozen=True)
class Missed:
    radius: float
    toa: float
    aoa: float


@dataclass
class Arrivals:
    """Photons that reached the receiver plane inside the aperture radius."""

    toa: np.ndarray
    aoa: np.ndarray
    weight: np.ndarray

    @classmethod
    def empty(cls) -> "Arrivals":
        return cls(np.empty(0), np.empty(0), np.empty(0))

    @classmethod
    def concat(cls, parts) -> "Arrivals":
        parts = list(parts)
        if not parts:
            return cls.empty()
        return cls(*(np.concatenate([getattr(p, k) for p in parts]) for k in ("toa", "aoa", "weight")))

    def select(self, fov: float = math.pi, gate: float = math.inf) -> "Arrivals":
        keep = (self.aoa < fov) & (self.toa < gate)
        return Arrivals(self.toa[keep], self.aoa[keep], self.weight[keep])

    def __len__(self) -> int:
        return self.toa.size


def transport_batch(n: int, cfg: McConfig, rng):
    """Trace ``n`` photons; return plane arrivals and bookkeeping counts.

    Each loop iteration draws a free path for every live photon.  Photons
    whose step crosses the receiver plane are stopped there (linear
    interpolation along the step) and recorded if inside the aperture.
    The rest move, lose weight, are dropped below the weight threshold and
    otherwise scatter.
    """
    m = cfg.model
    det = cfg.detector
    L = det.plane_z
    ext = m.extinction
    survive = m.albedo
    (x, y, z), (ux, uy, uz) = launch_batch(n, cfg.source_radius, cfg.source_half_angle, rng)
    ux, uy, uz = ux.copy(), uy.copy(), uz.copy()
    w = np.ones(n)
    path = np.zeros(n)
    live = np.arange(n)
    got = []
    crossed_total = 0
    absorbed = 0
    truncated = 0
    gen = getattr(rng, "generator", rng)
    ct_scale = det.refractive_index / LIGHT_SPEED
    steps = 0
    while live.size:
        if steps >= cfg.max_interactions:
            truncated += live.size
            absorbed += live.size
            break
        steps += 1
        step = -np.log(1.0 - gen.random(live.size)) / ext
        z0 = z[live]
        zn = z0 + uz[live] * step
        cross = (z0 < L) & (zn >= L)
        if cross.any():
            idx = live[cross]
            s = (L - z[idx]) / uz[idx]
            xe = x[idx] + ux[idx] * s
            ye = y[idx] + uy[idx] * s
            r2 = xe * xe + ye * ye
            inside = r2 <= det.aperture_radius**2
            toa = (path[idx] + s) * ct_scale - L * ct_scale
            aoa = np.arccos(np.clip(uz[idx], -1.0, 1.0))
            got.append(Arrivals(np.maximum(toa[inside], 0.0), aoa[inside], w[idx][inside]))
            crossed_total += idx.size
        stay = live[~cross]
        d = step[~cross]
        x[stay] += ux[stay] * d
        y[stay] += uy[stay] * d
        z[stay] += uz[stay] * d
        path[stay] += d
        w[stay] *= survive
        alive = w[stay] >= cfg.weight_threshold
        absorbed += int((~alive).sum())
        stay = stay[alive]
        k = stay.size
        if k:
            forward = gen.random(k) < m.a
            g = np.where(forward, m.g_F, -m.g_B)
            cos_t = hg_inverse_cdf(g, gen.random(k))
            phi = gen.uniform(0.0, 2.0 * math.pi, k)
            ux[stay], uy[stay], uz[stay] = rotate_direction(ux[stay], uy[stay], uz[stay], np.arccos(cos_t), phi)
        live = stay
    arrivals = Arrivals.concat(got)
    return arrivals, {"crossed": crossed_total, "absorbed": absorbed, "truncated": truncated}


def propagate(photon: Photon, model: ScatterModel, detector: DetectorSpec, w_th: float, rng, max_interactions: int = 10_000):
    """Follow one photon until it is detected, missed or absorbed."""
    m, det = model, detector
    L = det.plane_z
    gen = getattr(rng, "generator", rng)
    p = Photon(**vars(photon))
    ct_scale = det.refractive_index / LIGHT_SPEED
    for _ in range(max_interactions):
        step = -math.log(1.0 - gen.random()) / m.extinction
        zn = p.z + p.uz * step
        if p.z < L <= zn:
            s = (L - p.z) / p.uz
            xe, ye = p.x + p.ux * s, p.y + p.uy * s
            toa = max((p.path + s) * ct_scale - L * ct_scale, 0.0)
            aoa = math.acos(max(-1.0, min(1.0, p.uz)))
            r2 = xe * xe + ye * ye
            if det.accepts(r2, toa, aoa):
                return Detected(toa, aoa, p.weight)
            return Missed(math.sqrt(r2), toa, aoa)
        p.x += p.ux * step
        p.y += p.uy * step
        p.z = zn
        p.path += step
        p.weight *= m.albedo
        if p.weight < w_th:
            return Absorbed()
        forward = gen.random() < m.a
        cos_t = float(hg_inverse_cdf(m.g_F if forward else -m.g_B, gen.random()))
        phi = gen.uniform(0.0, 2.0 * math.pi)
        p.ux, p.uy, p.uz = rotate_direction(p.ux, p.uy, p.uz, math.acos(cos_t), phi)
    return Absorbed(truncated=True)


def _histogram(values, weights, edges):
    counts, _ = np.histogram(values, bins=edges)
    wsum, _ = np.histogram(values, bins=edges, weights=weights)
    return counts, wsum


@dataclass
class McResult:
    launched: int
    arrivals: Arrivals
    detector: DetectorSpec
    seed: int
    partitions: int
    bit_period: float = 20e-9
    hist_bins: int = 200
    diagnostics: dict = field(default_factory=dict)

    @property
    def detected(self) -> Arrivals:
        d = self.detector
        return self.arrivals.select(d.fov, d.gate_time)

    @property
    def received(self) -> int:
        return len(self.detected)

    @property
    def received_weight(self) -> float:
        return float(self.detected.weight.sum())

    def gamma(self, fov: float | None = None, gate: float | None = None) -> tuple[float, float]:
        """Received fraction and its standard error for the given acceptance."""
        if self.launched == 0:
            return 0.0, 0.0
        fov = self.detector.fov if fov is None else fov
        gate = self.detector.gate_time if gate is None else gate
        w = self.arrivals.select(fov, gate).weight
        n = self.launched
        mean = w.sum() / n
        var = max((w * w).sum() / n - mean * mean, 0.0)
        return float(mean), float(math.sqrt(var / n))

    @property
    def gamma_estimate(self) -> float:
        return self.gamma()[0]

    def toa_histogram(self):
        edges = np.linspace(0.0, self.bit_period, self.hist_bins + 1)
        d = self.detected
        return (edges, *_histogram(d.toa, d.weight, edges))

    def aoa_histogram(self):
        edges = np.linspace(0.0, math.pi / 2, self.hist_bins + 1)
        d = self.detected
        return (edges, *_histogram(d.aoa, d.weight, edges))


def _resolve_threads(threads: int | None) -> int:
    if threads is None:
        env = os.environ.get("UWQKD_THREADS")
        threads = int(env) if env else 1
    return max(1, int(threads))


def run_simulation(n_photons: int, cfg: McConfig, seed: int, partitions: int | None = None, threads: int | None = None) -> McResult:
    """Launch ``n_photons`` and collect what reaches the receiver plane.

    The photons are split into ``partitions`` blocks, block i drawing from
    ``RandomStream(seed, i)``.  Blocks are merged in index order, so the
    result depends only on ``(seed, partitions)``, never on ``threads``.
    """
    if n_photons < 0:
        raise DomainError("photon count must be non-negative")
    if partitions is None:
        partitions = max(1, math.ceil(n_photons / cfg.chunk_size))
    sizes = [n_photons // partitions + (1 if i < n_photons % partitions else 0) for i in range(partitions)]

    def work(i):
        if sizes[i] == 0:
            return Arrivals.empty(), {"crossed": 0, "absorbed": 0, "truncated": 0}
        return transport_batch(sizes[i], cfg, RandomStream(seed, i))

    n_threads = min(_resolve_threads(threads), partitions)
    if n_threads > 1:
        with ThreadPoolExecutor(n_threads) as pool:
            parts = list(pool.map(work, range(partitions)))
    else:
        parts = [work(i) for i in range(partitions)]
    diag = {k: sum(p[1][k] for p in parts) for k in ("crossed", "absorbed", "truncated")}
    return McResult(
        launched=n_photons,
        arrivals=Arrivals.concat(p[0] for p in parts),
        detector=cfg.detector,
        seed=seed,
        partitions=partitions,
        bit_period=cfg.bit_period,
        hist_bins=cfg.hist_bins,
        diagnostics=diag,
    )
