"""Numerical kernels shared by the rest of the package.

Everything here works on numpy arrays as well as plain floats.  Bessel
functions are evaluated with a power series for small arguments and the
Hankel asymptotic expansion for large ones; quadrature is a vectorized
adaptive Gauss-Kronrod (7/15) scheme with interval bisection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

__all__ = [
    "DomainError",
    "ConvergenceError",
    "QuadratureSpec",
    "RandomStream",
    "bessel_j0",
    "bessel_j1",
    "bessel_jn",
    "integrate",
    "binary_entropy",
]


class DomainError(ValueError):
    """An argument lies outside the domain of the function."""


class ConvergenceError(ArithmeticError):
    """An iterative method ran out of budget before meeting its tolerance.

    The best available estimate is kept on the exception so callers can
    decide whether it is still usable.
    """

    def __init__(self, message: str, estimate: float, error: float):
        super().__init__(f"{message} (estimate={estimate!r}, error~{error:.3g})")
        self.estimate = estimate
        self.error = error


# ---------------------------------------------------------------------------
# Bessel functions of the first kind
# ---------------------------------------------------------------------------

_SERIES_LIMIT = 12.0
_SERIES_TERMS = 60
_ASYMPTOTIC_TERMS = 60


def _check_finite(x: np.ndarray) -> None:
    if not np.all(np.isfinite(x)):
        raise DomainError("Bessel functions need finite arguments")


def _jn_series(n: int, x: np.ndarray) -> np.ndarray:
    half = 0.5 * x
    t = -half * half
    term = np.ones_like(x)
    total = np.ones_like(x)
    for k in range(1, _SERIES_TERMS):
        term = term * t / (k * (k + n))
        total = total + term
    return total * half**n / math.factorial(n)


def _jn_hankel(n: int, x: np.ndarray) -> np.ndarray:
    # P and Q series of the Hankel expansion, truncated at the smallest term.
    mu = 4.0 * n * n
    p = np.ones_like(x)
    q = np.zeros_like(x)
    term = np.ones_like(x)
    prev = np.full_like(x, np.inf)
    live = np.ones(x.shape, dtype=bool)
    for m in range(1, _ASYMPTOTIC_TERMS):
        term = term * (mu - (2 * m - 1) ** 2) / (m * 8.0 * x)
        size = np.abs(term)
        live &= size < prev
        prev = size
        if not live.any():
            break
        sign = -1.0 if (m // 2) % 2 else 1.0
        contrib = np.where(live, sign * term, 0.0)
        if m % 2:
            q = q + contrib
        else:
            p = p + contrib
    chi = x - (0.5 * n + 0.25) * math.pi
    return np.sqrt(2.0 / (math.pi * x)) * (p * np.cos(chi) - q * np.sin(chi))


def bessel_jn(n: int, x):
    """Bessel function J_n(x) for a small non-negative integer order ``n``."""
    if n < 0:
        raise DomainError("only non-negative orders are supported")
    arr = np.asarray(x, dtype=float)
    _check_finite(arr)
    ax = np.abs(arr)
    out = np.empty_like(ax)
    small = ax < _SERIES_LIMIT
    if small.any():
        out[small] = _jn_series(n, ax[small])
    if (~small).any():
        out[~small] = _jn_hankel(n, ax[~small])
    if n % 2:
        out = np.where(arr < 0, -out, out)
    return out if out.ndim else float(out)


def bessel_j0(x):
    """Zero-order Bessel function of the first kind."""
    return bessel_jn(0, x)


def bessel_j1(x):
    """First-order Bessel function of the first kind (odd in ``x``)."""
    return bessel_jn(1, x)


# ---------------------------------------------------------------------------
# Adaptive Gauss-Kronrod quadrature
# ---------------------------------------------------------------------------

_XK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

# full 15-point abscissae on [-1, 1] and the matching weights
_NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
_KRONROD = np.concatenate([_WK[:-1], _WK[::-1]])
_GAUSS = np.zeros(15)
_GAUSS[1:7:2] = _WG[:3]
_GAUSS[7] = _WG[3]
_GAUSS[9:15:2] = _WG[2::-1]


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and budget for :func:`integrate`."""

    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_subdivisions: int = 10_000

    def __post_init__(self):
        if not self.abs_tol > 0 or not self.rel_tol > 0:
            raise DomainError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be at least 1")


DEFAULT_QUADRATURE = QuadratureSpec()


def _gk15(f, lo: np.ndarray, hi: np.ndarray):
    centre = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    x = centre[:, None] + half[:, None] * _NODES[None, :]
    fx = np.asarray(f(x.ravel()), dtype=float).reshape(x.shape)
    if not np.all(np.isfinite(fx)):
        raise DomainError("integrand returned a non-finite value")
    kron = half * (fx @ _KRONROD)
    gauss = half * (fx @ _GAUSS)
    return kron, np.abs(kron - gauss)


def integrate(
    f: Callable,
    a: float,
    b: float,
    spec: QuadratureSpec | None = None,
    *,
    points: Iterable[float] | None = None,
    vectorized: bool = True,
    full_output: bool = False,
):
    """Integrate ``f`` over ``[a, b]``.

    ``f`` is called with 1-D arrays of abscissae unless ``vectorized`` is
    False.  Interior ``points`` (kinks, oscillation nodes) become initial
    breakpoints.  The rule never touches the end points, so integrable
    end-point singularities are tolerated.

    Returns the integral, or ``(value, error)`` when ``full_output`` is set.
    Raises :class:`ConvergenceError` if the subdivision budget runs out.
    """
    spec = spec or DEFAULT_QUADRATURE
    a = float(a)
    b = float(b)
    if not a < b:
        raise DomainError(f"need a < b, got [{a}, {b}]")
    if not vectorized:
        scalar = f
        f = lambda xs: np.array([scalar(float(t)) for t in xs])  # noqa: E731

    edges = [a]
    if points is not None:
        edges.extend(sorted(p for p in set(map(float, points)) if a < p < b))
    edges.append(b)
    lo = np.array(edges[:-1])
    hi = np.array(edges[1:])
    width = b - a

    done_val = 0.0
    done_err = 0.0
    n_intervals = lo.size
    while True:
        val, err = _gk15(f, lo, hi)
        total = done_val + val.sum()
        total_err = done_err + err.sum()
        goal = max(spec.abs_tol, spec.rel_tol * abs(total))
        if total_err <= goal:
            break
        ok = err <= goal * (hi - lo) / width
        done_val += val[ok].sum()
        done_err += err[ok].sum()
        lo, hi = lo[~ok], hi[~ok]
        n_intervals += lo.size
        if n_intervals > spec.max_subdivisions:
            raise ConvergenceError("quadrature budget exhausted", total, total_err)
        mid = 0.5 * (lo + hi)
        if np.any((mid <= lo) | (mid >= hi)):
            raise ConvergenceError("intervals collapsed to machine precision", total, total_err)
        lo, hi = np.concatenate([lo, mid]), np.concatenate([mid, hi])
    return (total, total_err) if full_output else total


# ---------------------------------------------------------------------------
# Entropy
# ---------------------------------------------------------------------------

def binary_entropy(p):
    """Binary Shannon entropy in bits, with 0 log 0 taken as 0."""
    arr = np.asarray(p, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any((arr < 0) | (arr > 1)):
        raise DomainError("binary entropy needs a probability in [0, 1]")
    with np.errstate(divide="ignore", invalid="ignore"):
        q = 1.0 - arr
        h = -(np.where(arr > 0, arr * np.log2(arr), 0.0) + np.where(q > 0, q * np.log2(q), 0.0))
    return h if h.ndim else float(h)


# ---------------------------------------------------------------------------
# Random streams
# ---------------------------------------------------------------------------

class RandomStream:
    """Reproducible random source identified by ``(seed, stream_id)``.

    Streams are built on the counter-based Philox generator; the stream id
    goes into the seed sequence's spawn key, so distinct ids give
    statistically independent sequences while equal pairs replay exactly.
    One stream belongs to one worker; it is not meant to be shared.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        if not 0 <= int(seed) < 2**64:
            raise DomainError("seed must fit in 64 unsigned bits")
        if int(stream_id) < 0:
            raise DomainError("stream_id must be non-negative")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        sequence = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        self.generator = np.random.Generator(np.random.Philox(sequence))

    def __repr__(self) -> str:
        return f"RandomStream(seed={self.seed}, stream_id={self.stream_id})"

    def uniform(self, low=0.0, high=1.0, size=None):
        return self.generator.uniform(low, high, size)

    def random(self, size=None):
        """Uniform draws on [0, 1)."""
        return self.generator.random(size)

    def open_unit(self, size=None):
        """Uniform draws on (0, 1], safe to pass to ``log``."""
        return 1.0 - self.generator.random(size)

    @classmethod
    def partition(cls, seed: int, count: int) -> Sequence["RandomStream"]:
        return [cls(seed, i) for i in range(count)]
