import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate as sp_integrate

from uwqkd.numerics import (
    ConvergenceError,
    DomainError,
    QuadratureSpec,
    RandomStream,
    bessel_j0,
    bessel_j1,
    bessel_jn,
    binary_entropy,
    integrate,
)


def series_j(n, x, terms=60):
    """High-precision power series used as the reference."""
    with mp.workdps(50):
        x = mp.mpf(x)
        return float(sum((-1) ** k * (x / 2) ** (2 * k + n) / (mp.factorial(k) * mp.factorial(k + n)) for k in range(terms)))


def test_j0_known_values():
    assert bessel_j0(0.0) == 1.0
    assert bessel_j0(1.0) == pytest.approx(0.7651976865579666, abs=1e-15)
    assert abs(bessel_j0(2.404825557695773)) < 1e-9


def test_j0_root_from_independent_finder():
    with mp.workdps(30):
        root = mp.findroot(lambda t: mp.nsum(lambda k: (-1) ** k * (t / 2) ** (2 * k) / mp.factorial(k) ** 2, [0, mp.inf]), 2.4)
    assert abs(bessel_j0(float(root))) < 1e-9


def test_j1_known_values_and_odd_symmetry():
    assert bessel_j1(0.0) == 0.0
    assert bessel_j1(1.0) == pytest.approx(0.4400505857449335, abs=1e-15)
    assert bessel_j1(-1.0) == pytest.approx(-0.4400505857449335, abs=1e-15)


@pytest.mark.parametrize("n", [0, 1, 2])
def test_bessel_against_mpmath_on_dense_grid(n):
    xs = np.linspace(-50, 50, 1201)
    ours = bessel_jn(n, xs)
    ref = np.array([float(mp.besselj(n, x)) for x in xs])
    assert np.max(np.abs(ours - ref)) < 1e-10
    big = np.abs(ref) > 1e-2
    assert np.max(np.abs(ours[big] / ref[big] - 1)) < 1e-10


def test_series_reference_agrees_below_switch_point():
    for x in (0.3, 3.7, 11.9):
        assert bessel_j0(x) == pytest.approx(series_j(0, x), abs=1e-12)
        assert bessel_j1(x) == pytest.approx(series_j(1, x), abs=1e-12)


def test_bessel_bounded_and_vectorised():
    xs = np.linspace(-300, 300, 7777)
    assert np.all(np.abs(bessel_j0(xs)) <= 1.0)
    assert bessel_j0(xs).shape == xs.shape


@pytest.mark.parametrize("bad", [np.nan, np.inf, -np.inf])
def test_bessel_rejects_non_finite(bad):
    with pytest.raises(DomainError):
        bessel_j0(bad)
    with pytest.raises(DomainError):
        bessel_j1(np.array([1.0, bad]))


def test_bessel_recurrence_on_sampled_points():
    rng = np.random.default_rng(7)
    x = rng.uniform(1e-3, 40.0, 5000)
    lhs = bessel_jn(0, x) + bessel_jn(2, x)
    rhs = 2.0 * bessel_jn(1, x) / x
    assert np.max(np.abs(lhs - rhs)) < 1e-8


def test_integrate_polynomial_and_sine():
    assert integrate(lambda x: x * x, 0.0, 1.0) == pytest.approx(1 / 3, abs=1e-12)
    assert integrate(np.sin, 0.0, math.pi) == pytest.approx(2.0, abs=1e-10)


def test_integrate_gaussian_against_fixed_grid_reference():
    x = np.linspace(0.0, 3.0, 200_001)
    ref = sp_integrate.simpson(np.exp(-x * x), x=x)
    assert integrate(lambda t: np.exp(-t * t), 0.0, 3.0) == pytest.approx(ref, abs=1e-9)
    assert ref == pytest.approx(0.5 * math.sqrt(math.pi) * math.erf(3.0), abs=1e-12)


def test_integrate_endpoint_singularity():
    # 1/sqrt(x) on (0, 1] integrates to 2; the rule never samples x = 0
    spec = QuadratureSpec(abs_tol=1e-9, rel_tol=1e-9, max_subdivisions=5000)
    assert integrate(lambda x: 1.0 / np.sqrt(x), 0.0, 1.0, spec) == pytest.approx(2.0, abs=1e-7)


def test_integrate_scalar_callable():
    assert integrate(math.cos, 0.0, 1.0, vectorized=False) == pytest.approx(math.sin(1.0), abs=1e-12)


def test_integrate_budget_exhaustion_carries_estimate():
    spec = QuadratureSpec(abs_tol=1e-14, rel_tol=1e-14, max_subdivisions=3)
    with pytest.raises(ConvergenceError) as err:
        integrate(lambda x: np.sin(200 * x) ** 2, 0.0, 10.0, spec)
    assert math.isfinite(err.value.estimate)


def test_integrate_rejects_empty_interval():
    with pytest.raises(DomainError):
        integrate(np.sin, 1.0, 1.0)


def test_quadrature_spec_validation():
    with pytest.raises(DomainError):
        QuadratureSpec(abs_tol=0.0)
    with pytest.raises(DomainError):
        QuadratureSpec(max_subdivisions=0)


@settings(max_examples=60, deadline=None)
@given(a=st.floats(-5, 5), w=st.floats(0.01, 5), frac=st.floats(0.05, 0.95))
def test_integration_is_additive_under_bisection(a, w, frac):
    f = lambda x: np.exp(-x * x) * np.cos(3 * x)  # noqa: E731
    b = a + w
    m = a + frac * w
    whole = integrate(f, a, b)
    assert whole == pytest.approx(integrate(f, a, m) + integrate(f, m, b), abs=1e-9)


def test_binary_entropy_values():
    assert binary_entropy(0.5) == 1.0
    assert binary_entropy(0.0) == 0.0
    assert binary_entropy(1.0) == 0.0
    with mp.workdps(40):
        p = mp.mpf("0.11")
        ref = float(-p * mp.log(p, 2) - (1 - p) * mp.log(1 - p, 2))
    assert binary_entropy(0.11) == pytest.approx(ref, abs=1e-14)
    assert round(binary_entropy(0.11), 5) == 0.49992


@pytest.mark.parametrize("bad", [-0.01, 1.01, np.nan])
def test_binary_entropy_domain(bad):
    with pytest.raises(DomainError):
        binary_entropy(bad)


@settings(max_examples=200, deadline=None)
@given(p=st.floats(0, 1), q=st.floats(0, 1))
def test_binary_entropy_symmetric_and_concave(p, q):
    assert binary_entropy(p) == pytest.approx(binary_entropy(1 - p), abs=1e-12)
    assert binary_entropy((p + q) / 2) >= 0.5 * (binary_entropy(p) + binary_entropy(q)) - 1e-12


def test_random_streams_replay_and_differ():
    a = RandomStream(2024, 3).random(1024)
    b = RandomStream(2024, 3).random(1024)
    c = RandomStream(2024, 4).random(1024)
    assert a.tobytes() == b.tobytes()
    assert not np.array_equal(a, c)


def test_random_stream_open_unit_never_zero():
    u = RandomStream(1).open_unit(100_000)
    assert u.min() > 0.0 and u.max() <= 1.0


def test_random_stream_validation():
    with pytest.raises(DomainError):
        RandomStream(-1)
    with pytest.raises(DomainError):
        RandomStream(1, -2)
