import math

import pytest

from conftest import link
from invariants import REGISTRY
from uwqkd.decoy import (
    DecoyParams,
    decoy_rate_lower,
    decoy_report,
    eta_fraction,
    gain_upper_mu,
    gains_lower,
    ideal_bb84_rate,
    qber_upper_mu,
    single_photon_bounds,
    single_photon_error_upper,
)
from uwqkd.noise import decoy_noise_yield_Y0
from uwqkd.numerics import DomainError, binary_entropy

P = DecoyParams()


@pytest.mark.parametrize("fn", [f for m, _, f in REGISTRY if m == "decoy"], ids=lambda f: f.__name__)
def test_decoy_invariant(fn):
    fn()


def test_eta_fraction():
    assert eta_fraction(0.3, 1.0, 1.0) == 0.3
    assert eta_fraction(0.3, 0.0, 0.5) == 0.0


def test_gain_limits():
    Y0 = 1e-5
    assert gains_lower(Y0, 0.0, 0.2, 0.045, P) == (Y0, Y0)
    assert gain_upper_mu(Y0, 0.0, 0.045, P) == Y0
    nu_gain, mu_gain = gains_lower(Y0, 0.7, 0.2, 0.045, P)
    assert mu_gain == pytest.approx(Y0 + 0.7 * (1 - math.exp(-0.48 * 0.045 * 0.2)), rel=1e-14)
    assert nu_gain == pytest.approx(Y0 + 0.7 * (1 - math.exp(-0.05 * 0.045 * 0.2)), rel=1e-14)


def test_qber_upper_limits():
    clean = DecoyParams(detector_error=0.0)
    assert qber_upper_mu(0.0, 0.01, 0.5, 0.045, clean) == 0.0
    Y0 = 1e-5
    assert qber_upper_mu(Y0, Y0, 0.0, 0.045, P) == pytest.approx(0.5, rel=1e-15)


def test_single_photon_bounds_ratio_and_boundary():
    Y1, Q1 = single_photon_bounds(2e-3, 1e-2, 1e-5, P)
    assert Q1 / Y1 == pytest.approx(0.48 * math.exp(-0.48), rel=1e-15)
    mu, nu, Y0, Q_mu = 0.48, 0.05, 1e-5, 1e-2
    Q_nu = (Q_mu * math.exp(mu) * nu * nu / (mu * mu) + (mu * mu - nu * nu) / (mu * mu) * Y0) / math.exp(nu)
    assert abs(single_photon_bounds(Q_nu, Q_mu, Y0, P)[0]) < 1e-15


def test_single_photon_error_limits():
    clean = DecoyParams(detector_error=0.0)
    assert single_photon_error_upper(0.0, 1e-3, 0.01, clean) == 0.0
    assert single_photon_error_upper(1e-5, 0.0, 0.01, P) == math.inf


def test_rate_with_no_single_photons_is_not_positive():
    assert decoy_rate_lower(1e-3, 0.05, 0.0, 0.1, P) < 0


def test_ideal_rate_error_forms():
    clean = DecoyParams(detector_error=0.0)
    Y0, eta = 1e-5, 1e-3
    e1 = (Y0 / 2) / (Y0 + eta)
    Q1 = (Y0 + eta) * 0.48 * math.exp(-0.48)
    assert ideal_bb84_rate(eta, Y0, clean) == pytest.approx(0.5 * Q1 * (1 - binary_entropy(e1) * 2.22), rel=1e-14)
    # without noise the single-photon error is the detector error
    Q1 = eta * 0.48 * math.exp(-0.48)
    assert ideal_bb84_rate(eta, 0.0, P) == pytest.approx(0.5 * Q1 * (1 - binary_entropy(0.033) * 2.22), rel=1e-14)


@pytest.mark.parametrize("kwargs", [dict(decoy_intensity=0.5), dict(decoy_intensity=0.0), dict(detector_error=0.5)])
def test_params_validation(kwargs):
    with pytest.raises(DomainError):
        DecoyParams(**kwargs)


def test_report_at_short_and_long_range():
    s = link("clear_ocean", "weak", 0.05)
    near = decoy_report(s, 20.0)
    assert near.flags == () and near.rate_lower > 0
    assert near.Q_nu_L <= near.Q_mu_L <= near.Q_mu_U
    assert 0 <= near.e1_U <= 1
    far = decoy_report(s, 150.0)
    assert far.rate_lower <= 0.0
    assert decoy_report(s, 150.0, DecoyParams(detector_error=0.45)).flags == ("e1-above-half",)


def test_collapsed_yield_bound_reported_as_zero(monkeypatch):
    # with the default intensities even a noise-only link keeps Y1_L > 0,
    # so the collapse is forced
    import uwqkd.decoy as decoy

    monkeypatch.setattr(decoy, "single_photon_bounds", lambda *a: (-1e-6, -1e-7))
    r = decoy.decoy_report(link("clear_ocean", "none", 0.05), 30.0)
    assert "bound-collapsed" in r.flags
    assert r.Y1_L == 0.0 and r.Q1_L == 0.0 and r.rate_lower == 0.0


def test_report_matches_manual_composition():
    s = link("coastal", "weak", 0.05)
    L = 15.0
    Y0 = decoy_noise_yield_Y0(s.environment, s.receiver, s.geometry.wavelength)
    l, alpha = s.loss(L), s.mu(L)
    q_nu, q_mu = gains_lower(Y0, alpha, l, 0.045, P)
    q_mu_u = gain_upper_mu(Y0, l, 0.045, P)
    e_mu = qber_upper_mu(Y0, q_mu, l, 0.045, P)
    y1, q1 = single_photon_bounds(q_nu, q_mu_u, Y0, P)
    e1 = single_photon_error_upper(Y0, y1, l * alpha * 0.045, P)
    assert decoy_report(s, L).rate_lower == pytest.approx(decoy_rate_lower(q_mu_u, e_mu, q1, e1, P), rel=1e-13)
