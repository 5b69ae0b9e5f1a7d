import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import link
from invariants import REGISTRY
from uwqkd.bb84 import (
    Bb84Params,
    BracketError,
    IndeterminateError,
    achievable_distance,
    criterion_margin,
    direct_link_report,
    qber_nonturbulent,
    qber_upper_bound,
    reconciliation_efficiency,
    skr_lower_bound,
    solve_cutoff,
)
from uwqkd.numerics import DomainError, binary_entropy


@pytest.mark.parametrize("fn", [f for m, _, f in REGISTRY if m == "bb84"], ids=lambda f: f.__name__)
def test_bb84_invariant(fn):
    fn()


def test_qber_bound_by_hand():
    n_N, n_S, mu, l, eta = 1e-6, 1.0, 0.8, 1e-4, 0.5
    att = math.exp(-eta * n_S * l)
    num = n_N * (1 - mu + mu * att)
    expect = num / (0.5 * n_S * l * mu * att + 2 * num)
    assert qber_upper_bound(n_N, n_S, mu, l, eta) == pytest.approx(expect, rel=1e-15)


def test_qber_bound_limits():
    assert qber_upper_bound(0.0, 1.0, 0.5, 0.1, 0.5) == 0.0
    # no light reaches Bob: pure noise
    assert qber_upper_bound(1e-6, 1.0, 0.0, 0.1, 0.5) == 0.5
    with pytest.raises(IndeterminateError):
        qber_upper_bound(0.0, 1.0, 0.0, 0.1, 0.5)
    with pytest.raises(DomainError):
        qber_upper_bound(1e-6, 1.0, 1.5, 0.1, 0.5)


def test_bound_turns_around_when_signal_saturates():
    # With mu < 1 the exp(-eta n_S l) factor makes the bound rise again once
    # eta * n_S * l is well above one; the sampled monotonicity property is
    # therefore restricted to eta * n_S * l <= 1.
    q = [qber_upper_bound(1e-4, n_S, 0.5, 1.0, 1.0) for n_S in (0.5, 1.0, 4.0, 8.0)]
    assert q[1] < q[0] and q[3] > q[2]


def test_nonturbulent_form():
    assert qber_nonturbulent(1e-6, 1.0, 1.0, 1e-4) == pytest.approx(2e-6 / (1e-4 + 4e-6), rel=1e-15)
    assert qber_nonturbulent(1.0, 1.0, 0.0, 0.0) == 0.5


def test_reconciliation_efficiency_default():
    assert reconciliation_efficiency(Bb84Params()) == pytest.approx(0.5 / binary_entropy(0.1071), rel=1e-15)


def test_skr_values():
    p = Bb84Params()
    f = reconciliation_efficiency(p)
    assert skr_lower_bound(0.0, p) == 1.0
    assert skr_lower_bound(0.05, p) == pytest.approx(1 - (1 + f) * binary_entropy(0.05), rel=1e-14)
    assert skr_lower_bound(0.7, p) == skr_lower_bound(0.5, p) < 0
    arr = skr_lower_bound(np.array([0.01, 0.02]), p)
    assert arr.shape == (2,)


@settings(max_examples=200, deadline=None)
@given(q1=st.floats(0, 0.5), q2=st.floats(0, 0.5))
def test_skr_order_reverses_qber_order(q1, q2):
    p = Bb84Params()
    if q1 < q2:
        assert skr_lower_bound(q1, p) >= skr_lower_bound(q2, p)
    # below ~1e-9 the entropy difference vanishes against 1.0 in doubles
    if q2 - q1 > 1e-9:
        assert skr_lower_bound(q1, p) > skr_lower_bound(q2, p)


@pytest.mark.parametrize("kwargs", [dict(mean_photon_number=0.0), dict(ldpc_rate=1.0), dict(qber_threshold=0.6)])
def test_params_validation(kwargs):
    with pytest.raises(DomainError):
        Bb84Params(**kwargs)


def test_report_fields_consistent():
    s = link("clear_ocean", "strong")
    r = direct_link_report(s, 50.0)
    assert r.qber_upper == pytest.approx(qber_upper_bound(r.noise, 1.0, r.mu, r.path_loss, 0.5), rel=1e-15)
    assert r.mu <= r.mu0 <= 1.0
    assert r.skr_lower == skr_lower_bound(r.qber_upper, s.params)


def test_solve_cutoff_on_known_function():
    assert solve_cutoff(lambda x: 42.4242 - x, 1.0, 100.0) == pytest.approx(42.4242, abs=1e-4)
    with pytest.raises(BracketError, match="already fails"):
        solve_cutoff(lambda x: -1.0, 1.0, 10.0)
    with pytest.raises(BracketError, match="still holds"):
        solve_cutoff(lambda x: 1.0, 1.0, 10.0)
    with pytest.raises(DomainError):
        solve_cutoff(lambda x: 1.0, 5.0, 5.0)


def test_solver_catches_non_monotone_pocket():
    # margin dips below zero in (10.2, 10.6) and recovers; the first crossing counts
    margin = lambda x: 1.0 if not 10.2 < x < 10.6 else -1.0  # noqa: E731
    assert 10.0 < solve_cutoff(margin, 1.0, 50.0, step=0.2) < 10.4


def test_unknown_criterion():
    with pytest.raises(DomainError):
        criterion_margin("rate", 0.1, Bb84Params())
    with pytest.raises(DomainError):
        achievable_distance("rate", link())


def test_turbid_reach_independent_of_turbulence():
    reach = [achievable_distance("qber", link("turbid_harbor", r)) for r in ("none", "weak", "moderate", "strong")]
    assert max(reach) - min(reach) < 0.05
    assert all(abs(d - 6.0) < 1.0 for d in reach)
