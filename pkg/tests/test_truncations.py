"""Piecewise truncation values against hand-evaluated linear pieces, plus the
three structural identities."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from anisolab.errors import ValidationError
from anisolab.truncations import (
    TruncationPair,
    a_eval,
    a_prime,
    b_eval,
    b_prime,
    default_samples,
    verify_properties,
)

TOL = 1e-12


@pytest.fixture
def tp23():
    return TruncationPair(k=2, alpha=3.0)


def test_a_values_k2_alpha3(tp23):
    # linear piece is 4*(1 - t) on [0, 1/2); power piece t^-1 beyond
    assert a_eval(tp23, 1.0) == pytest.approx(1.0, abs=TOL)
    assert a_eval(tp23, 0.0) == pytest.approx(4.0, abs=TOL)
    assert a_eval(tp23, 0.25) == pytest.approx(3.0, abs=TOL)
    assert a_eval(tp23, 0.5) == pytest.approx(2.0, abs=TOL)


def test_b_values_k2_alpha3(tp23):
    # linear piece is 48*(2/3 - t) on [0, 1/2); power piece t^-3 beyond
    assert b_eval(tp23, 1.0) == pytest.approx(1.0, abs=TOL)
    assert b_eval(tp23, 0.5) == pytest.approx(8.0, abs=TOL)
    assert b_eval(tp23, 0.0) == pytest.approx(32.0, abs=TOL)


def test_negative_argument_rejected(tp23):
    with pytest.raises(ValidationError):
        a_eval(tp23, -0.1)
    with pytest.raises(ValidationError):
        b_prime(tp23, np.array([0.5, -1.0]))


def test_pair_validation():
    with pytest.raises(ValidationError):
        TruncationPair(k=0, alpha=3.0)
    with pytest.raises(ValidationError):
        TruncationPair(k=2, alpha=1.0)
    with pytest.raises(ValidationError):
        TruncationPair(k=2, alpha=2.5, exponents=(2, 3, 4))  # needs > p_N - 1 = 3


def test_derivative_pieces_k2_alpha3(tp23):
    # constant-derivative linear pieces: a' = -4, |b'| = 48, ratio 1/3
    assert a_prime(tp23, 0.1) == pytest.approx(-4.0, abs=TOL)
    assert b_prime(tp23, 0.1) == pytest.approx(-48.0, abs=TOL)
    assert a_prime(tp23, 0.1) ** 2 / abs(b_prime(tp23, 0.1)) == pytest.approx(1 / 3, abs=TOL)
    assert tp23.derivative_ratio == pytest.approx(1 / 3, abs=TOL)


def test_one_sided_derivatives_agree_at_knot(tp23):
    knot = tp23.knot
    # linear-piece slope equals the power-piece derivative at the knot
    assert tp23.a_slope == pytest.approx(
        0.5 * (1 - tp23.alpha) * knot ** (-0.5 * (1 + tp23.alpha)), rel=TOL
    )
    assert tp23.b_slope == pytest.approx(-tp23.alpha * knot ** (-tp23.alpha - 1), rel=TOL)


def test_property_a_examples(tp23):
    # equality on the power piece
    assert a_eval(tp23, 1.0) ** 2 == pytest.approx(1.0 * b_eval(tp23, 1.0), abs=TOL)
    # strict inequality on the linear piece: a^2 = 9 >= t*b = 5 at t = 1/4
    assert a_eval(tp23, 0.25) ** 2 == pytest.approx(9.0, abs=TOL)
    assert 0.25 * b_eval(tp23, 0.25) == pytest.approx(5.0, abs=TOL)


def test_verify_properties_k2_alpha3(tp23):
    report = verify_properties(tp23, exponents=(2.0, 3.0, 4.0))
    assert report.ok, report.violations
    assert report.max_c_deviation <= TOL
    assert report.min_a_margin >= -TOL
    assert report.max_power_equality_gap <= TOL
    assert all(np.isfinite(v) for v in report.growth_constants.values())
    doc = report.to_dict()
    assert doc["ok"] and doc["violations"] == []


@settings(max_examples=60, deadline=None)
@given(
    k=st.integers(1, 50),
    alpha=st.floats(3.0 + 1e-6, 12.0),
)
def test_properties_random_pairs(k, alpha):
    tp = TruncationPair(k=k, alpha=alpha, exponents=(2.0, 3.0, 4.0))
    samples = default_samples(tp, n=300)
    report = verify_properties(tp, samples)
    assert report.ok, report.violations


def test_monotone_limit_to_pure_power():
    # for fixed t > 0, b_k(t) increases to t^-alpha once 1/k < t
    alpha = 4.0
    t = 0.37
    prev = -np.inf
    for k in (1, 2, 4, 8, 16):
        val = b_eval(TruncationPair(k=k, alpha=alpha), t)
        assert val >= prev - 1e-15
        prev = val
    assert prev == pytest.approx(t ** -alpha, rel=TOL)
    # and the limit is attained exactly once the knot passes t
    assert b_eval(TruncationPair(k=3, alpha=alpha), t) == t ** -alpha


def test_growth_constant_matches_power_piece_closed_form():
    # on the power piece the normalized ratio is constant:
    # ((alpha-1)/2)^(2-p) + alpha^(1-p)
    tp = TruncationPair(k=3, alpha=5.0)
    t = np.geomspace(1 / 3, 50.0, 200)
    for p in (2.0, 3.0, 4.0):
        num = a_eval(tp, t) ** p * np.abs(a_prime(tp, t)) ** (2 - p) + b_eval(
            tp, t
        ) ** p * np.abs(b_prime(tp, t)) ** (1 - p)
        ratio = num / t ** (p - tp.alpha - 1)
        expected = ((tp.alpha - 1) / 2) ** (2 - p) + tp.alpha ** (1 - p)
        assert np.max(np.abs(ratio - expected)) <= 1e-10 * expected
