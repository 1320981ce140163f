import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from airypng.special import (airy_ai, airy_ai_prime, airy_ai_second,
                             airy_ai_aip_vec, gauss_legendre,
                             _DOUBLE_SWITCH, _EXACT_SWITCH)
from airypng.errors import DomainError

from oracles import airy_series_oracle, airy_first_zero


def test_ai_at_zero():
    assert airy_ai(0.0) == pytest.approx(0.3550280538878172, abs=1e-15)
    assert airy_ai_prime(0.0) == pytest.approx(-0.2588194037928068, abs=1e-15)


def test_ai_at_five():
    assert airy_ai(5.0) == pytest.approx(1.0834442813607441e-4, abs=1e-12)


def test_airy_ode_residual_spot():
    x = 1.5
    assert abs(airy_ai_second(x) - x * airy_ai(x)) < 1e-10


def test_first_zero_of_ai():
    z = airy_first_zero()
    assert z == pytest.approx(-2.338107410459767, abs=1e-12)
    assert abs(airy_ai(z)) < 1e-10
    assert airy_ai_prime(z) == pytest.approx(0.7012, abs=1e-3)


def test_derivative_matches_central_difference():
    h = 1e-5
    approx = (airy_ai(1.0 + h) - airy_ai(1.0 - h)) / (2 * h)
    assert abs(approx - airy_ai_prime(1.0)) < 1e-8


def test_scalar_accuracy_against_series_oracle():
    for x in np.linspace(-20.0, 10.0, 61):
        assert airy_ai(float(x)) == pytest.approx(
            airy_series_oracle(float(x)), abs=1e-12)
        assert airy_ai_prime(float(x)) == pytest.approx(
            airy_series_oracle(float(x), derivative=1), abs=1e-11)


def test_scalar_accuracy_outer_range():
    for x in (-55.0, -40.0, -25.0, 15.0, 25.0, 39.0):
        assert airy_ai(x) == pytest.approx(airy_series_oracle(x), abs=1e-10)


def test_scipy_cross_check():
    sp = pytest.importorskip("scipy.special")
    xs = np.linspace(-30.0, 20.0, 101)
    ai_ref = sp.airy(xs)[0]
    ours = np.array([airy_ai(float(x)) for x in xs])
    assert np.max(np.abs(ours - ai_ref)) < 1e-11


def test_out_of_range_raises():
    with pytest.raises(DomainError):
        airy_ai(-61.0)
    with pytest.raises(DomainError):
        airy_ai_prime(41.0)


def test_ode_residual_random_window():
    rng = np.random.default_rng(7)
    for x in rng.uniform(-15.0, 8.0, 200):
        resid = airy_ai_second(float(x)) - x * airy_ai(float(x))
        assert abs(resid) < 1e-9, x


def test_branch_joint_continuity():
    # the branch representations themselves, evaluated at the switch points
    from airypng.special import (_series_double, _series_exact, _ai_asym_pos,
                                 _ai_asym_neg, AI_AT_ZERO, AIP_AT_ZERO,
                                 _AI0_FRAC, _AIP0_FRAC)

    def via_double(x):
        f, g, _fp, _gp = _series_double(x)
        return AI_AT_ZERO * f + AIP_AT_ZERO * g

    def via_exact(x):
        f, g, _fp, _gp = _series_exact(x)
        return float(_AI0_FRAC * f + _AIP0_FRAC * g)

    def via_asym(x):
        return (_ai_asym_pos(x) if x > 0 else _ai_asym_neg(x))[0]

    for x0 in (_DOUBLE_SWITCH, -_DOUBLE_SWITCH):
        assert abs(via_double(x0) - via_exact(x0)) < 1e-11
    for x0 in (_EXACT_SWITCH, -_EXACT_SWITCH):
        assert abs(via_exact(x0) - via_asym(x0)) < 1e-11


def test_positive_axis_monotone_decay():
    xs = np.arange(0.0, 20.0 + 1e-9, 1e-2)
    vals = np.array([airy_ai(float(x)) for x in xs])
    assert np.all(vals > 0)
    assert np.all(np.diff(vals) < 0)


def test_vectorised_matches_scalar():
    xs = np.linspace(-12.0, 12.0, 400)
    ai, aip = airy_ai_aip_vec(xs)
    for i in (0, 57, 199, 280, 399):
        assert ai[i] == pytest.approx(airy_ai(float(xs[i])), abs=5e-11)
        assert aip[i] == pytest.approx(airy_ai_prime(float(xs[i])), abs=5e-11)


# ---------------------------------------------------------------------------
# Quadrature rules.
# ---------------------------------------------------------------------------

def test_single_node_rule_is_midpoint():
    rule = gauss_legendre(1, -1.0, 1.0)
    assert rule.nodes[0] == pytest.approx(0.0, abs=1e-15)
    assert rule.weights[0] == pytest.approx(2.0, abs=1e-15)


def test_degree_nine_monomial():
    rule = gauss_legendre(5, 0.0, 1.0)
    assert np.dot(rule.weights, rule.nodes ** 9) == pytest.approx(0.1,
                                                                  abs=1e-14)


def test_exponential_integral():
    rule = gauss_legendre(40, 0.0, 20.0)
    val = np.dot(rule.weights, np.exp(-rule.nodes))
    assert val == pytest.approx(1.0 - math.exp(-20.0), abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(n=st.integers(1, 40),
       a=st.floats(-5, 4.5), width=st.floats(0.1, 10))
def test_rule_invariants(n, a, width):
    rule = gauss_legendre(n, a, a + width)
    assert np.all(rule.weights > 0)
    assert np.all(np.diff(rule.nodes) > 0)
    assert rule.nodes[0] > a and rule.nodes[-1] < a + width
    assert np.sum(rule.weights) == pytest.approx(width, abs=1e-13)
    for k in range(0, 2 * n, max(1, (2 * n) // 6)):
        exact = ((a + width) ** (k + 1) - a ** (k + 1)) / (k + 1)
        got = float(np.dot(rule.weights, rule.nodes ** k))
        assert got == pytest.approx(exact, rel=1e-12, abs=1e-13)


def test_rule_preconditions():
    with pytest.raises(DomainError):
        gauss_legendre(0, 0, 1)
    with pytest.raises(DomainError):
        gauss_legendre(4, 1.0, 1.0)
