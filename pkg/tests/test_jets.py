import math
import random

import numpy as np
import pytest

from pslet2d.expressions import (
    PotentialEvalError,
    bind_params,
    parse_potential,
)
from pslet2d.jets import Jet, derivative, jet_lift


def _bound(text, params=None):
    return bind_params(parse_potential(text), params or {})


def test_coulomb_jet_at_quarter():
    jet = jet_lift(_bound("-2/rho"), 0.25, 3)
    assert jet.coeffs == pytest.approx([-8.0, 32.0, -128.0, 512.0], rel=1e-14)
    assert derivative(jet, 2) == pytest.approx(-256.0, rel=1e-14)


def test_polynomial_jet_truncates_exactly():
    jet = jet_lift(_bound("rho^2"), 2.0, 3)
    assert jet.coeffs == pytest.approx([4.0, 4.0, 1.0, 0.0], abs=1e-15)


def test_hybrid_jet():
    jet = jet_lift(_bound("m*g - 2/rho + g^2*rho^2/4", {"m": 0.0, "g": 1.0}), 1.0, 2)
    assert jet.coeffs == pytest.approx([-1.75, 2.5, -1.75], rel=1e-14)


def test_derivative_range_checked():
    jet = jet_lift(_bound("-2/rho"), 1.0, 3)
    with pytest.raises(IndexError):
        derivative(jet, 4)
    with pytest.raises(IndexError):
        derivative(jet, -1)
    assert derivative(jet, 0) == pytest.approx(-2.0)


def test_center_must_be_positive():
    with pytest.raises(PotentialEvalError):
        jet_lift(_bound("-2/rho"), 0.0, 2)
    with pytest.raises(PotentialEvalError):
        jet_lift(_bound("-2/rho"), -1.0, 2)


def test_zeroth_coefficient_matches_eval():
    rng = random.Random(11)
    bound = _bound("-a/rho + b*rho^2 + c*rho", {"a": 1.5, "b": 0.3, "c": 0.7})
    for _ in range(10):
        c = rng.uniform(0.2, 5.0)
        jet = jet_lift(bound, c, 4)
        assert jet.coeffs[0] == pytest.approx(bound(c), rel=1e-14)


def test_polynomial_reexpansion_matches_binomial():
    # shifting a polynomial's expansion point is exact binomial re-expansion
    rng = random.Random(99)
    for _ in range(20):
        coeffs = [rng.uniform(-2, 2) for _ in range(5)]  # c0 + c1 rho + ... + c4 rho^4
        text = " + ".join(f"({c})*rho^{k}" for k, c in enumerate(coeffs) if k > 0)
        text += f" + ({coeffs[0]})*rho^1/rho"  # keep c0 while still mentioning rho
        bound = _bound(text)
        center = rng.uniform(0.5, 3.0)
        jet = jet_lift(bound, center, 4)
        p = np.polynomial.Polynomial(coeffs)
        expected = [p.deriv(k)(center) / math.factorial(k) for k in range(5)]
        assert jet.coeffs == pytest.approx(expected, rel=1e-12, abs=1e-12)


def test_leibniz_product_rule():
    # jet of a product equals the convolution of the factor jets
    f = _bound("-2/rho")
    g = _bound("rho^2/4 + rho")
    fg = _bound("(-2/rho)*(rho^2/4 + rho)")
    center, order = 1.3, 6
    jf = jet_lift(f, center, order).coeffs
    jg = jet_lift(g, center, order).coeffs
    jfg = jet_lift(fg, center, order).coeffs
    assert jfg == pytest.approx(np.convolve(jf, jg)[: order + 1], rel=1e-13)


def _fd_derivative(bound, rho, k, h):
    """Central finite difference of order k, Richardson-extrapolated twice.

    Evaluations run in extended precision so the comparison is limited by
    truncation error rather than cancellation in the high-order stencils.
    """
    rho = np.longdouble(rho)
    h = np.longdouble(h)

    def diff(step):
        if k == 1:
            return (bound(rho + step) - bound(rho - step)) / (2 * step)
        if k == 2:
            return (bound(rho + step) - 2 * bound(rho) + bound(rho - step)) / step**2
        if k == 3:
            return (
                bound(rho + 2 * step)
                - 2 * bound(rho + step)
                + 2 * bound(rho - step)
                - bound(rho - 2 * step)
            ) / (2 * step**3)
        if k == 4:
            return (
                bound(rho + 2 * step)
                - 4 * bound(rho + step)
                + 6 * bound(rho)
                - 4 * bound(rho - step)
                + bound(rho - 2 * step)
            ) / step**4
        raise ValueError(k)

    # two Richardson levels: cancel the O(h^2) and O(h^4) errors
    d1, d2, d4 = diff(h), diff(h / 2), diff(h / 4)
    r1 = d2 + (d2 - d1) / 3.0
    r2 = d4 + (d4 - d2) / 3.0
    return r2 + (r2 - r1) / 15.0


def test_against_finite_differences_random_corpus():
    rng = random.Random(20240601)
    corpus = [
        ("-a/rho + b*rho^2 + c*rho", lambda: {"a": rng.uniform(0.5, 3),
                                              "b": rng.uniform(0.1, 1),
                                              "c": rng.uniform(0.1, 1)}),
        ("a*rho^3 - b/rho^2", lambda: {"a": rng.uniform(0.1, 1),
                                       "b": rng.uniform(0.5, 2)}),
        ("a*rho^1.5 + b*rho", lambda: {"a": rng.uniform(0.5, 2),
                                       "b": rng.uniform(0.1, 1)}),
    ]
    for text, draw in corpus:
        for _ in range(4):
            bound = _bound(text, draw())
            rho = rng.uniform(1.0, 2.5)
            jet = jet_lift(bound, rho, 4)
            for k in range(1, 5):
                exact = derivative(jet, k)
                approx = _fd_derivative(bound, rho, k, h=1e-2 * (1 + k))
                scale = max(1.0, abs(exact))
                assert abs(approx - exact) / scale < 1e-7, (text, k)


def test_pole_inside_series_division():
    with pytest.raises(PotentialEvalError):
        jet_lift(_bound("1/(rho - 1)"), 1.0, 3)


def test_real_power_jet():
    jet = jet_lift(_bound("rho^0.5"), 4.0, 3)
    # d/drho sqrt: 1/(2 sqrt), -1/(4 rho^1.5), 3/(8 rho^2.5)
    assert derivative(jet, 0) == pytest.approx(2.0)
    assert derivative(jet, 1) == pytest.approx(0.25)
    assert derivative(jet, 2) == pytest.approx(-1.0 / 32.0)
    assert derivative(jet, 3) == pytest.approx(3.0 / 256.0)


def test_jet_dataclass_basics():
    jet = Jet(center=1.0, coeffs=[1.0, 2.0, 3.0])
    assert jet.order == 2
    assert len(jet) == 3
