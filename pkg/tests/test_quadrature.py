"""Quadrature rules against exact rational moments."""

from fractions import Fraction
from math import factorial

import numpy as np
import pytest

from rdmix.fespace import DEGREE_CAP, QuadratureError, quadrature_rule


def tri_moment(a, b):
    return Fraction(factorial(a) * factorial(b), factorial(a + b + 2))


def test_triangle_weight_sum():
    for deg in range(0, DEGREE_CAP + 1, 3):
        rule = quadrature_rule("triangle", deg)
        assert rule.weights.sum() == pytest.approx(0.5, abs=1e-14)
        assert rule.exact_degree >= deg


def test_segment_weight_sum():
    for deg in range(0, DEGREE_CAP + 1, 4):
        rule = quadrature_rule("segment", deg)
        assert rule.weights.sum() == pytest.approx(1.0, abs=1e-14)


def test_triangle_constant_and_linear():
    rule = quadrature_rule("triangle", 0)
    assert rule.weights.sum() == pytest.approx(0.5, abs=1e-15)
    rule = quadrature_rule("triangle", 1)
    x = rule.xy[:, 0]
    assert float(x @ rule.weights) == pytest.approx(1.0 / 6.0, abs=1e-15)


@pytest.mark.parametrize("degree", range(0, 13))
def test_triangle_exact_monomial_moments(degree):
    rule = quadrature_rule("triangle", degree)
    x, y = rule.xy[:, 0], rule.xy[:, 1]
    for a in range(degree + 1):
        for b in range(degree + 1 - a):
            got = float((x ** a * y ** b) @ rule.weights)
            want = float(tri_moment(a, b))
            assert got == pytest.approx(want, rel=1e-12, abs=1e-15)


def test_segment_exact_moments():
    for degree in range(0, 15):
        rule = quadrature_rule("segment", degree)
        for a in range(degree + 1):
            got = float((rule.points ** a) @ rule.weights)
            assert got == pytest.approx(1.0 / (a + 1), rel=1e-13)


def test_degree_cap_error_names_cap():
    with pytest.raises(QuadratureError, match=str(DEGREE_CAP)):
        quadrature_rule("triangle", DEGREE_CAP + 1)


def test_unknown_domain():
    with pytest.raises(QuadratureError):
        quadrature_rule("pentagon", 2)


def test_barycentric_points_valid():
    rule = quadrature_rule("triangle", 8)
    assert rule.points.shape[1] == 3
    assert np.all(rule.points > 0)
    assert np.allclose(rule.points.sum(axis=1), 1.0)
