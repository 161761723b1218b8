"""Kinetics functions, parameter maps and manufactured cases."""

import numpy as np
import pytest

from rdmix.models import (
    ALIEV_PANFILOV_DEFAULTS,
    ALIEV_PANFILOV_ALT,
    CompetitionModel,
    aliev_panfilov,
    competition,
    fisher,
    manufactured_case,
    potential_map,
    time_map,
)

RNG = np.random.default_rng(19)


def test_fisher_fixed_points_and_value():
    assert fisher(0.0) == 0.0
    assert fisher(1.0) == 0.0
    assert fisher(0.5) == 0.25


def test_fisher_symmetry():
    m = RNG.random(10)
    assert np.allclose(fisher(m), fisher(1.0 - m), atol=1e-15)


PARAM3 = np.array([[1, 3, 3], [3, 1, 3], [3, 3, 1]], dtype=float)
PARAM_CYCLIC = np.array([[1, 2, 7], [7, 1, 2], [2, 7, 1]], dtype=float)


def test_competition_equilibria():
    assert np.allclose(competition(np.array([1.0, 0, 0]), PARAM3), 0.0)
    assert np.allclose(competition(np.array([0, 1.0, 0]), PARAM3), 0.0)
    assert np.allclose(competition(np.zeros(3), PARAM_CYCLIC), 0.0)


def test_competition_dimension_mismatch():
    with pytest.raises(ValueError):
        competition(np.array([1.0, 2.0]), PARAM3)


def test_competition_homogeneous_ode_converges_to_equilibrium():
    """Kinetics-only integration from (0.9, 0.05, 0.05) -> (1, 0, 0)."""
    m = np.array([0.9, 0.05, 0.05])
    dt = 0.01
    for _ in range(4000):   # RK4 on the pure ODE to t = 40
        k1 = competition(m, PARAM3)
        k2 = competition(m + dt / 2 * k1, PARAM3)
        k3 = competition(m + dt / 2 * k2, PARAM3)
        k4 = competition(m + dt * k3, PARAM3)
        m = m + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    assert np.abs(m - np.array([1.0, 0.0, 0.0])).max() < 1e-6


def test_aliev_panfilov_zeros():
    f, _ = aliev_panfilov(0.0, 0.7)
    assert f == 0.0
    f, _ = aliev_panfilov(1.0, 0.0)
    assert f == 0.0


@pytest.mark.parametrize("params", [
    ALIEV_PANFILOV_DEFAULTS,
    ALIEV_PANFILOV_ALT,
    dict(alpha=0.05, b=0.2, c=5.0, gamma=0.01, mu1=0.3, mu2=0.5),
    dict(alpha=0.1, b=0.5, c=1.0, gamma=0.1, mu1=1.0, mu2=2.0),
    dict(alpha=0.0, b=0.0, c=3.0, gamma=0.05, mu1=0.1, mu2=0.9),
])
def test_aliev_panfilov_recovery_factors(params):
    # dr/dt = [gamma + mu1 r/(mu2+m)] * [-r - c m (m - b - 1)]: each printed
    # factor vanishing forces the product to zero
    b, c = params["b"], params["c"]
    m = b + 1.0
    _, dr = aliev_panfilov(m, 0.0, params)   # r = 0 and m = b+1: both factors' terms
    assert dr == pytest.approx(0.0, abs=1e-14)
    # bracket zero: r = -c m (m - b - 1) at random m
    for m in RNG.random(3) * 0.8:
        r = -c * m * (m - b - 1.0)
        _, dr = aliev_panfilov(m, r, params)
        assert dr == pytest.approx(0.0, abs=1e-12)
    # prefactor zero: gamma + mu1 r/(mu2+m) = 0
    for m in RNG.random(3) * 0.8:
        r = -params["gamma"] * (params["mu2"] + m) / params["mu1"]
        _, dr = aliev_panfilov(m, r, params)
        assert dr == pytest.approx(0.0, abs=1e-12)


def test_aliev_panfilov_guard():
    with pytest.raises(ZeroDivisionError):
        aliev_panfilov(-ALIEV_PANFILOV_DEFAULTS["mu2"], 0.1)


def test_potential_and_time_maps():
    assert potential_map(0.0) == -80.0
    assert potential_map(1.0) == 20.0
    assert time_map(1.0) == 12.9


def test_smooth_case_values():
    case = manufactured_case("smooth")
    assert case.m(0.25, 0.25, 2.0) == pytest.approx(2.0)          # 1 + sin^2(pi/2)
    # the printed profile equals 1 on the boundary of [-1,1]^2
    assert case.m(1.0, 0.3, 5.0) == pytest.approx(1.0)
    assert case.m(-1.0, -0.7, 5.0) == pytest.approx(1.0)
    # ramp profile: m = t g before t_star, g afterwards
    assert case.m(0.25, 0.25, 0.5) == pytest.approx(1.0)


def test_bump_case_values():
    case = manufactured_case("bump", radius=0.75)
    assert case.m(0.0, 0.0, 5.0) == pytest.approx(1.0)
    assert case.m(0.75, 0.0, 5.0) == 0.0
    assert case.m(0.9, 0.2, 5.0) == 0.0
    assert np.isfinite(case.m(0.7499, 0.0, 5.0))


@pytest.mark.parametrize("name", ["smooth", "bump"])
def test_source_is_residual_of_exact_fields(name):
    """f = dm/dt + div(-D grad m), checked by finite differences."""
    case = manufactured_case(name, d=0.8)
    rng = np.random.default_rng(3)
    pts = rng.random((40, 2)) * 1.2 - 0.6
    ts = rng.random(40) * 3.0
    eps = 1e-5
    x, y = pts[:, 0], pts[:, 1]
    dm_dt = (case.m(x, y, ts + eps) - case.m(x, y, ts - eps)) / (2 * eps)
    hx1, _ = case.h(x + eps, y, ts)
    hx0, _ = case.h(x - eps, y, ts)
    _, hy1 = case.h(x, y + eps, ts)
    _, hy0 = case.h(x, y - eps, ts)
    div_h = (hx1 - hx0 + hy1 - hy0) / (2 * eps)
    f = case.source(x, y, ts)
    assert np.abs(dm_dt + div_h - f).max() < 1e-5


def test_flux_is_minus_D_grad_m():
    case = manufactured_case("smooth", d=0.8)
    eps = 1e-6
    x, y, t = 0.31, -0.42, 2.5
    gx = (case.m(x + eps, y, t) - case.m(x - eps, y, t)) / (2 * eps)
    gy = (case.m(x, y + eps, t) - case.m(x, y - eps, t)) / (2 * eps)
    hx, hy = case.h(x, y, t)
    assert hx == pytest.approx(-0.8 * gx, rel=1e-6)
    assert hy == pytest.approx(-0.8 * gy, rel=1e-6)


def test_unknown_case():
    with pytest.raises(ValueError):
        manufactured_case("mystery")


def test_models_are_pure():
    model = CompetitionModel(PARAM3)
    m = [RNG.random(5) for _ in range(3)]
    r1 = model.rates(m, None, 0.0, None, None)
    r2 = model.rates(m, None, 0.0, None, None)
    for a, b in zip(r1, r2):
        assert np.array_equal(a, b)
