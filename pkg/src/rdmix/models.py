"""Reaction kinetics and manufactured solutions.

Kinetics are pure pointwise functions; model classes bundle them with
species/internal-state metadata for the time stepper. Manufactured cases
carry the exact fields and the source f = dm/dt + div h (h = -D grad m),
which is what the mass balance requires of a residual-built source.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


# ---------------------------------------------------------------------------
# pointwise kinetics
# ---------------------------------------------------------------------------

def fisher(m):
    """Logistic reaction rate m (1 - m)."""
    return m * (1.0 - m)


def competition(m, A):
    """Lotka-Volterra competition rates f_i = m_i (1 - sum_j a_ij m_j)."""
    m = np.asarray(m, dtype=float)
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n) or m.shape[0] != n:
        raise ValueError("interaction matrix must be n x n matching m")
    return m * (1.0 - np.einsum("ij,j...->i...", A, m))


ALIEV_PANFILOV_DEFAULTS = dict(alpha=0.01, b=0.15, c=8.0, gamma=0.002,
                               mu1=0.2, mu2=0.3)
# alternative published parameter set, kept selectable
ALIEV_PANFILOV_ALT = dict(alpha=0.01, b=1.0, c=2.0, gamma=0.01,
                          mu1=7.0, mu2=7.0)


def aliev_panfilov(m, r, params=None):
    """Excitation rate and recovery ODE right-hand side.

    f(m, r) = c m (m - alpha)(1 - m) - r m
    dr/dtau = [gamma + mu1 r / (mu2 + m)] [-r - c m (m - b - 1)]
    """
    p = dict(ALIEV_PANFILOV_DEFAULTS if params is None else params)
    m = np.asarray(m, dtype=float)
    r = np.asarray(r, dtype=float)
    denom = p["mu2"] + m
    if np.any(denom == 0.0):
        raise ZeroDivisionError("mu2 + m vanished in recovery kinetics")
    f = p["c"] * m * (m - p["alpha"]) * (1.0 - m) - r * m
    drdt = (p["gamma"] + p["mu1"] * r / denom) * (-r - p["c"] * m * (m - p["b"] - 1.0))
    return f, drdt


def potential_map(m):
    """Nondimensional activation to transmembrane potential [mV]."""
    return 100.0 * np.asarray(m, dtype=float) - 80.0


def time_map(tau):
    """Nondimensional time to milliseconds."""
    return 12.9 * np.asarray(tau, dtype=float)


# ---------------------------------------------------------------------------
# model classes consumed by the stepper
# ---------------------------------------------------------------------------

class KineticsModel:
    """Pointwise reaction model: n_species rate fields, optional internal state."""

    n_species = 1
    n_internal = 0

    def rates(self, ms, internal, t, x, y):
        raise NotImplementedError

    def internal_rhs(self, ms, internal, t):
        raise NotImplementedError


class ZeroKinetics(KineticsModel):
    def __init__(self, n_species=1):
        self.n_species = n_species

    def rates(self, ms, internal, t, x, y):
        return [np.zeros_like(m) for m in ms]


class FisherModel(KineticsModel):
    def rates(self, ms, internal, t, x, y):
        return [fisher(ms[0])]


class CompetitionModel(KineticsModel):
    def __init__(self, A):
        self.A = np.asarray(A, dtype=float)
        self.n_species = self.A.shape[0]

    def rates(self, ms, internal, t, x, y):
        out = competition(np.stack(ms), self.A)
        return [out[i] for i in range(self.n_species)]


class AlievPanfilovModel(KineticsModel):
    """Single excitation species plus one recovery variable."""

    n_internal = 1

    def __init__(self, params=None):
        self.params = dict(ALIEV_PANFILOV_DEFAULTS if params is None else params)

    def rates(self, ms, internal, t, x, y):
        f, _ = aliev_panfilov(ms[0], internal, self.params)
        return [f]

    def internal_rhs(self, ms, internal, t):
        _, drdt = aliev_panfilov(ms[0], internal, self.params)
        return drdt


@dataclass(frozen=True)
class Stimulus:
    """Time-gated additive source on an axis-aligned box."""
    species: int
    magnitude: float
    t_on: float
    t_off: float
    box: tuple        # (x0, y0, x1, y1)

    def __call__(self, t, x, y):
        if not (self.t_on <= t <= self.t_off):
            return 0.0
        x0, y0, x1, y1 = self.box
        return self.magnitude * ((x > x0) & (x < x1) & (y > y0) & (y < y1))


class StimulatedModel(KineticsModel):
    def __init__(self, base: KineticsModel, stimuli):
        self.base = base
        self.stimuli = list(stimuli)
        self.n_species = base.n_species
        self.n_internal = base.n_internal

    def rates(self, ms, internal, t, x, y):
        out = self.base.rates(ms, internal, t, x, y)
        for st in self.stimuli:
            out[st.species] = out[st.species] + st(t, x, y)
        return out

    def internal_rhs(self, ms, internal, t):
        return self.base.internal_rhs(ms, internal, t)


class SourceModel(KineticsModel):
    """Manufactured right-hand side f(x, y, t); no dependence on the state."""

    def __init__(self, source):
        self.source = source

    def rates(self, ms, internal, t, x, y):
        return [np.broadcast_to(np.asarray(self.source(x, y, t), dtype=float),
                                np.shape(x)).copy()]


# ---------------------------------------------------------------------------
# manufactured solutions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ManufacturedCase:
    name: str
    d: float                      # isotropic diffusivity
    m: object                     # m(x, y, t)
    h: object                     # flux (hx, hy)(x, y, t) = -d grad m
    div_h: object
    source: object                # f = dm/dt + div h
    t_star: float = 1.0

    def model(self) -> SourceModel:
        return SourceModel(self.source)


def _time_profile(kind: str, t_star: float):
    """theta(t), theta'(t); 'ramp' is t until t_star then 1 (right-continuous)."""
    if kind == "ramp":
        def theta(t):
            return np.where(np.asarray(t, dtype=float) < t_star, t, 1.0)

        def dtheta(t):
            return np.where(np.asarray(t, dtype=float) < t_star, 1.0, 0.0)
    elif kind == "sine":
        def theta(t):
            return 1.0 + 0.5 * np.sin(np.asarray(t, dtype=float))

        def dtheta(t):
            return 0.5 * np.cos(np.asarray(t, dtype=float))
    else:
        raise ValueError(f"unknown time profile {kind!r}")
    return theta, dtheta


def manufactured_case(name: str, d: float = 1.0, t_star: float = 1.0,
                      radius: float = 0.75, profile: str | None = None,
                      degree: int = 2) -> ManufacturedCase:
    """Exact solution families: 'smooth', 'bump', and 'poly'.

    profile defaults to the ramp-then-hold switch at t_star ('ramp') for
    smooth/bump and to 'steady' for poly; 'sine' gives a genuinely
    nonlinear-in-time solution for temporal order studies.
    """
    if name == "smooth":
        two_pi = 2.0 * np.pi

        def g(x, y):
            return 1.0 + np.sin(two_pi * x) * np.sin(two_pi * y)

        def gx(x, y):
            return two_pi * np.cos(two_pi * x) * np.sin(two_pi * y)

        def gy(x, y):
            return two_pi * np.sin(two_pi * x) * np.cos(two_pi * y)

        def lap_g(x, y):
            return -2.0 * two_pi ** 2 * np.sin(two_pi * x) * np.sin(two_pi * y)

    elif name == "bump":
        r2 = radius * radius

        def _parts(x, y):
            s = x * x + y * y
            inside = s < r2 - 1e-12
            den = np.where(inside, r2 - s, 1.0)
            val = np.where(inside, np.exp(-s / den), 0.0)
            fp = np.where(inside, -r2 / den ** 2, 0.0)
            fpp = np.where(inside, -2.0 * r2 / den ** 3, 0.0)
            return val, fp, fpp

        def g(x, y):
            return _parts(x, y)[0]

        def gx(x, y):
            v, fp, _ = _parts(x, y)
            return v * fp * 2.0 * x

        def gy(x, y):
            v, fp, _ = _parts(x, y)
            return v * fp * 2.0 * y

        def lap_g(x, y):
            v, fp, fpp = _parts(x, y)
            s = x * x + y * y
            return 4.0 * v * fp + 4.0 * s * v * (fp * fp + fpp)

    elif name == "poly":
        k = int(degree)

        def g(x, y):
            return (0.25 + 0.5 * x + y) ** k

        def gx(x, y):
            return 0.5 * k * (0.25 + 0.5 * x + y) ** (k - 1)

        def gy(x, y):
            return k * (0.25 + 0.5 * x + y) ** (k - 1)

        def lap_g(x, y):
            if k < 2:
                return np.zeros_like(np.asarray(x, dtype=float))
            return 1.25 * k * (k - 1) * (0.25 + 0.5 * x + y) ** (k - 2)

    else:
        raise ValueError(f"unknown manufactured case {name!r}")

    if profile is None:
        profile = "steady" if name == "poly" else "ramp"
    if profile == "steady":
        def theta(t):
            return np.ones_like(np.asarray(t, dtype=float))

        def dtheta(t):
            return np.zeros_like(np.asarray(t, dtype=float))
    else:
        theta, dtheta = _time_profile(profile, t_star)

    def m(x, y, t):
        return theta(t) * g(x, y)

    def h(x, y, t):
        th = theta(t)
        return -d * th * gx(x, y), -d * th * gy(x, y)

    def div_h(x, y, t):
        return -d * theta(t) * lap_g(x, y)

    def source(x, y, t):
        return dtheta(t) * g(x, y) + div_h(x, y, t)

    return ManufacturedCase(name, d, m, h, div_h, source, t_star)
