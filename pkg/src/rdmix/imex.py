"""IMEX multistep time integration.

Each step solves the implicit flux/mass block system at the new time
with the reaction term extrapolated from stored history. The scheme
tables are kept as exact rationals; the shift sigma = alpha_r/(dt beta_r)
scales the mass block.

Sign bookkeeping: the assembled block system is

    [ K    B  ] [H]   [-F~]
    [ B^T -sM ] [m] = [-G~]

where F~ and G~ are the natural-boundary moments and the history
combination as assembled (assemble_F / assemble_G); the negations make
both block rows equal the discrete weak equations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.sparse.linalg as spla

from .assembly import (
    Discretization,
    assemble_F,
    assemble_G,
    essential_flux_values,
)
from .linalg import BlockSolver, SolverError
from .models import KineticsModel

BLOWUP_CAP = 1e6


class SchemeError(ValueError):
    pass


@dataclass(frozen=True)
class IMEXCoefficients:
    name: str
    r: int
    alpha: tuple          # Fractions, length r+1
    beta: tuple           # Fractions, length r+1
    gamma: tuple          # Fractions, length r
    order: int

    def __post_init__(self):
        if self.beta[self.r] == 0:
            raise SchemeError("implicit weight beta_r must be nonzero")
        if sum(self.alpha, Fraction(0)) != 0:
            raise SchemeError(f"{self.name}: alpha coefficients must sum to zero")
        if sum(self.gamma, Fraction(0)) != sum(self.beta, Fraction(0)):
            raise SchemeError(
                f"{self.name}: extrapolation weights must reproduce the "
                "implicit quadrature (sum gamma = sum beta)"
            )


_F = Fraction
_TABLES = {
    "bdf2": IMEXCoefficients(
        "bdf2", 2,
        (_F(1, 2), _F(-2), _F(3, 2)),
        (_F(0), _F(0), _F(1)),
        (_F(-1), _F(2)),
        order=2,
    ),
    "bdf3": IMEXCoefficients(
        "bdf3", 3,
        (_F(1, 24), _F(-1, 8), _F(-7, 8), _F(23, 24)),
        (_F(1, 16), _F(-5, 16), _F(15, 16), _F(5, 16)),
        (_F(3, 8), _F(-5, 4), _F(15, 8)),
        order=3,
    ),
    "cnab": IMEXCoefficients(
        "cnab", 2,
        (_F(0), _F(-1), _F(1)),
        (_F(0), _F(1, 2), _F(1, 2)),
        (_F(-1, 2), _F(3, 2)),
        order=2,
    ),
    "ark2": IMEXCoefficients(
        "ark2", 2,
        (_F(-1), _F(0), _F(1)),
        (_F(1), _F(0), _F(1)),
        (_F(0), _F(2)),
        order=2,
    ),
    # one-step implicit/explicit Euler pair used to bootstrap multistep history
    "euler": IMEXCoefficients(
        "euler", 1,
        (_F(-1), _F(1)),
        (_F(0), _F(1)),
        (_F(1),),
        order=1,
    ),
}


def scheme_coefficients(name: str) -> IMEXCoefficients:
    try:
        return _TABLES[name]
    except KeyError as exc:
        raise SchemeError(f"unknown IMEX scheme {name!r}") from exc


def shift(coeffs: IMEXCoefficients, dt: float) -> float:
    """sigma = alpha_r / (dt * beta_r)."""
    if dt <= 0:
        raise SchemeError("time step must be positive")
    return float(coeffs.alpha[coeffs.r] / coeffs.beta[coeffs.r]) / dt


@dataclass
class HistoryLevel:
    t: float
    m: list                  # per-species mass dof vectors
    h: list                  # per-species flux dof vectors
    f: list                  # per-species per-group quadrature values of f


@dataclass
class SimState:
    time: float
    levels: list = field(default_factory=list)   # oldest..newest, length r
    internal: list = None                        # per-group arrays or None

    @property
    def current(self) -> HistoryLevel:
        return self.levels[-1]

    def validate(self):
        ts = [lev.t for lev in self.levels]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise SchemeError("history time stamps must be strictly increasing")


class TimeStepper:
    """Drives one reaction-diffusion system on a fixed discretization.

    Rebuilt (via `rebuild`) whenever the order map changes; linear
    solvers are cached per shift so repeated steps reuse factorizations.
    """

    def __init__(self, discs, model: KineticsModel, scheme: str, dt: float, *,
                 mbar=None, gamma_n_edges=None, hbar_by_tag=None,
                 method="direct", tol=1e-10, blowup_cap=BLOWUP_CAP):
        self.discs = list(discs) if isinstance(discs, (list, tuple)) else [discs]
        if len(self.discs) != model.n_species:
            if len(self.discs) == 1:
                self.discs = self.discs * model.n_species
            else:
                raise SchemeError("one discretization per species required")
        self.model = model
        self.coeffs = scheme_coefficients(scheme)
        self.dt = float(dt)
        self.mbar = mbar if isinstance(mbar, (list, tuple)) else [mbar] * model.n_species
        self.gamma_n_edges = (np.empty(0, dtype=int) if gamma_n_edges is None
                              else np.asarray(gamma_n_edges, dtype=int))
        self.hbar_by_tag = hbar_by_tag or {}
        self.method = method
        self.tol = tol
        self.blowup_cap = blowup_cap
        self.dofmap = self.discs[0].dofmap
        self._matrices = []
        for i, disc in enumerate(self.discs):
            if i and disc is self.discs[0]:
                self._matrices.append(self._matrices[0])
                continue
            K, B, M = disc.assemble_kbm()
            self._matrices.append((K, B, M))
        self._solvers = {}
        self._k_flux_lu = None
        self.bc_dofs, self.bc_values = essential_flux_values(
            self.discs[0], self.hbar_by_tag, t=0.0)

    @property
    def n_species(self):
        return self.model.n_species

    def matrices(self, i):
        return self._matrices[i]

    def _solver(self, i, sigma) -> BlockSolver:
        key = (i, round(math.log(sigma), 12))
        if key not in self._solvers:
            K, B, M = self._matrices[i]
            self._solvers[key] = BlockSolver(
                K, B, M, sigma, self.discs[i].mass_slices(),
                method=self.method, tol=self.tol,
                fixed_dofs=self.bc_dofs, fixed_values=self.bc_values)
        return self._solvers[key]

    # -- initialization ------------------------------------------------------

    def initial_state(self, m0_fns, t0=0.0, internal0=None) -> SimState:
        """Project initial data and solve the flux equation at t0."""
        ms, hs = [], []
        for i in range(self.n_species):
            disc = self.discs[i]
            m0 = m0_fns[i]
            m_vec = (np.asarray(m0, dtype=float) if isinstance(m0, np.ndarray)
                     else disc.project_mass(m0))
            hs.append(self._flux_from_mass(i, m_vec, t0))
            ms.append(m_vec)
        internal = None
        if self.model.n_internal:
            disc = self.discs[0]
            if internal0 is None:
                internal = disc.zeros_quad()
            elif callable(internal0):
                internal = disc.eval_at_quad(internal0)
            else:
                internal = internal0
        f = self._eval_kinetics(ms, internal, t0)
        state = SimState(t0, [HistoryLevel(t0, ms, hs, f)], internal)
        return state

    def _flux_from_mass(self, i, m_vec, t):
        """Solve the implicit flux equation K H + B m = -F~ for H."""
        disc = self.discs[i]
        K, B, _ = self._matrices[i]
        F = np.zeros(self.dofmap.n_flux)
        if self.gamma_n_edges.size and self.mbar[i] is not None:
            F = assemble_F(disc, self.mbar[i], self.gamma_n_edges, t)
        rhs = -F - B @ m_vec
        fixed, vals = self.bc_dofs, self.bc_values
        free = np.ones(self.dofmap.n_flux, dtype=bool)
        free[fixed] = False
        free = np.nonzero(free)[0]
        Kc = K.tocsc()
        if self._k_flux_lu is None or self._k_flux_lu[0] != i:
            self._k_flux_lu = (i, spla.splu(Kc[free][:, free]))
        rhs_f = rhs[free] - Kc[free][:, fixed] @ vals
        H = np.empty(self.dofmap.n_flux)
        H[free] = self._k_flux_lu[1].solve(rhs_f)
        H[fixed] = vals
        return H

    def _eval_kinetics(self, ms, internal, t):
        """Per-species per-group pointwise kinetics at quadrature points."""
        disc = self.discs[0]
        ms_quad = [disc.mass_at_quad(m) for m in ms]
        out = [[] for _ in range(self.n_species)]
        for gi, g in enumerate(disc.groups):
            x, y = g.phys[..., 0], g.phys[..., 1]
            mg = [mq[gi] for mq in ms_quad]
            ig = internal[gi] if internal is not None else None
            rates = self.model.rates(mg, ig, t, x, y)
            for s in range(self.n_species):
                out[s].append(np.asarray(rates[s], dtype=float))
        return out

    def _advance_internal(self, internal, ms_old, ms_new, t, dt, n_sub=4):
        """Explicit midpoint sub-steps of the internal-state ODE."""
        disc = self.discs[0]
        mo = [disc.mass_at_quad(m) for m in ms_old]
        mn = [disc.mass_at_quad(m) for m in ms_new]
        out = []
        for gi in range(len(disc.groups)):
            r = internal[gi].copy()
            dsub = dt / n_sub
            for step in range(n_sub):
                tau0 = step / n_sub
                tau_half = (step + 0.5) / n_sub
                m0 = [(1 - tau0) * mo[s][gi] + tau0 * mn[s][gi]
                      for s in range(self.n_species)]
                mh = [(1 - tau_half) * mo[s][gi] + tau_half * mn[s][gi]
                      for s in range(self.n_species)]
                k1 = self.model.internal_rhs(m0, r, t + tau0 * dt)
                k2 = self.model.internal_rhs(mh, r + 0.5 * dsub * k1,
                                             t + tau_half * dt)
                r = r + dsub * k2
            out.append(r)
        return out

    # -- stepping ------------------------------------------------------------

    def step(self, state: SimState, coeffs=None, dt=None) -> SimState:
        """Advance one step; returns a new SimState (history rotated)."""
        coeffs = coeffs or self.coeffs
        dt = dt or self.dt
        r = coeffs.r
        if len(state.levels) < r:
            raise SchemeError(
                f"scheme {coeffs.name} needs {r} history levels, "
                f"have {len(state.levels)}")
        levels = state.levels[-r:]
        t_new = state.time + dt
        sigma = shift(coeffs, dt)
        ms_new, hs_new = [], []
        for i in range(self.n_species):
            disc = self.discs[i]
            K, B, M = self._matrices[i]
            G = assemble_G(disc, B, M, coeffs, dt,
                           [lev.m[i] for lev in levels],
                           [lev.h[i] for lev in levels],
                           [lev.f[i] for lev in levels])
            F = np.zeros(self.dofmap.n_flux)
            if self.gamma_n_edges.size and self.mbar[i] is not None:
                F = assemble_F(disc, self.mbar[i], self.gamma_n_edges, t_new)
            solver = self._solver(i, sigma)
            H, m = solver.solve(-F, -G)
            if not np.isfinite(m).all() or np.abs(m).max() > self.blowup_cap:
                raise SolverError(f"solution blow-up at t = {t_new:.6g}")
            r1, r2 = solver.residuals(H, m, -F, -G)
            scale = np.linalg.norm(F) + np.linalg.norm(G)
            if scale > 0 and max(r1, r2) > 1e-8 * scale:
                raise SolverError(
                    f"block residuals {r1:.3e}/{r2:.3e} above 1e-8 of rhs "
                    f"scale at t = {t_new:.6g} (species {i})")
            ms_new.append(m)
            hs_new.append(H)
        internal = state.internal
        if self.model.n_internal:
            internal = self._advance_internal(
                internal, state.current.m, ms_new, state.time, dt)
        f_new = self._eval_kinetics(ms_new, internal, t_new)
        # keep one level beyond the scheme's reach so the error estimator
        # can rebuild the right-hand-side density of the step just taken
        keep = self.coeffs.r + 1
        new_levels = list(state.levels) + [HistoryLevel(t_new, ms_new, hs_new, f_new)]
        new_state = SimState(t_new, new_levels[-keep:], internal)
        new_state.validate()
        return new_state

    def bootstrap(self, state: SimState) -> SimState:
        """Fill multistep history with sub-stepped Euler-pair levels.

        Sub-step count grows like 0.4/dt so the first-order start decays
        one order faster than the scheme's formal accuracy.
        """
        r = self.coeffs.r
        if len(state.levels) >= r:
            return state
        euler = scheme_coefficients("euler")
        n_sub = max(4, math.ceil(0.4 / self.dt))
        sub_dt = self.dt / n_sub
        while len(state.levels) < r:
            target = state.levels[0].t + len(state.levels) * self.dt
            sub = SimState(state.time, [state.current], state.internal)
            for _ in range(n_sub):
                sub = self.step(sub, coeffs=euler, dt=sub_dt)
            if abs(sub.time - target) > 1e-9 * max(1.0, abs(target)):
                raise SchemeError("bootstrap sub-stepping drifted off the grid")
            lev = HistoryLevel(target, sub.current.m, sub.current.h, sub.current.f)
            state = SimState(target, state.levels + [lev], sub.internal)
        state.validate()
        return state


def local_conservation_residual(disc, coeffs, dt, state, species=0):
    """Per-element residual of the discrete mass balance tested with the
    element indicator, relative to the largest participating term.

    Requires the extra shadow history level kept by the stepper (the
    level consumed by the step that produced the newest solution).
    """
    r = coeffs.r
    levels = state.levels[-(r + 1):]
    if len(levels) < r + 1:
        raise SchemeError("conservation check needs a full stepped history")
    nt = disc.mesh.n_elements
    resid = np.zeros(nt)
    scale = np.zeros(nt)
    for j, lev in enumerate(levels):
        alpha = float(coeffs.alpha[j]) / dt
        beta = float(coeffs.beta[j])
        gamma = float(coeffs.gamma[j]) if j < r else 0.0
        int_m = disc.integrate_elementwise(disc.mass_at_quad(lev.m[species]))
        int_dh = disc.integrate_elementwise(disc.flux_div_at_quad(lev.h[species]))
        int_f = disc.integrate_elementwise(lev.f[species]) if j < r else 0.0
        resid += alpha * int_m + beta * int_dh - gamma * int_f
        scale = np.maximum(scale, np.abs(alpha * int_m))
        scale = np.maximum(scale, np.abs(beta * int_dh))
        if j < r:
            scale = np.maximum(scale, np.abs(gamma * int_f))
    return np.abs(resid) / np.maximum(scale, 1e-300)
