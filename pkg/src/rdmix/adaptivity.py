"""Residual/jump a posteriori error estimation and 3-stage p-refinement.

Per element K the estimator combines the constitutive residual
||h + D grad m||, the mass-balance residual ||s m + div h - g|| (g is
the same history density the step's right-hand side uses, so the
residual of the discrete solution is orthogonal to the element's P_k),
and the scaled concentration jumps h_e^{-1/2} ||[m]|| over its edges.

Refinement stages: threshold marking against the max indicator, then
neighbour smoothing to a one-level fixed point, then edge orders reset
to the max of adjacent flux orders to keep H(div) conformity.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .assembly import Discretization
from .fespace import OrderMap, QuadratureRule, quadrature_rule, scalar_tab
from .fespace.dofmap import DofMap, edge_orders_from_elements
from .fespace._exact import EDGE_VERTS
from .mesh import Mesh


class AdaptError(ValueError):
    pass


@dataclass(frozen=True)
class AdaptParams:
    theta_min: float = 0.02
    theta_max: float = 0.8
    order_min: int = 1
    order_max: int = 8
    cadence: int = 5

    def validate(self):
        if not (0.0 <= self.theta_min < self.theta_max <= 1.0):
            raise AdaptError("need 0 <= theta_min < theta_max <= 1")
        if self.order_min < 1 or self.order_max < self.order_min:
            raise AdaptError("bad order bounds")


@dataclass(frozen=True)
class ErrorField:
    eta_r1: np.ndarray            # (nt,) constitutive residuals
    eta_r2: np.ndarray            # (nt,) mass-balance residuals
    eta_jump: np.ndarray          # (ne,) interior-edge jumps, 0 on boundary
    eta_elem: np.ndarray          # (nt,) combined local indicator
    eta_global: float
    eta_max: float


def aggregate(mesh: Mesh, eta_r1, eta_r2, eta_jump) -> ErrorField:
    """Combine components into local and global indicators."""
    eta_r1 = np.asarray(eta_r1, dtype=float)
    eta_r2 = np.asarray(eta_r2, dtype=float)
    eta_jump = np.asarray(eta_jump, dtype=float)
    eta2 = eta_r1 ** 2 + eta_r2 ** 2
    eta_elem2 = eta2.copy()
    for t in range(mesh.n_elements):
        for e in mesh.elem_edges[t]:
            eta_elem2[t] += eta_jump[e] ** 2
    glob = float(np.sqrt(eta2.sum() + (eta_jump ** 2).sum()))
    eta_elem = np.sqrt(eta_elem2)
    return ErrorField(eta_r1, eta_r2, eta_jump, eta_elem, glob,
                      float(eta_elem.max(initial=0.0)))


def element_residuals(disc: Discretization, sigma, m_vec, h_vec, g_quad):
    """(eta_R1, eta_R2) per element for a converged step solution."""
    nt = disc.mesh.n_elements
    e1 = np.zeros(nt)
    e2 = np.zeros(nt)
    mq = disc.mass_at_quad(m_vec)
    gq = disc.mass_grad_at_quad(m_vec)
    hq = disc.flux_at_quad(h_vec)
    dq = disc.flux_div_at_quad(h_vec)
    for g, mv, gv, hv, dv, gg in zip(disc.groups, mq, gq, hq, dq, g_quad):
        D = np.linalg.inv(g.Dinv)
        dgrad = np.einsum("eab,eqb->eqa", D, gv)
        res1 = ((hv + dgrad) ** 2).sum(axis=-1)
        res2 = (sigma * mv + dv - gg) ** 2
        wdet = g.rule.weights[None, :] * g.det[:, None]
        e1[g.els] = np.sqrt((res1 * wdet).sum(axis=1))
        e2[g.els] = np.sqrt((res2 * wdet).sum(axis=1))
    return e1, e2


@lru_cache(maxsize=None)
def _edge_trace_tab(k: int, local_edge: int, flip: int, rule: QuadratureRule):
    """Scalar basis values along a local edge at global edge parameters."""
    s = 2.0 * rule.points - 1.0
    s_loc = s if flip > 0 else -s
    verts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    a, b = EDGE_VERTS[local_edge]
    pts = verts[a][None, :] + ((1.0 + s_loc) / 2.0)[:, None] * (verts[b] - verts[a])[None, :]
    return scalar_tab(k, pts)


def _side_trace(dm: DofMap, m_vec, t: int, e: int, rule) -> np.ndarray:
    mesh = dm.mesh
    le = int(np.nonzero(mesh.elem_edges[t] == e)[0][0])
    a, b = EDGE_VERTS[le]
    g = mesh.elements[t]
    flip = 1 if g[a] < g[b] else -1
    tab = _edge_trace_tab(int(dm.orders.k[t]), le, flip, rule)
    return m_vec[dm.element_mass_dofs(t)] @ tab


def jump_errors(dm: DofMap, m_vec) -> np.ndarray:
    """Scaled concentration jumps h_e^{-1/2} ||[m]||_{0,e} per interior edge."""
    mesh = dm.mesh
    out = np.zeros(mesh.n_edges)
    lengths = mesh.edge_lengths()
    for e in mesh.interior_edges:
        t_plus, t_minus = (int(v) for v in mesh.edge_elems[e])
        kmax = max(int(dm.orders.k[t_plus]), int(dm.orders.k[t_minus]))
        rule = quadrature_rule("segment", 2 * kmax + 2)
        jump = (_side_trace(dm, m_vec, t_plus, int(e), rule)
                - _side_trace(dm, m_vec, t_minus, int(e), rule))
        h_e = lengths[e]
        norm2 = h_e * float((jump ** 2) @ rule.weights)   # arc-length measure
        out[e] = np.sqrt(norm2 / h_e)
    return out


def jump_error_edge(dm: DofMap, m_vec, e: int) -> float:
    if dm.mesh.edge_elems[e, 1] < 0:
        raise AdaptError(f"edge {e} is a boundary edge; jumps need two sides")
    return float(jump_errors_on(dm, m_vec, [e])[e])


def jump_errors_on(dm: DofMap, m_vec, edges) -> dict:
    full = jump_errors(dm, m_vec)
    return {int(e): full[int(e)] for e in edges}


def g_density(disc: Discretization, coeffs, dt, hist_m, hist_h, hist_f):
    """Pointwise history density matching the step right-hand side."""
    r = coeffs.r
    beta_r = float(coeffs.beta[r])
    out = disc.zeros_quad()
    for j in range(r):
        gam = float(coeffs.gamma[j])
        bet = float(coeffs.beta[j])
        alp = float(coeffs.alpha[j])
        if gam:
            for gi, fv in enumerate(hist_f[j]):
                out[gi] += gam * fv
        if bet:
            for gi, dv in enumerate(disc.flux_div_at_quad(hist_h[j])):
                out[gi] -= bet * dv
        if alp:
            for gi, mv in enumerate(disc.mass_at_quad(hist_m[j])):
                out[gi] -= (alp / dt) * mv
    return [v / beta_r for v in out]


def estimate_errors(disc: Discretization, coeffs, dt, state, species=0) -> ErrorField:
    """Estimator for the newest history level of a stepped state."""
    from .imex import shift

    sigma = shift(coeffs, dt)
    levels = state.levels[-coeffs.r - 1:]
    if len(levels) < coeffs.r + 1:
        # initial condition: residual of the steady equations
        lev = levels[-1]
        g = [fv + sigma * mv for fv, mv in
             zip(lev.f[species], disc.mass_at_quad(lev.m[species]))]
    else:
        past = levels[:-1]
        g = g_density(disc, coeffs, dt,
                      [p.m[species] for p in past],
                      [p.h[species] for p in past],
                      [p.f[species] for p in past])
    lev = levels[-1]
    e1, e2 = element_residuals(disc, sigma, lev.m[species], lev.h[species], g)
    ej = jump_errors(disc.dofmap, lev.m[species])
    return aggregate(disc.mesh, e1, e2, ej)


def combine_error_fields(mesh: Mesh, fields) -> ErrorField:
    """Root-sum-square of per-species estimators."""
    e1 = np.sqrt(sum(f.eta_r1 ** 2 for f in fields))
    e2 = np.sqrt(sum(f.eta_r2 ** 2 for f in fields))
    ej = np.sqrt(sum(f.eta_jump ** 2 for f in fields))
    return aggregate(mesh, e1, e2, ej)


# ---------------------------------------------------------------------------
# order adaptation
# ---------------------------------------------------------------------------

def adapt_orders(errors: ErrorField, params: AdaptParams, orders: OrderMap,
                 mesh: Mesh) -> OrderMap:
    """Three-stage p-refinement: threshold marking, neighbour smoothing
    to a one-level gap, then edge orders from adjacent flux orders."""
    params.validate()
    eta, eta_max = errors.eta_elem, errors.eta_max
    k = orders.k.copy()
    if eta_max > 0:
        raise_mask = eta >= params.theta_max * eta_max
        lower_mask = eta <= params.theta_min * eta_max
        k[raise_mask & (k < params.order_max)] += 1
        k[lower_mask & ~raise_mask & (k > params.order_min)] -= 1
    # stage 2: iterate until adjacent orders differ by at most one
    changed = True
    while changed:
        changed = False
        for e in mesh.interior_edges:
            ta, tb = mesh.edge_elems[e]
            if k[ta] + 1 < k[tb]:
                k[ta] = k[tb] - 1
                changed = True
            elif k[tb] + 1 < k[ta]:
                k[tb] = k[ta] - 1
                changed = True
    # stage 3: conforming edge orders
    q = edge_orders_from_elements(mesh, k)
    return OrderMap(k, q, params.order_min, params.order_max)


# ---------------------------------------------------------------------------
# solution transfer between order maps
# ---------------------------------------------------------------------------

def transfer_mass(old_dm: DofMap, new_dm: DofMap, vec) -> np.ndarray:
    """Hierarchical pad/truncate of mass coefficients per element."""
    if old_dm.mesh is not new_dm.mesh:
        raise AdaptError("transfer requires the same mesh")
    out = np.zeros(new_dm.n_mass)
    for t in range(old_dm.mesh.n_elements):
        so, sn = old_dm.mass_slice(t), new_dm.mass_slice(t)
        n = min(so.stop - so.start, sn.stop - sn.start)
        out[sn.start:sn.start + n] = vec[so.start:so.start + n]
    return out


def transfer_flux(old_dm: DofMap, new_dm: DofMap, vec) -> np.ndarray:
    """Per-entity pad/truncate of flux coefficients (edges then interiors)."""
    if old_dm.mesh is not new_dm.mesh:
        raise AdaptError("transfer requires the same mesh")
    mesh = old_dm.mesh
    out = np.zeros(new_dm.n_flux)
    for e in range(mesh.n_edges):
        no = old_dm.edge_offsets[e + 1] - old_dm.edge_offsets[e]
        nn = new_dm.edge_offsets[e + 1] - new_dm.edge_offsets[e]
        n = min(int(no), int(nn))
        out[new_dm.edge_offsets[e]:new_dm.edge_offsets[e] + n] = \
            vec[old_dm.edge_offsets[e]:old_dm.edge_offsets[e] + n]
    for t in range(mesh.n_elements):
        no = old_dm.int_offsets[t + 1] - old_dm.int_offsets[t]
        nn = new_dm.int_offsets[t + 1] - new_dm.int_offsets[t]
        n = min(int(no), int(nn))
        out[new_dm.int_offsets[t]:new_dm.int_offsets[t] + n] = \
            vec[old_dm.int_offsets[t]:old_dm.int_offsets[t] + n]
    return out


def transfer_quad_values(old_disc: Discretization, new_disc: Discretization,
                         values):
    """Re-project per-group quadrature data onto the new quadrature layout.

    Pointwise history (kinetics samples, internal states) is projected
    onto the old element's mass space and re-evaluated at the new points.
    """
    coefs = old_disc.project_quad_values(values)
    old_dm = old_disc.dofmap
    out = []
    for g in new_disc.groups:
        nq = len(g.rule.weights)
        arr = np.empty((len(g.els), nq))
        ks = old_dm.orders.k[g.els]
        for k_old in np.unique(ks):
            sel = np.nonzero(ks == k_old)[0]
            tab = scalar_tab(int(k_old), g.rule.xy)
            rows = np.stack([
                coefs[old_dm.element_mass_dofs(int(g.els[s]))] for s in sel
            ])
            arr[sel] = rows @ tab
        out.append(arr)
    return out


def normal_trace_jump(dm: DofMap, h_vec, n_points: int = 7) -> float:
    """Worst normal-trace mismatch of a flux field across interior edges."""
    from .fespace.basis import ElementGeometry, hdiv_basis

    mesh = dm.mesh
    verts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    s = np.linspace(-0.95, 0.95, n_points)

    def trace(t, e):
        lo, hi = mesh.edges[e]
        tang = mesh.vertices[hi] - mesh.vertices[lo]
        n_glob = np.array([tang[1], -tang[0]]) / np.hypot(*tang)
        le = int(np.nonzero(mesh.elem_edges[t] == e)[0][0])
        la, lb = EDGE_VERTS[le]
        g = mesh.elements[t]
        s_loc = s if g[la] < g[lb] else -s
        pts = verts[la][None] + ((1 + s_loc) / 2)[:, None] * (verts[lb] - verts[la])[None]
        geom = ElementGeometry(mesh.element_coords(t), tuple(mesh.elements[t]))
        be = hdiv_basis(int(dm.orders.k[t]), dm.element_qedges(t), geom, pts)
        return np.einsum("i,ipa->pa", h_vec[dm.element_flux_dofs(t)], be.flux) @ n_glob

    worst = 0.0
    for e in mesh.interior_edges:
        t1, t2 = mesh.edge_elems[e]
        worst = max(worst, float(np.abs(trace(int(t1), int(e))
                                        - trace(int(t2), int(e))).max()))
    return worst


def transfer_state(old_discs, new_discs, state):
    """Move a SimState (full history) onto a new discretization."""
    old_dm = old_discs[0].dofmap
    new_dm = new_discs[0].dofmap
    from .imex import HistoryLevel, SimState

    new_levels = []
    for lev in state.levels:
        ms = [transfer_mass(old_dm, new_dm, m) for m in lev.m]
        hs = [transfer_flux(old_dm, new_dm, h) for h in lev.h]
        fs = [transfer_quad_values(old_discs[0], new_discs[0], f) for f in lev.f]
        new_levels.append(HistoryLevel(lev.t, ms, hs, fs))
    internal = state.internal
    if internal is not None:
        internal = transfer_quad_values(old_discs[0], new_discs[0], internal)
    return SimState(state.time, new_levels, internal)
