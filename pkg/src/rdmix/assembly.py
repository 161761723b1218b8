"""Element and global assembly of the mixed bilinear forms.

Elements are grouped by tabulation signature (orders, edge orders, edge
flips); each group shares one set of reference tables and is assembled
with batched tensor contractions. Geometry enters through the affine
Jacobian: the flux basis is Piola mapped, so

    K_e[i,j] = sum_q w_q  tau_i^T (A^T D^-1 A / detA) tau_j
    B_e[i,l] = -sum_q w_q  divtau_i(q) v_l(q)          (geometry free)
    M_e[k,l] = detA * sum_q w_q v_k(q) v_l(q)

Normal traces of edge basis functions equal (2/|e|) P_j(s) with respect
to the edge's global low-to-high normal, which makes boundary moments
and the essential flux projection one-dimensional Legendre integrals.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import kernels
from .fespace import (
    DofMap,
    QuadratureRule,
    n_scalar,
    quadrature_rule,
    scalar_tab_rule,
    flux_tab,
)
from .linalg import BlockSystem
from .mesh import Mesh


class AssemblyError(ValueError):
    pass


@dataclass(frozen=True)
class DiffusivityField:
    """Region tag -> 2x2 SPD diffusion tensor."""
    tensors: dict

    @staticmethod
    def isotropic(values: dict) -> "DiffusivityField":
        return DiffusivityField({tag: np.eye(2) * float(d) for tag, d in values.items()})

    def tensor(self, tag: int) -> np.ndarray:
        try:
            D = np.asarray(self.tensors[tag], dtype=float)
        except KeyError as exc:
            raise AssemblyError(f"no diffusivity for region tag {tag}") from exc
        if D.shape != (2, 2) or abs(D[0, 1] - D[1, 0]) > 1e-14:
            raise AssemblyError(f"diffusivity for tag {tag} is not symmetric 2x2")
        ev = np.linalg.eigvalsh(D)
        if ev[0] <= 0:
            raise AssemblyError(f"diffusivity for tag {tag} is not positive definite")
        return D


@dataclass
class ElementGroup:
    els: np.ndarray               # element indices sharing a signature
    k: int                        # mass order
    p: int                        # flux order
    qedges: tuple
    rule: QuadratureRule
    Vf: np.ndarray                # (nfn, nq, 2) reference flux values
    Df: np.ndarray                # (nfn, nq) reference divergences
    Vm: np.ndarray                # (nm, nq) scalar values
    Gmx: np.ndarray               # (nm, nq) scalar d/dx
    Gmy: np.ndarray               # (nm, nq)
    jac: np.ndarray               # (ne, 2, 2)
    det: np.ndarray               # (ne,)
    inv_jac: np.ndarray           # (ne, 2, 2)
    Dinv: np.ndarray              # (ne, 2, 2)
    fdofs: np.ndarray             # (ne, nfn)
    mdofs: np.ndarray             # (ne, nm)
    phys: np.ndarray              # (ne, nq, 2) quadrature points in space


class Discretization:
    """Mesh + dof map + diffusivity, with cached group tabulations."""

    def __init__(self, mesh: Mesh, dofmap: DofMap, D: DiffusivityField,
                 quad_extra: int = 2):
        self.mesh = mesh
        self.dofmap = dofmap
        self.D = D
        self.quad_extra = quad_extra
        self.groups = self._build_groups()

    def _build_groups(self):
        mesh, dm = self.mesh, self.dofmap
        sig_map: dict = {}
        for t in range(mesh.n_elements):
            sig_map.setdefault(dm.signature(t), []).append(t)
        groups = []
        for (k, qedges, flips), els in sorted(sig_map.items()):
            els = np.array(els, dtype=int)
            p = k + 1
            deg = 2 * max(p, max(qedges)) + self.quad_extra
            rule = quadrature_rule("triangle", deg)
            Vf, Df = flux_tab(p, qedges, flips, rule)
            Vm, Gx, Gy = scalar_tab_rule(k, rule, True)
            v = mesh.vertices[mesh.elements[els]]
            jac = np.stack([v[:, 1] - v[:, 0], v[:, 2] - v[:, 0]], axis=-1)
            det = jac[:, 0, 0] * jac[:, 1, 1] - jac[:, 0, 1] * jac[:, 1, 0]
            inv_jac = np.empty_like(jac)
            inv_jac[:, 0, 0] = jac[:, 1, 1] / det
            inv_jac[:, 0, 1] = -jac[:, 0, 1] / det
            inv_jac[:, 1, 0] = -jac[:, 1, 0] / det
            inv_jac[:, 1, 1] = jac[:, 0, 0] / det
            Dinv = np.stack([
                np.linalg.inv(self.D.tensor(int(mesh.regions[t]))) for t in els
            ])
            fdofs = np.stack([dm.element_flux_dofs(int(t)) for t in els])
            mdofs = np.stack([dm.element_mass_dofs(int(t)) for t in els])
            phys = v[:, None, 0, :] + np.einsum("eab,qb->eqa", jac, rule.xy)
            groups.append(ElementGroup(els, k, p, qedges, rule, Vf, Df, Vm,
                                       Gx, Gy, jac, det, inv_jac, Dinv,
                                       fdofs, mdofs, phys))
        return groups

    # -- global matrices ----------------------------------------------------

    def assemble_kbm(self):
        dm = self.dofmap
        rows_k, cols_k, vals_k = [], [], []
        rows_b, cols_b, vals_b = [], [], []
        rows_m, cols_m, vals_m = [], [], []
        for g in self.groups:
            w = g.rule.weights
            metric = np.einsum("eba,ebc,ecd->ead", g.jac, g.Dinv, g.jac)
            metric /= g.det[:, None, None]
            K_e = np.einsum("ina,eab,jnb,n->eij", g.Vf, metric, g.Vf, w,
                            optimize=True)
            B_e = -np.einsum("in,jn,n->ij", g.Df, g.Vm, w)
            M_hat = np.einsum("in,jn,n->ij", g.Vm, g.Vm, w)
            nf, nm = g.Vf.shape[0], g.Vm.shape[0]
            rows_k.append(np.repeat(g.fdofs, nf, axis=1).ravel())
            cols_k.append(np.tile(g.fdofs, (1, nf)).ravel())
            vals_k.append(K_e.ravel())
            rows_b.append(np.repeat(g.fdofs, nm, axis=1).ravel())
            cols_b.append(np.tile(g.mdofs, (1, nf)).ravel())
            vals_b.append(np.broadcast_to(B_e, (len(g.els), nf, nm)).ravel())
            rows_m.append(np.repeat(g.mdofs, nm, axis=1).ravel())
            cols_m.append(np.tile(g.mdofs, (1, nm)).ravel())
            vals_m.append((M_hat[None] * g.det[:, None, None]).ravel())

        def build(rows, cols, vals, shape):
            A = sp.coo_matrix(
                (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                shape=shape,
            ).tocsr()
            A.sum_duplicates()
            return A

        nf, nm = dm.n_flux, dm.n_mass
        K = build(rows_k, cols_k, vals_k, (nf, nf))
        B = build(rows_b, cols_b, vals_b, (nf, nm))
        M = build(rows_m, cols_m, vals_m, (nm, nm))
        return K, B, M

    def mass_slices(self):
        dm = self.dofmap
        return [dm.mass_slice(t) for t in range(self.mesh.n_elements)]

    # -- field evaluation at group quadrature points ------------------------

    def mass_at_quad(self, m_vec):
        """Per-group (ne, nq) values of the mass field."""
        return [np.einsum("el,lq->eq", m_vec[g.mdofs], g.Vm) for g in self.groups]

    def mass_grad_at_quad(self, m_vec):
        out = []
        for g in self.groups:
            c = m_vec[g.mdofs]
            gx = np.einsum("el,lq->eq", c, g.Gmx)
            gy = np.einsum("el,lq->eq", c, g.Gmy)
            ref = np.stack([gx, gy], axis=-1)
            out.append(np.einsum("eba,eqb->eqa", g.inv_jac, ref))
        return out

    def flux_at_quad(self, h_vec):
        out = []
        for g in self.groups:
            c = h_vec[g.fdofs]
            ref = np.einsum("ei,iqa->eqa", c, g.Vf)
            out.append(np.einsum("eab,eqb->eqa", g.jac / g.det[:, None, None], ref))
        return out

    def flux_div_at_quad(self, h_vec):
        return [np.einsum("ei,iq->eq", h_vec[g.fdofs], g.Df) / g.det[:, None]
                for g in self.groups]

    def kinetics_load(self, f_quad) -> np.ndarray:
        """Mass-dof vector of (f, v) from pointwise values at quadrature."""
        out = np.zeros(self.dofmap.n_mass)
        for g, f in zip(self.groups, f_quad):
            L = np.einsum("eq,lq,q->el", f, g.Vm, g.rule.weights) * g.det[:, None]
            np.add.at(out, g.mdofs, L)
        return out

    def project_mass(self, fn) -> np.ndarray:
        """L2 projection of fn(x, y) onto the mass space."""
        out = np.zeros(self.dofmap.n_mass)
        for g in self.groups:
            vals = fn(g.phys[..., 0], g.phys[..., 1])
            vals = np.broadcast_to(vals, g.phys.shape[:2])
            M_hat = np.einsum("in,jn,n->ij", g.Vm, g.Vm, g.rule.weights)
            rhs = np.einsum("eq,lq,q->el", vals, g.Vm, g.rule.weights)
            out[g.mdofs.ravel()] = np.linalg.solve(M_hat, rhs.T).T.ravel()
        return out

    def project_quad_values(self, values) -> np.ndarray:
        """L2 projection of per-group quadrature values onto the mass space."""
        out = np.zeros(self.dofmap.n_mass)
        for g, vals in zip(self.groups, values):
            M_hat = np.einsum("in,jn,n->ij", g.Vm, g.Vm, g.rule.weights)
            rhs = np.einsum("eq,lq,q->el", vals, g.Vm, g.rule.weights)
            out[g.mdofs.ravel()] = np.linalg.solve(M_hat, rhs.T).T.ravel()
        return out

    def integrate_elementwise(self, quad_values) -> np.ndarray:
        """Per-element integrals of per-group pointwise values."""
        out = np.zeros(self.mesh.n_elements)
        for g, vals in zip(self.groups, quad_values):
            out[g.els] = (vals @ g.rule.weights) * g.det
        return out

    def zeros_quad(self):
        return [np.zeros((len(g.els), len(g.rule.weights))) for g in self.groups]

    def eval_at_quad(self, fn, t=None):
        """Pointwise values of fn(x, y[, t]) at all group quadrature points."""
        out = []
        for g in self.groups:
            x, y = g.phys[..., 0], g.phys[..., 1]
            vals = fn(x, y) if t is None else fn(x, y, t)
            out.append(np.broadcast_to(np.asarray(vals, dtype=float), x.shape).copy())
        return out

    # -- error norms ---------------------------------------------------------

    def error_norms(self, m_vec, h_vec, exact_m, exact_h, exact_div_h, t):
        """(L2 m, L2 h, L2 div h) errors against exact fields at time t."""
        e_m = e_h = e_d = 0.0
        mq = self.mass_at_quad(m_vec)
        hq = self.flux_at_quad(h_vec)
        dq = self.flux_div_at_quad(h_vec)
        for g, mv, hv, dv in zip(self.groups, mq, hq, dq):
            x, y = g.phys[..., 0], g.phys[..., 1]
            wdet = g.rule.weights[None, :] * g.det[:, None]
            e_m += ((mv - exact_m(x, y, t)) ** 2 * wdet).sum()
            hx, hy = exact_h(x, y, t)
            e_h += (((hv[..., 0] - hx) ** 2 + (hv[..., 1] - hy) ** 2) * wdet).sum()
            e_d += ((dv - exact_div_h(x, y, t)) ** 2 * wdet).sum()
        return np.sqrt(e_m), np.sqrt(e_h), np.sqrt(e_d)

    def norm_l2_mass(self, m_vec) -> float:
        tot = 0.0
        for g, mv in zip(self.groups, self.mass_at_quad(m_vec)):
            tot += ((mv ** 2) @ g.rule.weights * g.det).sum()
        return float(np.sqrt(tot))

    def total_mass(self, m_vec) -> float:
        return float(self.integrate_elementwise(self.mass_at_quad(m_vec)).sum())


# ---------------------------------------------------------------------------
# single-element API
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ElementMatrices:
    K: np.ndarray
    B: np.ndarray
    M: np.ndarray
    flux_dofs: np.ndarray
    mass_dofs: np.ndarray


def element_matrices(coords, vertex_ids, D, k, qedges=None) -> ElementMatrices:
    """Local matrices of one element (reference implementation for tests)."""
    from .fespace.basis import ElementGeometry

    geom = ElementGeometry(np.asarray(coords, dtype=float), tuple(vertex_ids))
    if geom.det <= 0:
        raise AssemblyError("element vertices must be counter-clockwise")
    p = k + 1
    qedges = (p, p, p) if qedges is None else tuple(qedges)
    deg = 2 * max(p, max(qedges)) + 2
    rule = quadrature_rule("triangle", deg)
    Vf, Df = flux_tab(p, qedges, geom.flips(), rule)
    Vm = scalar_tab_rule(k, rule, False)
    D = np.asarray(D, dtype=float) if np.ndim(D) else np.eye(2) * float(D)
    Dinv = np.linalg.inv(D)
    jac, det = geom.jac, geom.det
    metric = jac.T @ Dinv @ jac / det
    K = np.einsum("ina,ab,jnb,n->ij", Vf, metric, Vf, rule.weights)
    B = -np.einsum("in,jn,n->ij", Df, Vm, rule.weights)
    M = det * np.einsum("in,jn,n->ij", Vm, Vm, rule.weights)
    nfn = Vf.shape[0]
    return ElementMatrices(K, B, M, np.arange(nfn), np.arange(Vm.shape[0]))


def assemble_global(disc: Discretization):
    """Global (K, B, M); thin wrapper kept for symmetry with the local API."""
    return disc.assemble_kbm()


# ---------------------------------------------------------------------------
# boundary data
# ---------------------------------------------------------------------------

def _edge_geometry(mesh: Mesh, e: int):
    lo, hi = mesh.edges[e]
    a, b = mesh.vertices[lo], mesh.vertices[hi]
    length = float(np.hypot(*(b - a)))
    t_elem = int(mesh.edge_elems[e, 0])
    le = int(np.nonzero(mesh.elem_edges[t_elem] == e)[0][0])
    sign = int(mesh.orient[t_elem, le])
    return a, b, length, sign


def edge_rule_points(mesh: Mesh, e: int, rule: QuadratureRule):
    """Physical points and global parameter s in [-1,1] of a segment rule."""
    a, b, length, _ = _edge_geometry(mesh, e)
    s = 2.0 * rule.points - 1.0
    pts = a[None, :] + rule.points[:, None] * (b - a)[None, :]
    return pts, s, length


def assemble_F(disc: Discretization, mbar, gamma_n_edges, t=0.0) -> np.ndarray:
    """Natural-boundary moments F_I = (tau_I . n, mbar) on the given edges.

    mbar is a callable (x, y, t) -> value. Entries appear only for the
    edge dofs living on gamma_n_edges.
    """
    mesh, dm = disc.mesh, disc.dofmap
    F = np.zeros(dm.n_flux)
    for e in np.asarray(gamma_n_edges, dtype=int):
        qe = int(dm.orders.q[e])
        rule = quadrature_rule("segment", 2 * qe + 2)
        pts, s, _ = edge_rule_points(mesh, e, rule)
        _, _, _, sign = _edge_geometry(mesh, e)
        leg = kernels.legendre_tab(qe, s)
        vals = mbar(pts[:, 0], pts[:, 1], t)
        vals = np.broadcast_to(np.asarray(vals, dtype=float), s.shape)
        mom = 2.0 * (leg * (rule.weights * vals)[None, :]).sum(axis=1)
        F[dm.edge_dofs(e)] += sign * mom
    return F


def essential_flux_values(disc: Discretization, hbar_by_tag, t=0.0):
    """Constrained flux dofs and values enforcing tau.n = -hbar on Gamma_E.

    hbar_by_tag maps a boundary tag to a callable (x, y, t). Values come
    from the L2 projection of -hbar onto the edge's Legendre trace span.
    """
    mesh, dm = disc.mesh, disc.dofmap
    dofs, values = [], []
    seen = set()
    for tag, hbar in hbar_by_tag.items():
        edges = mesh.edges_with_tag([tag])
        if len(edges) == 0 and len(mesh.boundary_edges) > 0:
            raise AssemblyError(f"boundary tag {tag} not present in mesh")
        for e in edges:
            if int(e) in seen:
                continue
            seen.add(int(e))
            qe = int(dm.orders.q[e])
            rule = quadrature_rule("segment", 2 * qe + 2)
            pts, s, length = edge_rule_points(mesh, e, rule)
            _, _, _, sign = _edge_geometry(mesh, e)
            leg = kernels.legendre_tab(qe, s)
            vals = np.broadcast_to(
                np.asarray(hbar(pts[:, 0], pts[:, 1], t), dtype=float), s.shape)
            mom = 2.0 * (leg * (rule.weights * vals)[None, :]).sum(axis=1)
            j = np.arange(qe + 1)
            coef = -sign * (length / 2.0) * (2 * j + 1) / 2.0 * mom
            dofs.append(dm.edge_dofs(e))
            values.append(coef)
    if dofs:
        return np.concatenate(dofs), np.concatenate(values)
    return np.empty(0, dtype=int), np.empty(0)


def apply_essential_flux_bc(system: BlockSystem, dofs, values) -> BlockSystem:
    """Symmetric elimination of prescribed flux dofs from a block system."""
    n = system.K.shape[0]
    keep = np.ones(n, dtype=bool)
    keep[dofs] = False
    free = np.nonzero(keep)[0]
    vfix = np.asarray(values, dtype=float)
    K, B = system.K.tocsr(), system.B.tocsr()
    F = system.F[free] - K[free][:, dofs] @ vfix
    G = system.G - (B[dofs].T @ vfix)
    return BlockSystem(K[free][:, free], B[free], system.M, system.sigma, F, G)


def assemble_G(disc: Discretization, B, M, coeffs, dt, hist_m, hist_h, hist_f):
    """History right-hand side over mass dofs.

    hist_* are sequences ordered oldest..newest of length r, holding the
    mass dof vectors, flux dof vectors and per-group quadrature values of
    the kinetics term. Includes the mass-history terms required for the
    discrete mass balance alongside the printed flux/kinetics terms.
    """
    r = coeffs.r
    if not (len(hist_m) == len(hist_h) == len(hist_f) == r):
        raise AssemblyError(f"history must hold {r} levels")
    beta_r = float(coeffs.beta[r])
    G = np.zeros(disc.dofmap.n_mass)
    for j in range(r):
        gam = float(coeffs.gamma[j])
        bet = float(coeffs.beta[j])
        alp = float(coeffs.alpha[j])
        if gam:
            G += gam * disc.kinetics_load(hist_f[j])
        if bet:
            G += bet * (B.T @ hist_h[j])
        if alp:
            G -= (alp / dt) * (M @ hist_m[j])
    return G / beta_r
