"""Scalar and H(div) basis properties on the reference element and meshes."""

import numpy as np
import pytest

from rdmix.fespace import (
    ElementGeometry,
    hdiv_basis,
    n_flux,
    n_scalar,
    quadrature_rule,
    scalar_tab,
    flux_tab,
    flux_tab_points,
)
from rdmix.fespace import basis as B
from rdmix.fespace._exact import EDGE_VERTS
from rdmix.kernels import legendre_tab

RNG = np.random.default_rng(42)


def ref_points(n=7):
    pts = RNG.random((n, 2))
    keep = pts.sum(axis=1) < 0.95
    return pts[keep] * 0.9 + 0.02


# ---------------------------------------------------------------------------
# scalar basis
# ---------------------------------------------------------------------------

def test_l2_basis_constant():
    pts = ref_points()
    vals = scalar_tab(0, pts)
    assert vals.shape == (1, len(pts))
    assert np.allclose(vals, 1.0, atol=1e-15)


def test_l2_basis_dimension():
    pts = ref_points()
    assert scalar_tab(2, pts).shape[0] == 6
    for k in range(0, 9):
        assert scalar_tab(k, pts).shape[0] == (k + 1) * (k + 2) // 2


def test_l2_span_reproduces_monomials():
    # least-squares fit of each monomial of degree <= 2 in the k=2 basis
    pts = ref_points(40)
    vals = scalar_tab(2, pts)
    targets = [np.ones(len(pts)), pts[:, 0], pts[:, 1],
               pts[:, 0] ** 2, pts[:, 0] * pts[:, 1], pts[:, 1] ** 2]
    for tgt in targets:
        coef, res, *_ = np.linalg.lstsq(vals.T, tgt, rcond=None)
        fit = vals.T @ coef
        assert np.abs(fit - tgt).max() < 1e-11


def test_l2_hierarchical_prefix():
    # leading block of the order-4 tabulation is the order-2 tabulation
    pts = ref_points()
    v2 = scalar_tab(2, pts)
    v4 = scalar_tab(4, pts)
    assert np.allclose(v2, v4[: v2.shape[0]], atol=1e-14)


def test_l2_gram_diagonal():
    # scaled so the constant function is 1: reference Gram is I/2
    rule = quadrature_rule("triangle", 12)
    v = scalar_tab(5, rule.xy)
    G = np.einsum("iq,jq,q->ij", v, v, rule.weights)
    assert np.abs(G - 0.5 * np.eye(G.shape[0])).max() < 1e-12


def test_scalar_gradients_match_fd():
    pts = ref_points()
    h = 1e-6
    v, gx, gy = scalar_tab(5, pts, True)
    fx = (scalar_tab(5, pts + [h, 0]) - scalar_tab(5, pts - [h, 0])) / (2 * h)
    fy = (scalar_tab(5, pts + [0, h]) - scalar_tab(5, pts - [0, h])) / (2 * h)
    assert np.abs(gx - fx).max() < 1e-6
    assert np.abs(gy - fy).max() < 1e-6


# ---------------------------------------------------------------------------
# flux basis on the reference element
# ---------------------------------------------------------------------------

def test_flux_dimensions():
    pts = ref_points()
    for p in range(1, 7):
        vals, divs = flux_tab_points(p, (p, p, p), (1, 1, 1), pts)
        assert vals.shape[0] == n_flux(p) == (p + 1) * (p + 2)
        assert divs.shape[0] == vals.shape[0]


def test_edge_function_traces_are_legendre():
    """Normal trace of edge function (e, j) is P_j on its own edge, 0 elsewhere."""
    s = np.linspace(-0.9, 0.9, 8)
    p = 4
    for e in range(3):
        a, b = EDGE_VERTS[e]
        verts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        pts = verts[a][None] + ((1 + s) / 2)[:, None] * (verts[b] - verts[a])[None]
        tang = (verts[b] - verts[a]) / 2.0
        n_param = np.array([tang[1], -tang[0]])
        vals, _ = flux_tab_points(p, (p, p, p), (1, 1, 1), pts)
        leg = legendre_tab(p, s)
        for eo in range(3):
            for j in range(p + 1):
                fn = eo * (p + 1) + j
                tr = vals[fn] @ n_param
                want = leg[j] if eo == e else np.zeros_like(s)
                assert np.abs(tr - want).max() < 1e-11, (e, eo, j)


def test_interior_functions_zero_trace():
    s = np.linspace(-0.95, 0.95, 6)
    p = 5
    nep = 3 * (p + 1)
    verts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    for e in range(3):
        a, b = EDGE_VERTS[e]
        pts = verts[a][None] + ((1 + s) / 2)[:, None] * (verts[b] - verts[a])[None]
        tang = (verts[b] - verts[a]) / 2.0
        n_param = np.array([tang[1], -tang[0]])
        vals, _ = flux_tab_points(p, (p, p, p), (1, 1, 1), pts)
        tr = vals[nep:] @ n_param
        assert np.abs(tr).max() < 1e-11


def test_divergence_matches_finite_differences():
    pts = ref_points(5)
    h = 1e-6
    for p in (1, 3, 5):
        _, divs = flux_tab_points(p, (p, p, p), (1, 1, 1), pts)
        vx1, _ = flux_tab_points(p, (p, p, p), (1, 1, 1), pts + [h, 0])
        vx0, _ = flux_tab_points(p, (p, p, p), (1, 1, 1), pts - [h, 0])
        vy1, _ = flux_tab_points(p, (p, p, p), (1, 1, 1), pts + [0, h])
        vy0, _ = flux_tab_points(p, (p, p, p), (1, 1, 1), pts - [0, h])
        fd = (vx1[:, :, 0] - vx0[:, :, 0] + vy1[:, :, 1] - vy0[:, :, 1]) / (2 * h)
        denom = max(1.0, np.abs(divs).max())
        assert np.abs(fd - divs).max() / denom < 1e-6


def test_divergence_theorem_per_basis_function():
    """int_K div tau = contour integral of tau.n for every basis function."""
    p = 3
    rule = quadrature_rule("triangle", 2 * p + 2)
    vals, divs = flux_tab(p, (p, p, p), (1, 1, 1), rule)
    vol = divs @ rule.weights
    srule = quadrature_rule("segment", 2 * p + 2)
    s = 2 * srule.points - 1
    verts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    contour = np.zeros(vals.shape[0])
    # outward traversal of the CCW reference triangle: (0,1), (1,2), (2,0)
    for a, b in ((0, 1), (1, 2), (2, 0)):
        pts = verts[a][None] + ((1 + s) / 2)[:, None] * (verts[b] - verts[a])[None]
        tang = (verts[b] - verts[a]) / 2.0
        n_out = np.array([tang[1], -tang[0]])  # outward for CCW traversal
        v, _ = flux_tab_points(p, (p, p, p), (1, 1, 1), pts)
        contour += 2.0 * np.einsum("fpa,a,p->f", v, n_out, srule.weights)
    assert np.abs(vol - contour).max() < 1e-12


def test_piola_identity():
    """Divergence of the mapped function is the reference divergence / detJ."""
    geom = ElementGeometry(np.array([[0.2, 0.1], [1.3, 0.4], [0.5, 1.7]]), (0, 1, 2))
    pts = ref_points(5)
    be = hdiv_basis(2, (3, 3, 3), geom, pts)
    _, ref_div = flux_tab_points(3, (3, 3, 3), geom.flips(), pts)
    assert np.abs(be.flux_div - ref_div / geom.det).max() < 1e-12
    # and against finite differences in physical space
    h = 1e-6
    phys = geom.coords[0] + pts @ geom.jac.T

    def phys_to_ref(xy):
        return np.linalg.solve(geom.jac, (xy - geom.coords[0]).T).T

    f_x1 = hdiv_basis(2, (3, 3, 3), geom, phys_to_ref(phys + [h, 0])).flux
    f_x0 = hdiv_basis(2, (3, 3, 3), geom, phys_to_ref(phys - [h, 0])).flux
    f_y1 = hdiv_basis(2, (3, 3, 3), geom, phys_to_ref(phys + [0, h])).flux
    f_y0 = hdiv_basis(2, (3, 3, 3), geom, phys_to_ref(phys - [0, h])).flux
    fd = (f_x1[..., 0] - f_x0[..., 0] + f_y1[..., 1] - f_y0[..., 1]) / (2 * h)
    assert np.abs(fd - be.flux_div).max() < 1e-5


def test_hierarchical_nesting_pad_with_zeros():
    """An order-p interpolant re-expressed at order p+1 keeps coefficients."""
    pts = ref_points(6)
    p = 2
    vals_p, _ = flux_tab_points(p, (p, p, p), (1, 1, 1), pts)
    vals_q, _ = flux_tab_points(p + 1, (p + 1, p + 1, p + 1), (1, 1, 1), pts)
    from rdmix.fespace.basis import flux_fn_list

    fns_p = flux_fn_list(p, (p, p, p))
    fns_q = flux_fn_list(p + 1, (p + 1, p + 1, p + 1))
    index_q = {fn: i for i, fn in enumerate(fns_q)}
    coef = RNG.standard_normal(len(fns_p))
    field_p = np.einsum("f,fpa->pa", coef, vals_p)
    coef_q = np.zeros(len(fns_q))
    for c, fn in zip(coef, fns_p):
        coef_q[index_q[fn]] = c
    field_q = np.einsum("f,fpa->pa", coef_q, vals_q)
    assert np.abs(field_p - field_q).max() < 1e-12


def test_normal_trace_continuity_mixed_orders():
    from rdmix.mesh import build_mesh, generate_structured
    from rdmix.fespace import build_dof_map, make_orders

    rng = np.random.default_rng(7)
    mesh = generate_structured(3, 3, (0, 0, 1, 1), pattern="crossed")
    v = mesh.vertices.copy()
    interior = np.ones(len(v), bool)
    for e in mesh.boundary_edges:
        interior[mesh.edges[e]] = False
    v[interior] += (rng.random((interior.sum(), 2)) - 0.5) * 0.12
    mesh = build_mesh(v, mesh.elements, mesh.regions)
    dm = build_dof_map(mesh, make_orders(mesh, rng.integers(1, 7, mesh.n_elements)))
    H = rng.standard_normal(dm.n_flux)
    s = np.linspace(-0.9, 0.9, 9)
    verts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])

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
        hv = np.einsum("i,ipa->pa", H[dm.element_flux_dofs(t)], be.flux)
        return hv @ n_glob

    worst = 0.0
    for e in mesh.interior_edges:
        t1, t2 = mesh.edge_elems[e]
        worst = max(worst, np.abs(trace(int(t1), int(e))
                                  - trace(int(t2), int(e))).max())
    assert worst < 1e-10


def test_flux_gram_nonsingular():
    for p in (1, 3, 5):
        rule = quadrature_rule("triangle", 2 * p + 2)
        v, _ = flux_tab(p, (p, p, p), (1, 1, 1), rule)
        G = np.einsum("ipc,jpc,p->ij", v, v, rule.weights)
        ev = np.linalg.eigvalsh(G)
        assert ev[0] > 1e-10


def test_unsupported_order_raises():
    with pytest.raises(B.BasisError):
        flux_tab_points(B.FLUX_DEGREE_CAP + 1, (1, 1, 1), (1, 1, 1), ref_points())
