"""Hierarchical scalar (L2) and vector (H(div)) bases on triangles.

Scalar field: the degree-ordered Dubiner basis, L2-normalized on the
reference triangle. It is hierarchical by construction: the leading
(j+1)(j+2)/2 functions span P_j.

Flux field: a full [P_p]^2 basis assembled from three families, each
defined once per (entity, level) so the basis nests across orders:

* edge functions, one per edge and degree j = 0..q_e. The level-0
  function is the scaled rotated Whitney function (constant normal
  trace); level j >= 1 is the rotated gradient of a scaled integrated
  Legendre function, whose normal trace on the owning edge is the
  Legendre polynomial P_j of the edge parameter and zero on the others.
* interior rotated-gradient bubbles curl(lam0*lam1*lam2 * phi_i), which
  are divergence free with zero normal trace everywhere.
* interior completion bubbles with zero normal trace and divergence
  equal to a (zero-mean) scalar basis function, computed once per level
  as the exact minimum-L2-norm solution of the trace/divergence
  constraints.

All construction runs in exact rational arithmetic (see _exact) and is
verified algebraically before being frozen into float coefficient
tables over the Dubiner generators. Runtime evaluation is therefore a
tabulation of Dubiner values followed by one matrix product.

Edge orientation: every edge function is defined with respect to the
edge's global low-to-high vertex direction, so normal traces of shared
dofs match across elements identically. Reversing the defining order of
edge level j flips the function by (-1)**(j+1); tabulation applies that
sign from the element's global vertex numbers.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import zip_longest

import numpy as np

from .. import kernels
from . import _exact as ex
from .quadrature import QuadratureRule

FLUX_DEGREE_CAP = 9    # mass ORDER_MAX + 1


class BasisError(ValueError):
    pass


def n_scalar(k: int) -> int:
    return (k + 1) * (k + 2) // 2


def n_flux(p: int) -> int:
    return (p + 1) * (p + 2)


# ---------------------------------------------------------------------------
# exact construction
# ---------------------------------------------------------------------------

def _rot(fx, fy):
    """R(f) = (f_y, -f_x): maps gradients to divergence-free fields."""
    return fy, ex.p_scale(fx, -1)


def _grad(p):
    return ex.p_diff(p, 0), ex.p_diff(p, 1)


@lru_cache(maxsize=None)
def _dubiner_norms(max_deg: int):
    return [ex.dubiner_norm2(q, r) for (q, r) in ex.dubiner_index(max_deg)]


def _project_scalar(p, max_deg: int) -> dict[int, Fraction]:
    """Exact Dubiner coefficients of a polynomial of degree <= max_deg."""
    idx = ex.dubiner_index(max_deg)
    norms = _dubiner_norms(max_deg)
    out: dict[int, Fraction] = {}
    rec = {}
    for i, (q, r) in enumerate(idx):
        phi = ex.dubiner_poly(q, r)
        c = ex.integrate_tri(ex.p_mul(p, phi)) / norms[i]
        if c:
            out[i] = c
            rec = ex.p_add(rec, ex.p_scale(phi, c))
    if ex.p_add(rec, ex.p_scale(p, -1)):
        raise BasisError("exact projection failed: polynomial outside generator span")
    return out


def _trace_moments(fx, fy, edge: int, max_level: int):
    """Legendre moments of the parameter-normal trace on a local edge."""
    nx, ny = ex.edge_param_normal(edge)
    tr = [a * nx + b * ny for a, b in zip_longest(
        ex.edge_restrict(fx, edge),
        ex.edge_restrict(fy, edge),
        fillvalue=Fraction(0),
    )]
    return [ex.integrate_seg(ex.umul(tr, ex.legendre_1d(j))) for j in range(max_level + 1)]


@dataclass(frozen=True)
class FluxFn:
    """One reference basis function in exact Dubiner coordinates."""
    coef: tuple          # ({i: Fraction} for x-component, same for y)
    div: dict            # {i: Fraction} Dubiner coefficients of the divergence
    degree: int          # polynomial degree of the vector field


def _make_flux_fn(fx, fy, check_edges=(), check_div=None) -> FluxFn:
    deg = max(ex.p_degree(fx), ex.p_degree(fy), 0)
    dv = ex.p_add(ex.p_diff(fx, 0), ex.p_diff(fy, 1))
    for e, levels, expect in check_edges:
        mom = _trace_moments(fx, fy, e, levels)
        for j, m in enumerate(mom):
            want = expect[j] if expect else Fraction(0)
            if m != want:
                raise BasisError(f"edge {e} trace moment {j}: {m} != {want}")
    if check_div is not None and ex.p_add(dv, ex.p_scale(check_div, -1)):
        raise BasisError("divergence mismatch in construction")
    div_deg = max(ex.p_degree(dv), 0)
    return FluxFn(
        coef=(_project_scalar(fx, deg), _project_scalar(fy, deg)),
        div=_project_scalar(dv, div_deg) if dv else {},
        degree=deg,
    )


@lru_cache(maxsize=None)
def _edge_fn(edge: int, level: int) -> FluxFn:
    """Edge function; normal trace P_level on its own edge, zero elsewhere."""
    a, b = ex.EDGE_VERTS[edge]
    if level == 0:
        wx = ex.p_add(ex.p_scale(ex.LAM[a], ex.GRAD_LAM[b][0]),
                      ex.p_scale(ex.LAM[b], -ex.GRAD_LAM[a][0]))
        wy = ex.p_add(ex.p_scale(ex.LAM[a], ex.GRAD_LAM[b][1]),
                      ex.p_scale(ex.LAM[b], -ex.GRAD_LAM[a][1]))
        fx, fy = _rot(ex.p_scale(wx, 2), ex.p_scale(wy, 2))
    else:
        u = ex.integrated_legendre(
            level + 1,
            ex.p_add(ex.LAM[b], ex.p_scale(ex.LAM[a], -1)),
            ex.p_add(ex.LAM[a], ex.LAM[b]),
        )
        fx, fy = _rot(*_grad(u))
    # own edge: moments of P_level against P_j; other edges: zero trace
    own = [Fraction(2, 2 * level + 1) if j == level else Fraction(0)
           for j in range(level + 1)]
    checks = [(e, level, own if e == edge else None) for e in range(3)]
    return _make_flux_fn(fx, fy, check_edges=checks,
                         check_div={} if level > 0 else None)


@lru_cache(maxsize=None)
def _bubble_curl_fn(i: int) -> FluxFn:
    """Divergence-free interior bubble for scalar index i."""
    q, r = ex.dubiner_index(FLUX_DEGREE_CAP)[i]
    bubble = ex.p_mul(ex.p_mul(ex.LAM[0], ex.LAM[1]), ex.LAM[2])
    fx, fy = _rot(*_grad(ex.p_mul(bubble, ex.dubiner_poly(q, r))))
    checks = [(e, q + r + 2, None) for e in range(3)]
    return _make_flux_fn(fx, fy, check_edges=checks, check_div={})


def _exact_inverse(A):
    """Gauss-Jordan inverse of a square Fraction matrix."""
    n = len(A)
    M = [row[:] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(A)]
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(M[r][col]))
        if M[piv][col] == 0:
            raise BasisError("singular constraint system in completion solve")
        M[col], M[piv] = M[piv], M[col]
        inv = Fraction(1) / M[col][col]
        M[col] = [v * inv for v in M[col]]
        for r in range(n):
            if r != col and M[r][col]:
                f = M[r][col]
                M[r] = [v - f * w for v, w in zip(M[r], M[col])]
    return [row[n:] for row in M]


@lru_cache(maxsize=None)
def _completion_system(deg: int):
    """Constraint matrix, weights and Gram inverse for completion bubbles.

    Generators: vector Dubiner fields of degree <= deg. Rows: zero
    normal-trace Legendre moments (levels 0..deg per edge) followed by
    divergence coordinates on scalar indices 1..n_scalar(deg-1)-1 (the
    index-0 row is implied by the divergence theorem and dropped).
    """
    idx = ex.dubiner_index(deg)
    norms = _dubiner_norms(deg)
    gens = []
    for comp in range(2):
        for i, (q, r) in enumerate(idx):
            phi = ex.dubiner_poly(q, r)
            fx = phi if comp == 0 else {}
            fy = phi if comp == 1 else {}
            gens.append((fx, fy, norms[i]))
    rows = []
    for e in range(3):
        moms = [_trace_moments(fx, fy, e, deg) for fx, fy, _ in gens]
        for j in range(deg + 1):
            rows.append([m[j] for m in moms])
    n_div = n_scalar(deg - 1)
    div_coords = []
    for fx, fy, _ in gens:
        dv = ex.p_add(ex.p_diff(fx, 0), ex.p_diff(fy, 1))
        div_coords.append(_project_scalar(dv, deg - 1) if dv else {})
    for i in range(1, n_div):
        rows.append([dc.get(i, Fraction(0)) for dc in div_coords])
    weights = [g[2] for g in gens]
    awat = [
        [sum(ra[g] * rb[g] / weights[g] for g in range(len(gens)) if ra[g] and rb[g])
         for rb in rows]
        for ra in rows
    ]
    return rows, weights, _exact_inverse(awat), 3 * (deg + 1)


@lru_cache(maxsize=None)
def _bubble_div_fn(i: int) -> FluxFn:
    """Zero-trace interior bubble whose divergence is scalar basis fn i (i >= 1)."""
    q, r = ex.dubiner_index(FLUX_DEGREE_CAP)[i]
    deg = q + r + 1
    rows, weights, gram_inv, n_trace = _completion_system(deg)
    m = len(rows)
    b = [Fraction(0)] * m
    b[n_trace + i - 1] = Fraction(1)
    y = [sum(gram_inv[r_][c] * b[c] for c in range(m) if b[c]) for r_ in range(m)]
    coefs = [sum(rows[r_][g] * y[r_] for r_ in range(m)) / weights[g]
             for g in range(len(weights))]
    idx = ex.dubiner_index(deg)
    nsc = len(idx)
    fx, fy = {}, {}
    for g, c in enumerate(coefs):
        if not c:
            continue
        comp, si = divmod(g, nsc)
        phi = ex.p_scale(ex.dubiner_poly(*idx[si]), c)
        if comp == 0:
            fx = ex.p_add(fx, phi)
        else:
            fy = ex.p_add(fy, phi)
    checks = [(e, deg, None) for e in range(3)]
    return _make_flux_fn(fx, fy, check_edges=checks,
                         check_div=ex.dubiner_poly(q, r))


# ---------------------------------------------------------------------------
# float tables
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _norm_scale(max_deg: int) -> np.ndarray:
    """Scaling that makes the constant basis function exactly 1.

    phi_i / sqrt(2 |phi_i|^2) is orthogonal with reference Gram I/2, so
    mass matrices are |K| * I/..., and the k = 0 function is identically 1.
    """
    return np.sqrt(2.0 * np.array([float(n) for n in _dubiner_norms(max_deg)]))


def _cache_dir():
    root = os.environ.get("RDMIX_CACHE_DIR") or os.path.join(
        os.path.expanduser("~"), ".cache", "rdmix"
    )
    os.makedirs(root, exist_ok=True)
    return root


@lru_cache(maxsize=None)
def _flux_fn_float(kind: str, a: int, b: int = 0):
    """Float coefficient row (2, nsc) and divergence row in normalized coords.

    The exact construction of high-order completion bubbles takes seconds,
    so frozen tables are cached on disk (they are deterministic).
    """
    path = os.path.join(_cache_dir(), f"fluxfn-v2-{kind}-{a}-{b}.npz")
    try:
        with np.load(path) as z:
            return z["coef"], z["div"], int(z["deg"])
    except (OSError, KeyError):
        pass
    if kind == "edge":
        fn = _edge_fn(a, b)
    elif kind == "curl":
        fn = _bubble_curl_fn(a)
    elif kind == "divc":
        fn = _bubble_div_fn(a)
    else:
        raise BasisError(f"unknown flux function kind {kind!r}")
    scale = _norm_scale(FLUX_DEGREE_CAP)
    nsc = n_scalar(fn.degree)
    coef = np.zeros((2, nsc))
    for comp in range(2):
        for i, c in fn.coef[comp].items():
            coef[comp, i] = float(c) * scale[i]
    ndv = n_scalar(max(fn.degree - 1, 0))
    dv = np.zeros(ndv)
    for i, c in fn.div.items():
        dv[i] = float(c) * scale[i]
    try:
        tmp = path + f".tmp{os.getpid()}"
        np.savez(tmp, coef=coef, div=dv, deg=fn.degree)
        os.replace(tmp + ".npz" if os.path.exists(tmp + ".npz") else tmp, path)
    except OSError:
        pass
    return coef, dv, fn.degree


def interior_fn_keys(p: int):
    """Interior basis functions for flux order p, nested across orders.

    Sorted so the order-p list is a prefix of the order-(p+1) list.
    """
    keys = []
    idx = ex.dubiner_index(FLUX_DEGREE_CAP)
    for i, (q, r) in enumerate(idx):
        d = q + r
        if d + 2 <= p:
            keys.append((d + 2, 0, i, "curl"))
        if i >= 1 and d + 1 <= p:
            keys.append((d + 1, 1, i, "divc"))
    keys.sort()
    return [(kind, i) for (_, _, i, kind) in keys]


def n_interior(p: int) -> int:
    return p * p - 1


def scalar_tab(k: int, pts: np.ndarray, want_grad: bool = False):
    """Normalized scalar basis values (and reference gradients) at points."""
    scale = 1.0 / _norm_scale(max(k, 1))[: n_scalar(k), None]
    if want_grad:
        v, gx, gy = kernels.dubiner_tab(k, pts, True)
        return v * scale, gx * scale, gy * scale
    return kernels.dubiner_tab(k, pts, False) * scale


@lru_cache(maxsize=None)
def _scalar_tab_rule(k: int, rule: QuadratureRule, want_grad: bool):
    return scalar_tab(k, rule.xy, want_grad)


def scalar_tab_rule(k: int, rule: QuadratureRule, want_grad: bool = False):
    return _scalar_tab_rule(k, rule, want_grad)


def flux_fn_list(p: int, qedges: tuple[int, int, int]):
    """(kind, entity, level) descriptors of the local flux basis.

    Layout: edge 0 levels 0..q0, edge 1, edge 2, then interior functions
    of the element's own order p.
    """
    if not (1 <= p <= FLUX_DEGREE_CAP):
        raise BasisError(f"flux order {p} outside supported range 1..{FLUX_DEGREE_CAP}")
    if max(qedges) > FLUX_DEGREE_CAP:
        raise BasisError(f"edge order {max(qedges)} above cap {FLUX_DEGREE_CAP}")
    fns = []
    for e in range(3):
        fns.extend(("edge", e, j) for j in range(qedges[e] + 1))
    fns.extend((kind, i, 0) for kind, i in interior_fn_keys(p))
    return fns


@lru_cache(maxsize=None)
def flux_tab(p: int, qedges: tuple, flips: tuple, rule: QuadratureRule):
    """Reference tabulation of the local flux basis at a quadrature rule.

    Returns (vals, divs) with shapes (nfn, npts, 2) and (nfn, npts).
    `flips[e]` is +1 when the element's local edge runs low-to-high in
    global vertex numbers, else -1.
    """
    return flux_tab_points(p, qedges, flips, rule.xy)


def flux_tab_points(p: int, qedges, flips, pts: np.ndarray):
    fns = flux_fn_list(p, tuple(qedges))
    rows = []
    for kind, a, b in fns:
        coef, dv, deg = _flux_fn_float(kind, a, b)
        sign = 1.0
        if kind == "edge" and flips[a] < 0:
            sign = (-1.0) ** (b + 1)
        rows.append((coef * sign, dv * sign, deg))
    max_deg = max(r[2] for r in rows)
    dub = kernels.dubiner_tab(max_deg, pts, False)
    scale = 1.0 / _norm_scale(max(max_deg, 1))[: dub.shape[0], None]
    dub = dub * scale
    npts = pts.shape[0]
    nfn = len(rows)
    vals = np.zeros((nfn, npts, 2))
    divs = np.zeros((nfn, npts))
    for f, (coef, dv, _) in enumerate(rows):
        vals[f, :, 0] = coef[0] @ dub[: coef.shape[1]]
        vals[f, :, 1] = coef[1] @ dub[: coef.shape[1]]
        if dv.size:
            divs[f] = dv @ dub[: dv.size]
    return vals, divs


# ---------------------------------------------------------------------------
# per-element evaluation (Piola)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ElementGeometry:
    coords: np.ndarray        # (3, 2) physical vertex coordinates, CCW
    vertex_ids: tuple         # global vertex numbers (orients shared edges)

    @property
    def jac(self) -> np.ndarray:
        return np.column_stack([self.coords[1] - self.coords[0],
                                self.coords[2] - self.coords[0]])

    @property
    def det(self) -> float:
        j = self.jac
        return j[0, 0] * j[1, 1] - j[0, 1] * j[1, 0]

    def flips(self) -> tuple:
        g = self.vertex_ids
        return tuple(1 if g[a] < g[b] else -1 for a, b in ex.EDGE_VERTS)


@dataclass(frozen=True)
class BasisEval:
    """Physical-space basis data at reference points of one element."""
    scalar: np.ndarray        # (n_mass, npts)
    flux: np.ndarray          # (n_flux, npts, 2), Piola-mapped
    flux_div: np.ndarray      # (n_flux, npts), divergence (1/detJ scaling)
    jac: np.ndarray
    det: float


def hdiv_basis(k: int, qedges, geom: ElementGeometry, pts: np.ndarray) -> BasisEval:
    """Evaluate mass and flux bases of one element at reference points."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    p = k + 1
    ref_v, ref_d = flux_tab_points(p, tuple(qedges), geom.flips(), pts)
    jac, det = geom.jac, geom.det
    phys = np.einsum("ab,fpb->fpa", jac / det, ref_v)
    return BasisEval(
        scalar=scalar_tab(k, pts),
        flux=phys,
        flux_div=ref_d / det,
        jac=jac,
        det=det,
    )
