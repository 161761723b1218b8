"""Exact rational polynomial arithmetic on the reference triangle.

Used once per polynomial order to construct basis coefficient tables; all
runtime evaluation happens in floating point elsewhere. Keeping this layer
in `fractions.Fraction` makes the construction reproducible and lets the
builder assert algebraic identities (zero traces, exact divergences)
instead of trusting floating-point residuals.

Reference triangle: vertices (0,0), (1,0), (0,1); barycentrics
lam0 = 1-x-y, lam1 = x, lam2 = y. Local edges are numbered
0:(0,1), 1:(1,2), 2:(0,2) with the defining vertex order as listed.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import factorial

Coef = dict[tuple[int, int], Fraction]

ZERO: Coef = {}


def poly(c: dict[tuple[int, int], int | Fraction]) -> Coef:
    return {k: Fraction(v) for k, v in c.items() if v != 0}


def p_add(*ps: Coef) -> Coef:
    out: Coef = {}
    for p in ps:
        for k, v in p.items():
            s = out.get(k, Fraction(0)) + v
            if s:
                out[k] = s
            elif k in out:
                del out[k]
    return out


def p_scale(p: Coef, c) -> Coef:
    c = Fraction(c)
    if not c:
        return {}
    return {k: v * c for k, v in p.items()}


def p_mul(p: Coef, q: Coef) -> Coef:
    out: Coef = {}
    for (a1, b1), v1 in p.items():
        for (a2, b2), v2 in q.items():
            k = (a1 + a2, b1 + b2)
            s = out.get(k, Fraction(0)) + v1 * v2
            if s:
                out[k] = s
            elif k in out:
                del out[k]
    return out


def p_diff(p: Coef, var: int) -> Coef:
    out: Coef = {}
    for (a, b), v in p.items():
        if var == 0 and a > 0:
            out[(a - 1, b)] = v * a
        elif var == 1 and b > 0:
            out[(a, b - 1)] = v * b
    return out


def p_degree(p: Coef) -> int:
    return max((a + b for (a, b) in p), default=-1)


def integrate_tri(p: Coef) -> Fraction:
    """Exact integral over the reference triangle: moment a!b!/(a+b+2)!."""
    tot = Fraction(0)
    for (a, b), v in p.items():
        tot += v * Fraction(factorial(a) * factorial(b), factorial(a + b + 2))
    return tot


# barycentric coordinates and their (constant) gradients
LAM = (
    poly({(0, 0): 1, (1, 0): -1, (0, 1): -1}),
    poly({(1, 0): 1}),
    poly({(0, 1): 1}),
)
GRAD_LAM = (
    (Fraction(-1), Fraction(-1)),
    (Fraction(1), Fraction(0)),
    (Fraction(0), Fraction(1)),
)

# local edge -> (defining vertex pair a->b, ordered low-to-high)
EDGE_VERTS = ((0, 1), (1, 2), (0, 2))


@lru_cache(maxsize=None)
def legendre_1d(n: int) -> tuple[Fraction, ...]:
    """Coefficients (ascending powers of s) of the Legendre polynomial P_n."""
    if n == 0:
        return (Fraction(1),)
    if n == 1:
        return (Fraction(0), Fraction(1))
    pm2, pm1 = legendre_1d(n - 2), legendre_1d(n - 1)
    out = [Fraction(0)] * (n + 1)
    for i, c in enumerate(pm1):
        out[i + 1] += Fraction(2 * n - 1, n) * c
    for i, c in enumerate(pm2):
        out[i] -= Fraction(n - 1, n) * c
    return tuple(out)


def scaled_legendre(n: int, x: Coef, t: Coef) -> Coef:
    """P_n-hat(x; t) = t^n P_n(x/t), expanded as a polynomial in (x, t)."""
    if n == 0:
        return poly({(0, 0): 1})
    prev2 = poly({(0, 0): 1})
    prev1 = dict(x)
    if n == 1:
        return prev1
    t2 = p_mul(t, t)
    for m in range(2, n + 1):
        cur = p_add(
            p_scale(p_mul(x, prev1), Fraction(2 * m - 1, m)),
            p_scale(p_mul(t2, prev2), Fraction(-(m - 1), m)),
        )
        prev2, prev1 = prev1, cur
    return prev1


def integrated_legendre(n: int, x: Coef, t: Coef) -> Coef:
    """L_n-hat(x; t) = t^n L_n(x/t) with L_n(s) = int_{-1}^{s} P_{n-1}; n >= 2."""
    assert n >= 2
    pn = scaled_legendre(n, x, t)
    pn2 = p_mul(p_mul(t, t), scaled_legendre(n - 2, x, t))
    return p_scale(p_add(pn, p_scale(pn2, -1)), Fraction(1, 2 * n - 1))


@lru_cache(maxsize=None)
def jacobi_a0_1d(n: int, a: int) -> tuple[Fraction, ...]:
    """Coefficients (ascending powers of z) of the Jacobi polynomial P_n^(a,0)."""
    if n == 0:
        return (Fraction(1),)
    if n == 1:
        return (Fraction(a, 2), Fraction(a + 2, 2))
    pm2, pm1 = jacobi_a0_1d(n - 2, a), jacobi_a0_1d(n - 1, a)
    c0 = Fraction(2 * n * (n + a) * (2 * n + a - 2))
    c1z = Fraction((2 * n + a - 1) * (2 * n + a) * (2 * n + a - 2))
    c1 = Fraction((2 * n + a - 1) * a * a)
    c2 = Fraction(2 * (n + a - 1) * (n - 1) * (2 * n + a))
    out = [Fraction(0)] * (n + 1)
    for i, c in enumerate(pm1):
        out[i + 1] += c1z / c0 * c
        out[i] += c1 / c0 * c
    for i, c in enumerate(pm2):
        out[i] -= c2 / c0 * c
    return tuple(out)


def _subst_1d(coeffs, z: Coef) -> Coef:
    """Evaluate a univariate polynomial (ascending coefficients) at poly z."""
    out: Coef = {}
    zp = poly({(0, 0): 1})
    for c in coeffs:
        out = p_add(out, p_scale(zp, c))
        zp = p_mul(zp, z)
    return out


def dubiner_index(k: int):
    """(q, r) pairs for the degree-ordered Dubiner basis up to degree k."""
    return [(q, d - q) for d in range(k + 1) for q in range(d + 1)]


@lru_cache(maxsize=None)
def dubiner_poly(q: int, r: int) -> Coef:
    """Unnormalized Dubiner polynomial P_q-hat(lam1-lam0; lam1+lam0) * P_r^(2q+1,0)(2*lam2-1)."""
    x = p_add(LAM[1], p_scale(LAM[0], -1))
    t = p_add(LAM[1], LAM[0])
    z = p_add(p_scale(LAM[2], 2), poly({(0, 0): -1}))
    return p_mul(scaled_legendre(q, x, t), _subst_1d(jacobi_a0_1d(r, 2 * q + 1), z))


@lru_cache(maxsize=None)
def dubiner_norm2(q: int, r: int) -> Fraction:
    p = dubiner_poly(q, r)
    return integrate_tri(p_mul(p, p))


def edge_restrict(p: Coef, edge: int) -> tuple[Fraction, ...]:
    """Restrict to local edge as univariate poly in the edge parameter s in [-1,1].

    Parameterization follows the edge's defining vertex order a->b:
    point(s) = v_a + (1+s)/2 * (v_b - v_a).
    """
    verts = ((Fraction(0), Fraction(0)), (Fraction(1), Fraction(0)), (Fraction(0), Fraction(1)))
    a, b = EDGE_VERTS[edge]
    va, vb = verts[a], verts[b]
    # x(s), y(s) as univariate (ascending) coefficient lists
    xs = [va[0] + (vb[0] - va[0]) / 2, (vb[0] - va[0]) / 2]
    ys = [va[1] + (vb[1] - va[1]) / 2, (vb[1] - va[1]) / 2]

    def upow(u, n):
        out = [Fraction(1)]
        for _ in range(n):
            new = [Fraction(0)] * (len(out) + len(u) - 1)
            for i, ci in enumerate(out):
                for j, cj in enumerate(u):
                    new[i + j] += ci * cj
            out = new
        return out

    deg = p_degree(p)
    res = [Fraction(0)] * (deg + 1 if deg >= 0 else 1)
    for (ax, by), v in p.items():
        term = upow(xs, ax)
        term2 = upow(ys, by)
        prod = [Fraction(0)] * (len(term) + len(term2) - 1)
        for i, ci in enumerate(term):
            for j, cj in enumerate(term2):
                prod[i + j] += ci * cj
        for i, c in enumerate(prod):
            if i >= len(res):
                res.extend([Fraction(0)] * (i - len(res) + 1))
            res[i] += v * c
    return tuple(res)


def integrate_seg(u) -> Fraction:
    """Exact integral of a univariate polynomial (ascending coeffs) over [-1,1]."""
    tot = Fraction(0)
    for i, c in enumerate(u):
        if i % 2 == 0:
            tot += c * Fraction(2, i + 1)
    return tot


def umul(u, v):
    out = [Fraction(0)] * (len(u) + len(v) - 1)
    for i, ci in enumerate(u):
        for j, cj in enumerate(v):
            out[i + j] += ci * cj
    return out


def edge_param_normal(edge: int) -> tuple[Fraction, Fraction]:
    """Parameter-scaled edge normal R(dx/ds) with R(v) = (v_y, -v_x)."""
    verts = ((Fraction(0), Fraction(0)), (Fraction(1), Fraction(0)), (Fraction(0), Fraction(1)))
    a, b = EDGE_VERTS[edge]
    tx = (verts[b][0] - verts[a][0]) / 2
    ty = (verts[b][1] - verts[a][1]) / 2
    return (ty, -tx)
