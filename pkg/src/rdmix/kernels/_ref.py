"""NumPy fallback implementations of the tabulation kernels.

Same contract as the compiled `_fast` extension: recurrence-based
tabulation of the degree-ordered Dubiner basis (values and reference
gradients) on the unit triangle, and 1D Legendre values on [-1, 1].
All outputs are unnormalized; L2 scaling happens in the caller.
"""

import numpy as np

BACKEND = "python"


def n_scalar(k: int) -> int:
    return (k + 1) * (k + 2) // 2


def legendre_tab(n: int, s: np.ndarray) -> np.ndarray:
    """Values of P_0..P_n at points s, shape (n+1, len(s))."""
    s = np.asarray(s, dtype=np.float64)
    out = np.empty((n + 1, s.size))
    out[0] = 1.0
    if n >= 1:
        out[1] = s
    for m in range(2, n + 1):
        out[m] = ((2 * m - 1) * s * out[m - 1] - (m - 1) * out[m - 2]) / m
    return out


def _scaled_legendre_uv(k, u, t, want_grad):
    """P-hat_q(u;t) for q=0..k with optional d/du, d/dt tables."""
    npts = u.size
    P = np.empty((k + 1, npts))
    P[0] = 1.0
    if k >= 1:
        P[1] = u
    t2 = t * t
    for n in range(2, k + 1):
        P[n] = ((2 * n - 1) * u * P[n - 1] - (n - 1) * t2 * P[n - 2]) / n
    if not want_grad:
        return P, None, None
    Pu = np.zeros_like(P)
    Pt = np.zeros_like(P)
    if k >= 1:
        Pu[1] = 1.0
    for n in range(2, k + 1):
        Pu[n] = ((2 * n - 1) * (P[n - 1] + u * Pu[n - 1]) - (n - 1) * t2 * Pu[n - 2]) / n
        Pt[n] = ((2 * n - 1) * u * Pt[n - 1] - (n - 1) * (2 * t * P[n - 2] + t2 * Pt[n - 2])) / n
    return P, Pu, Pt


def _jacobi_a0(nmax, a, z, want_grad):
    """P_r^(a,0)(z) for r=0..nmax with optional derivative in z."""
    npts = z.size
    J = np.empty((nmax + 1, npts))
    J[0] = 1.0
    if nmax >= 1:
        J[1] = ((a + 2) * z + a) / 2.0
    for n in range(2, nmax + 1):
        c0 = 2 * n * (n + a) * (2 * n + a - 2)
        c1z = (2 * n + a - 1) * (2 * n + a) * (2 * n + a - 2)
        c1 = (2 * n + a - 1) * a * a
        c2 = 2 * (n + a - 1) * (n - 1) * (2 * n + a)
        J[n] = ((c1z * z + c1) * J[n - 1] - c2 * J[n - 2]) / c0
    if not want_grad:
        return J, None
    Jz = np.zeros_like(J)
    if nmax >= 1:
        Jz[1] = (a + 2) / 2.0
    for n in range(2, nmax + 1):
        c0 = 2 * n * (n + a) * (2 * n + a - 2)
        c1z = (2 * n + a - 1) * (2 * n + a) * (2 * n + a - 2)
        c1 = (2 * n + a - 1) * a * a
        c2 = 2 * (n + a - 1) * (n - 1) * (2 * n + a)
        Jz[n] = (c1z * J[n - 1] + (c1z * z + c1) * Jz[n - 1] - c2 * Jz[n - 2]) / c0
    return J, Jz


def dubiner_tab(k: int, pts: np.ndarray, want_grad: bool = False):
    """Tabulate the Dubiner basis of degree k at reference points (n, 2).

    Returns vals of shape (n_scalar(k), n) or (vals, d/dx, d/dy).
    Basis order: total degree d = 0..k, within a degree q = 0..d.
    """
    pts = np.asarray(pts, dtype=np.float64)
    x = pts[:, 0]
    y = pts[:, 1]
    u = 2.0 * x + y - 1.0
    t = 1.0 - y
    z = 2.0 * y - 1.0
    nb = n_scalar(k)
    vals = np.empty((nb, x.size))
    gx = np.empty((nb, x.size)) if want_grad else None
    gy = np.empty((nb, x.size)) if want_grad else None

    P, Pu, Pt = _scaled_legendre_uv(k, u, t, want_grad)
    for q in range(k + 1):
        J, Jz = _jacobi_a0(k - q, 2 * q + 1, z, want_grad)
        for r in range(k - q + 1):
            d = q + r
            idx = d * (d + 1) // 2 + q
            vals[idx] = P[q] * J[r]
            if want_grad:
                ax = 2.0 * Pu[q]
                ay = Pu[q] - Pt[q]
                gx[idx] = ax * J[r]
                gy[idx] = ay * J[r] + P[q] * (2.0 * Jz[r])
    if want_grad:
        return vals, gx, gy
    return vals
