"""Pointwise field evaluation and level-set wavefront tracking."""

from __future__ import annotations

import numpy as np

from ..fespace import scalar_tab


class FieldEvaluator:
    """Evaluate the discontinuous mass field at arbitrary points."""

    def __init__(self, mesh, dofmap, m_vec):
        self.mesh = mesh
        self.dofmap = dofmap
        self.m = np.asarray(m_vec, dtype=float)
        v = mesh.vertices[mesh.elements]
        self.origin = v[:, 0]
        jac = np.stack([v[:, 1] - v[:, 0], v[:, 2] - v[:, 0]], axis=-1)
        det = jac[:, 0, 0] * jac[:, 1, 1] - jac[:, 0, 1] * jac[:, 1, 0]
        inv = np.empty_like(jac)
        inv[:, 0, 0] = jac[:, 1, 1] / det
        inv[:, 0, 1] = -jac[:, 0, 1] / det
        inv[:, 1, 0] = -jac[:, 1, 0] / det
        inv[:, 1, 1] = jac[:, 0, 0] / det
        self.inv_jac = inv

    def locate(self, pts) -> np.ndarray:
        """Containing element per point (lowest index on ties), -1 outside."""
        pts = np.atleast_2d(pts)
        d = pts[None, :, :] - self.origin[:, None, :]
        ref = np.einsum("tab,tpb->tpa", self.inv_jac, d)
        tol = 1e-10
        inside = ((ref[..., 0] >= -tol) & (ref[..., 1] >= -tol)
                  & (ref.sum(axis=-1) <= 1 + tol))
        out = np.full(pts.shape[0], -1, dtype=int)
        for p in range(pts.shape[0]):
            hits = np.nonzero(inside[:, p])[0]
            if hits.size:
                out[p] = hits[0]
        return out

    def __call__(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        elems = self.locate(pts)
        if np.any(elems < 0):
            bad = pts[elems < 0][0]
            raise ValueError(f"point {tuple(bad)} outside the mesh")
        vals = np.empty(pts.shape[0])
        for p, t in enumerate(elems):
            ref = self.inv_jac[t] @ (pts[p] - self.origin[t])
            tab = scalar_tab(int(self.dofmap.orders.k[t]), ref[None, :])
            vals[p] = self.m[self.dofmap.element_mass_dofs(int(t))] @ tab[:, 0]
        return vals


def track_wavefront(evaluator: FieldEvaluator, level: float, axis: str = "x",
                    n_lines: int = 9, n_samples: int = 400) -> float:
    """Furthest coordinate along the axis where the field crosses `level`.

    Scans sampling lines across the domain, brackets the outermost sign
    change on each line and refines it by bisection on the element-local
    polynomial; returns the max over lines.
    """
    mesh = evaluator.mesh
    lo = mesh.vertices.min(axis=0)
    hi = mesh.vertices.max(axis=0)
    margin = 1e-9 * np.hypot(*(hi - lo))
    ia = 0 if axis == "x" else 1
    ib = 1 - ia
    best = None
    lines = np.linspace(lo[ib] + margin, hi[ib] - margin, n_lines + 2)[1:-1]
    coords = np.linspace(lo[ia] + margin, hi[ia] - margin, n_samples)
    for c in lines:
        pts = np.empty((n_samples, 2))
        pts[:, ia] = coords
        pts[:, ib] = c
        vals = evaluator(pts) - level
        crossings = np.nonzero(vals[:-1] * vals[1:] <= 0)[0]
        crossings = [i for i in crossings if vals[i] != 0 or vals[i + 1] != 0]
        if not crossings:
            continue
        i = crossings[-1]
        a, b = coords[i], coords[i + 1]
        fa = vals[i]
        for _ in range(60):
            mid = 0.5 * (a + b)
            pm = np.array([[mid, c]]) if ia == 0 else np.array([[c, mid]])
            fm = float(evaluator(pm)[0]) - level
            if fa * fm <= 0:
                b = mid
            else:
                a, fa = mid, fm
            if b - a < 1e-12 * max(1.0, abs(b)):
                break
        pos = 0.5 * (a + b)
        best = pos if best is None else max(best, pos)
    if best is None:
        raise ValueError(f"field does not attain level {level} on any sampling line")
    return float(best)
