"""Legacy-VTK and CSV output."""

from __future__ import annotations

import csv

import numpy as np

from ..fespace import scalar_tab
from ..fespace.basis import ElementGeometry, hdiv_basis


def _subdivision_nodes(s: int):
    """Barycentric lattice of a triangle split into s^2 subtriangles."""
    pts = []
    index = {}
    for i in range(s + 1):
        for j in range(s + 1 - i):
            index[(i, j)] = len(pts)
            pts.append((i / s, j / s))
    tris = []
    for i in range(s):
        for j in range(s - i):
            tris.append((index[(i, j)], index[(i + 1, j)], index[(i, j + 1)]))
            if i + j < s - 1:
                tris.append((index[(i + 1, j)], index[(i + 1, j + 1)], index[(i, j + 1)]))
    return np.array(pts), tris


def write_vtk(path, mesh, dofmap, m_vec, h_vec=None, eta=None):
    """Legacy ASCII unstructured grid; per-element duplicated points so the
    discontinuous field renders faithfully; each triangle is split into
    k^2 subtriangles at the element's mass order."""
    points, cells, point_m, point_h, cell_meta = [], [], [], [], []
    for t in range(mesh.n_elements):
        k = max(int(dofmap.orders.k[t]), 1)
        ref, subtris = _subdivision_nodes(k)
        geom = ElementGeometry(mesh.element_coords(t), tuple(mesh.elements[t]))
        phys = geom.coords[0][None, :] + ref @ geom.jac.T
        coefs_m = m_vec[dofmap.element_mass_dofs(t)]
        vals = coefs_m @ scalar_tab(int(dofmap.orders.k[t]), ref)
        if h_vec is not None:
            be = hdiv_basis(int(dofmap.orders.k[t]), dofmap.element_qedges(t),
                            geom, ref)
            hv = np.einsum("i,ipa->pa", h_vec[dofmap.element_flux_dofs(t)], be.flux)
        base = len(points)
        points.extend(phys.tolist())
        point_m.extend(vals.tolist())
        if h_vec is not None:
            point_h.extend(hv.tolist())
        for tri in subtris:
            cells.append(tuple(base + v for v in tri))
            cell_meta.append((int(mesh.regions[t]), int(dofmap.orders.k[t]),
                              float(eta[t]) if eta is not None else 0.0))
    with open(path, "w") as f:
        f.write("# vtk DataFile Version 3.0\nrdmix fields\nASCII\n")
        f.write("DATASET UNSTRUCTURED_GRID\n")
        f.write(f"POINTS {len(points)} double\n")
        for x, y in points:
            f.write(f"{x!r} {y!r} 0.0\n")
        f.write(f"CELLS {len(cells)} {4 * len(cells)}\n")
        for c in cells:
            f.write(f"3 {c[0]} {c[1]} {c[2]}\n")
        f.write(f"CELL_TYPES {len(cells)}\n")
        f.write("5\n" * len(cells))
        f.write(f"CELL_DATA {len(cells)}\n")
        f.write("SCALARS region int 1\nLOOKUP_TABLE default\n")
        f.write("".join(f"{r}\n" for r, _, _ in cell_meta))
        f.write("SCALARS order int 1\nLOOKUP_TABLE default\n")
        f.write("".join(f"{k}\n" for _, k, _ in cell_meta))
        f.write("SCALARS eta double 1\nLOOKUP_TABLE default\n")
        f.write("".join(f"{e!r}\n" for _, _, e in cell_meta))
        f.write(f"POINT_DATA {len(points)}\n")
        f.write("SCALARS m double 1\nLOOKUP_TABLE default\n")
        f.write("".join(f"{v!r}\n" for v in point_m))
        if point_h:
            f.write("VECTORS flux double\n")
            f.write("".join(f"{hx!r} {hy!r} 0.0\n" for hx, hy in point_h))


def format_value(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(float(v))   # plain-float repr even for numpy scalars
    return str(v)


def write_csv(path, fieldnames, records):
    """RFC-4180 CSV with deterministic float formatting."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(fieldnames)
        for rec in records:
            w.writerow([format_value(rec.get(k)) for k in fieldnames])


def read_csv(path):
    with open(path, newline="") as f:
        rd = csv.DictReader(f)
        return list(rd)
