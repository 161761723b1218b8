"""Triangular mesh with edge adjacency, orientation signs and tags.

Conventions:
* element vertex triples are stored counter-clockwise (repaired on load);
* the canonical direction of every edge runs from its lower to its
  higher vertex index;
* orientation_sign(element, local_edge) is +1 when the element's CCW
  traversal of that edge agrees with the canonical direction, so the two
  elements sharing an interior edge always carry opposite signs.

Local edges of a triangle (v0, v1, v2) are 0:(v0,v1), 1:(v1,v2),
2:(v2,v0) in traversal order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class MeshError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Mesh:
    vertices: np.ndarray          # (nv, 2) float
    elements: np.ndarray          # (nt, 3) int, CCW
    regions: np.ndarray           # (nt,) int
    edges: np.ndarray             # (ne, 2) int, low < high
    elem_edges: np.ndarray        # (nt, 3) int, edge index per local edge
    orient: np.ndarray            # (nt, 3) int, +-1 per local edge
    edge_elems: np.ndarray        # (ne, 2) int, second is -1 on the boundary
    boundary_tags: dict = field(default_factory=dict)   # edge index -> tag

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_elements(self):
        return len(self.elements)

    @property
    def n_edges(self):
        return len(self.edges)

    @property
    def interior_edges(self) -> np.ndarray:
        return np.nonzero(self.edge_elems[:, 1] >= 0)[0]

    @property
    def boundary_edges(self) -> np.ndarray:
        return np.nonzero(self.edge_elems[:, 1] < 0)[0]

    def edge_lengths(self) -> np.ndarray:
        d = self.vertices[self.edges[:, 1]] - self.vertices[self.edges[:, 0]]
        return np.hypot(d[:, 0], d[:, 1])

    @property
    def h_max(self) -> float:
        return float(self.edge_lengths().max())

    def element_coords(self, k: int) -> np.ndarray:
        return self.vertices[self.elements[k]]

    def areas(self) -> np.ndarray:
        v = self.vertices[self.elements]
        return 0.5 * ((v[:, 1, 0] - v[:, 0, 0]) * (v[:, 2, 1] - v[:, 0, 1])
                      - (v[:, 2, 0] - v[:, 0, 0]) * (v[:, 1, 1] - v[:, 0, 1]))

    def edges_with_tag(self, tags) -> np.ndarray:
        tags = set(tags)
        return np.array(sorted(e for e, t in self.boundary_tags.items() if t in tags),
                        dtype=int)


def build_mesh(vertices, elements, regions=None, boundary_tags=None) -> Mesh:
    """Assemble adjacency from raw vertex/element arrays, enforcing invariants."""
    vertices = np.asarray(vertices, dtype=float)
    elements = np.asarray(elements, dtype=int)
    if elements.ndim != 2 or elements.shape[1] != 3:
        raise MeshError("elements must be vertex triples")
    if elements.size and (elements.min() < 0 or elements.max() >= len(vertices)):
        raise MeshError("dangling vertex index in element list")
    regions = (np.zeros(len(elements), dtype=int) if regions is None
               else np.asarray(regions, dtype=int))

    # enforce CCW by swapping the last two vertices where needed
    v = vertices[elements]
    area2 = ((v[:, 1, 0] - v[:, 0, 0]) * (v[:, 2, 1] - v[:, 0, 1])
             - (v[:, 2, 0] - v[:, 0, 0]) * (v[:, 1, 1] - v[:, 0, 1]))
    if np.any(area2 == 0.0):
        raise MeshError(f"degenerate element {int(np.nonzero(area2 == 0.0)[0][0])}")
    flip = area2 < 0
    elements = elements.copy()
    elements[flip, 1], elements[flip, 2] = elements[flip, 2], elements[flip, 1]

    edge_index: dict[tuple[int, int], int] = {}
    edge_list: list[tuple[int, int]] = []
    elem_edges = np.empty((len(elements), 3), dtype=int)
    orient = np.empty((len(elements), 3), dtype=int)
    for t, tri in enumerate(elements):
        for le in range(3):
            a, b = int(tri[le]), int(tri[(le + 1) % 3])
            key = (a, b) if a < b else (b, a)
            idx = edge_index.get(key)
            if idx is None:
                idx = len(edge_list)
                edge_index[key] = idx
                edge_list.append(key)
            elem_edges[t, le] = idx
            orient[t, le] = 1 if a < b else -1
    edges = np.array(edge_list, dtype=int).reshape(-1, 2)

    edge_elems = np.full((len(edges), 2), -1, dtype=int)
    for t in range(len(elements)):
        for le in range(3):
            e = elem_edges[t, le]
            if edge_elems[e, 0] < 0:
                edge_elems[e, 0] = t
            elif edge_elems[e, 1] < 0:
                edge_elems[e, 1] = t
            else:
                raise MeshError(f"edge {e} shared by more than two elements")

    tags = {}
    if boundary_tags:
        for (a, b), tag in boundary_tags.items():
            key = (a, b) if a < b else (b, a)
            e = edge_index.get(key)
            if e is None:
                raise MeshError(f"boundary segment {key} is not a mesh edge")
            if edge_elems[e, 1] >= 0:
                raise MeshError(f"boundary tag on interior edge {key}")
            tags[e] = int(tag)
    # untagged boundary edges default to tag 0
    for e in np.nonzero(edge_elems[:, 1] < 0)[0]:
        tags.setdefault(int(e), 0)

    return Mesh(vertices, elements, regions, edges, elem_edges, orient,
                edge_elems, tags)


def generate_structured(nx: int, ny: int, bbox=(0.0, 0.0, 1.0, 1.0),
                        pattern: str = "right") -> Mesh:
    """Uniform triangulation of a rectangle with 2*nx*ny triangles.

    pattern "right" uses the same diagonal everywhere; "crossed"
    alternates the diagonal in a checker pattern.
    """
    if nx < 1 or ny < 1:
        raise MeshError("nx and ny must be at least 1")
    x0, y0, x1, y1 = map(float, bbox)
    if x1 <= x0 or y1 <= y0:
        raise MeshError("degenerate bounding box")
    xs = np.linspace(x0, x1, nx + 1)
    ys = np.linspace(y0, y1, ny + 1)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    verts = np.column_stack([X.ravel(), Y.ravel()])

    def vid(i, j):
        return i * (ny + 1) + j

    tris = []
    for i in range(nx):
        for j in range(ny):
            a, b = vid(i, j), vid(i + 1, j)
            c, d = vid(i + 1, j + 1), vid(i, j + 1)
            if pattern == "crossed" and (i + j) % 2 == 1:
                tris.append((a, b, d))
                tris.append((b, c, d))
            else:
                tris.append((a, b, c))
                tris.append((a, c, d))
    return build_mesh(verts, np.array(tris))


def tag_boundary(mesh: Mesh, tag_fn) -> Mesh:
    """Re-tag boundary edges; tag_fn(midpoint) -> int."""
    tags = {}
    for e in mesh.boundary_edges:
        mid = mesh.vertices[mesh.edges[e]].mean(axis=0)
        tags[int(e)] = int(tag_fn(mid))
    return Mesh(mesh.vertices, mesh.elements, mesh.regions, mesh.edges,
                mesh.elem_edges, mesh.orient, mesh.edge_elems, tags)


def with_regions(mesh: Mesh, region_fn) -> Mesh:
    """Assign region tags from element centroids; region_fn(xy) -> int."""
    cents = mesh.vertices[mesh.elements].mean(axis=1)
    regions = np.array([int(region_fn(c)) for c in cents], dtype=int)
    return Mesh(mesh.vertices, mesh.elements, regions, mesh.edges,
                mesh.elem_edges, mesh.orient, mesh.edge_elems,
                dict(mesh.boundary_tags))


# ---------------------------------------------------------------------------
# point location
# ---------------------------------------------------------------------------

def locate_point(mesh: Mesh, point) -> int:
    """Element containing the point; ties broken by lowest element index."""
    p = np.asarray(point, dtype=float)
    v = mesh.vertices[mesh.elements]
    d = p - v[:, 0]
    j = np.stack([v[:, 1] - v[:, 0], v[:, 2] - v[:, 0]], axis=-1)
    det = j[:, 0, 0] * j[:, 1, 1] - j[:, 0, 1] * j[:, 1, 0]
    xi = (j[:, 1, 1] * d[:, 0] - j[:, 0, 1] * d[:, 1]) / det
    eta = (-j[:, 1, 0] * d[:, 0] + j[:, 0, 0] * d[:, 1]) / det
    tol = 1e-12
    inside = (xi >= -tol) & (eta >= -tol) & (xi + eta <= 1 + tol)
    hits = np.nonzero(inside)[0]
    if hits.size == 0:
        raise MeshError(f"point {tuple(p)} outside all elements")
    return int(hits[0])


def region_lookup(mesh: Mesh, point) -> int:
    return int(mesh.regions[locate_point(mesh, point)])


def reference_coords(mesh: Mesh, elem: int, point) -> np.ndarray:
    v = mesh.element_coords(elem)
    j = np.column_stack([v[1] - v[0], v[2] - v[0]])
    return np.linalg.solve(j, np.asarray(point, dtype=float) - v[0])


# ---------------------------------------------------------------------------
# file formats
# ---------------------------------------------------------------------------

def load_mesh(path: str, fmt: str | None = None) -> Mesh:
    """Read a mesh file; format inferred from the first line when omitted."""
    with open(path) as f:
        text = f.read()
    if fmt is None:
        head = text.lstrip().splitlines()[0] if text.strip() else ""
        fmt = "native-text" if head.startswith("rdmix-mesh") else "gmsh-ascii-v2"
    if fmt == "native-text":
        return _parse_native(text)
    if fmt == "gmsh-ascii-v2":
        return _parse_gmsh2(text)
    raise MeshError(f"unknown mesh format {fmt!r}")


def _parse_native(text: str) -> Mesh:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].split() != ["rdmix-mesh", "1"]:
        raise MeshError("bad native mesh header")
    pos = 1

    def expect(keyword):
        nonlocal pos
        parts = lines[pos].split()
        if len(parts) != 2 or parts[0] != keyword:
            raise MeshError(f"expected '{keyword} N' at line {pos + 1}")
        pos += 1
        return int(parts[1])

    nv = expect("vertices")
    verts = np.array([[float(w) for w in lines[pos + i].split()] for i in range(nv)])
    pos += nv
    nt = expect("triangles")
    tri_rows = [lines[pos + i].split() for i in range(nt)]
    pos += nt
    if any(len(r) != 4 for r in tri_rows):
        raise MeshError("triangle lines must be 'v0 v1 v2 region'")
    tris = np.array([[int(w) for w in r[:3]] for r in tri_rows])
    regions = np.array([int(r[3]) for r in tri_rows])
    btags = {}
    if pos < len(lines):
        nb = expect("boundary")
        for i in range(nb):
            a, b, tag = (int(w) for w in lines[pos + i].split())
            btags[(a, b)] = tag
        pos += nb
    return build_mesh(verts, tris, regions, btags)


def save_native(mesh: Mesh, path: str) -> None:
    with open(path, "w") as f:
        f.write("rdmix-mesh 1\n")
        f.write(f"vertices {mesh.n_vertices}\n")
        for x, y in mesh.vertices:
            f.write(f"{float(x)!r} {float(y)!r}\n")
        f.write(f"triangles {mesh.n_elements}\n")
        for tri, reg in zip(mesh.elements, mesh.regions):
            f.write(f"{tri[0]} {tri[1]} {tri[2]} {reg}\n")
        bnd = mesh.boundary_edges
        f.write(f"boundary {len(bnd)}\n")
        for e in bnd:
            a, b = mesh.edges[e]
            f.write(f"{a} {b} {mesh.boundary_tags[int(e)]}\n")


def _parse_gmsh2(text: str) -> Mesh:
    lines = text.splitlines()
    try:
        i_nodes = lines.index("$Nodes")
        i_elems = lines.index("$Elements")
    except ValueError as exc:
        raise MeshError("missing $Nodes/$Elements block") from exc
    nv = int(lines[i_nodes + 1])
    verts = np.empty((nv, 2))
    remap = {}
    for i in range(nv):
        parts = lines[i_nodes + 2 + i].split()
        remap[int(parts[0])] = i
        verts[i] = [float(parts[1]), float(parts[2])]
    ne = int(lines[i_elems + 1])
    tris, regions, btags = [], [], {}
    for i in range(ne):
        parts = [int(w) for w in lines[i_elems + 2 + i].split()]
        etype, ntags = parts[1], parts[2]
        tags = parts[3:3 + ntags]
        conn = parts[3 + ntags:]
        phys = tags[0] if tags else 0
        if etype == 2:
            tris.append([remap[c] for c in conn])
            regions.append(phys)
        elif etype == 1:
            a, b = (remap[c] for c in conn)
            btags[(a, b)] = phys
        elif etype == 15:
            continue  # stray point elements are harmless
        else:
            raise MeshError(f"non-triangle cell (gmsh element type {etype})")
    if not tris:
        raise MeshError("gmsh file contains no triangles")
    return build_mesh(verts, np.array(tris), np.array(regions), btags)
