"""Per-entity polynomial orders and global dof numbering.

Mass dofs live on elements only (the L2 space is non-conforming); flux
dofs live on edges (shared, q_e+1 hierarchical levels each) followed by
element interiors (p_K^2 - 1 functions). Numbering is by entity index
then hierarchical level, so raising an order extends blocks in place.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..mesh import Mesh
from .basis import FLUX_DEGREE_CAP, n_interior, n_scalar

ORDER_MIN_DEFAULT = 1
ORDER_MAX_DEFAULT = 8


class DofMapError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class OrderMap:
    """Mass order per element and flux order per edge.

    The element flux order is the mass order plus one (stability
    pairing); edge orders are reconciled to the max of the adjacent
    element flux orders.
    """
    k: np.ndarray                 # (nt,) mass orders
    q: np.ndarray                 # (ne,) edge flux orders
    order_min: int = ORDER_MIN_DEFAULT
    order_max: int = ORDER_MAX_DEFAULT

    @property
    def p(self) -> np.ndarray:
        """Element flux orders."""
        return self.k + 1

    def validate(self, mesh: Mesh) -> None:
        if len(self.k) != mesh.n_elements or len(self.q) != mesh.n_edges:
            raise DofMapError("order map sized for a different mesh")
        # k = 0 stays legal for unit tests; order_min only floors adaptation
        if self.k.min() < 0 or self.k.max() > self.order_max:
            raise DofMapError(f"mass orders outside [0, {self.order_max}]")
        if self.k.max() + 1 > FLUX_DEGREE_CAP:
            raise DofMapError("flux order above basis cap")
        want = edge_orders_from_elements(mesh, self.k)
        if not np.array_equal(self.q, want):
            raise DofMapError("edge orders are not the max of adjacent flux orders")


def edge_orders_from_elements(mesh: Mesh, k: np.ndarray) -> np.ndarray:
    p = np.asarray(k) + 1
    q = np.zeros(mesh.n_edges, dtype=int)
    for t in range(mesh.n_elements):
        for e in mesh.elem_edges[t]:
            q[e] = max(q[e], p[t])
    return q


def uniform_orders(mesh: Mesh, k: int, order_min=ORDER_MIN_DEFAULT,
                   order_max=ORDER_MAX_DEFAULT) -> OrderMap:
    kk = np.full(mesh.n_elements, k, dtype=int)
    return OrderMap(kk, edge_orders_from_elements(mesh, kk), order_min, order_max)


def make_orders(mesh: Mesh, k: np.ndarray, order_min=ORDER_MIN_DEFAULT,
                order_max=ORDER_MAX_DEFAULT) -> OrderMap:
    kk = np.asarray(k, dtype=int)
    return OrderMap(kk, edge_orders_from_elements(mesh, kk), order_min, order_max)


@dataclass(frozen=True, eq=False)
class DofMap:
    mesh: Mesh
    orders: OrderMap
    edge_offsets: np.ndarray      # (ne+1,) flux edge dof offsets
    int_offsets: np.ndarray       # (nt+1,) flux interior offsets (after edges)
    mass_offsets: np.ndarray      # (nt+1,)
    n_flux: int
    n_mass: int

    def element_flux_dofs(self, t: int) -> np.ndarray:
        out = []
        for e in self.mesh.elem_edges[t]:
            out.append(np.arange(self.edge_offsets[e], self.edge_offsets[e + 1]))
        out.append(np.arange(self.int_offsets[t], self.int_offsets[t + 1]))
        return np.concatenate(out)

    def element_mass_dofs(self, t: int) -> np.ndarray:
        return np.arange(self.mass_offsets[t], self.mass_offsets[t + 1])

    def mass_slice(self, t: int) -> slice:
        return slice(int(self.mass_offsets[t]), int(self.mass_offsets[t + 1]))

    def edge_dofs(self, e: int) -> np.ndarray:
        return np.arange(self.edge_offsets[e], self.edge_offsets[e + 1])

    def element_qedges(self, t: int) -> tuple:
        return tuple(int(self.orders.q[e]) for e in self.mesh.elem_edges[t])

    def element_flips(self, t: int) -> tuple:
        g = self.mesh.elements[t]
        return (1 if g[0] < g[1] else -1,
                1 if g[1] < g[2] else -1,
                1 if g[0] < g[2] else -1)

    def signature(self, t: int):
        """Tabulation signature; elements sharing one share reference tables."""
        return (int(self.orders.k[t]), self.element_qedges(t), self.element_flips(t))


def build_dof_map(mesh: Mesh, orders: OrderMap) -> DofMap:
    orders.validate(mesh)
    q = orders.q
    edge_offsets = np.zeros(mesh.n_edges + 1, dtype=int)
    edge_offsets[1:] = np.cumsum(q + 1)
    n_edge = int(edge_offsets[-1])
    p = orders.p
    int_counts = np.array([n_interior(int(pt)) for pt in p])
    int_offsets = np.zeros(mesh.n_elements + 1, dtype=int)
    int_offsets[1:] = n_edge + np.cumsum(int_counts)
    int_offsets[0] = n_edge
    mass_counts = np.array([n_scalar(int(kt)) for kt in orders.k])
    mass_offsets = np.zeros(mesh.n_elements + 1, dtype=int)
    mass_offsets[1:] = np.cumsum(mass_counts)
    return DofMap(mesh, orders, edge_offsets, int_offsets, mass_offsets,
                  n_flux=int(int_offsets[-1]), n_mass=int(mass_offsets[-1]))
