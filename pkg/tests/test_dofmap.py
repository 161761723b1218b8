"""Dof counting and layout under uniform and mixed orders."""

import numpy as np
import pytest

from rdmix.fespace import (
    DofMapError,
    OrderMap,
    build_dof_map,
    make_orders,
    uniform_orders,
)
from rdmix.mesh import generate_structured


def single_triangle():
    from rdmix.mesh import build_mesh

    return build_mesh([(0, 0), (1, 0), (0, 1)], [(0, 1, 2)])


def test_single_element_k0():
    mesh = single_triangle()
    dm = build_dof_map(mesh, uniform_orders(mesh, 0))
    assert dm.n_mass == 1
    assert dm.n_flux == 6          # (p+1)(p+2) with p = 1


def test_two_element_square_k1():
    mesh = generate_structured(1, 1, (0, 0, 1, 1))
    dm = build_dof_map(mesh, uniform_orders(mesh, 1))
    assert dm.n_mass == 2 * 3
    # 5 edges * 3 levels + 2 interiors * (p^2 - 1) with p = 2
    assert dm.n_flux == 5 * 3 + 2 * 3 == 21


def test_local_dof_counts_match_basis():
    mesh = generate_structured(2, 2, (0, 0, 1, 1))
    for k in (1, 2, 3):
        dm = build_dof_map(mesh, uniform_orders(mesh, k))
        p = k + 1
        for t in range(mesh.n_elements):
            assert len(dm.element_flux_dofs(t)) == (p + 1) * (p + 2)
            assert len(dm.element_mass_dofs(t)) == (k + 1) * (k + 2) // 2


def test_raising_one_element_is_local():
    mesh = generate_structured(2, 2, (0, 0, 1, 1))
    k = np.full(mesh.n_elements, 2)
    dm0 = build_dof_map(mesh, make_orders(mesh, k))
    k2 = k.copy()
    k2[3] += 1
    dm1 = build_dof_map(mesh, make_orders(mesh, k2))
    touched_edges = set(int(e) for e in mesh.elem_edges[3])
    for e in range(mesh.n_edges):
        n0 = dm0.edge_offsets[e + 1] - dm0.edge_offsets[e]
        n1 = dm1.edge_offsets[e + 1] - dm1.edge_offsets[e]
        if e in touched_edges:
            assert n1 == n0 + 1
        else:
            assert n1 == n0
    for t in range(mesh.n_elements):
        n0 = dm0.int_offsets[t + 1] - dm0.int_offsets[t]
        n1 = dm1.int_offsets[t + 1] - dm1.int_offsets[t]
        assert (n1 > n0) == (t == 3)
        m0 = dm0.mass_offsets[t + 1] - dm0.mass_offsets[t]
        m1 = dm1.mass_offsets[t + 1] - dm1.mass_offsets[t]
        assert (m1 > m0) == (t == 3)


def test_edge_orders_are_max_of_neighbours():
    mesh = generate_structured(3, 3, (0, 0, 1, 1))
    rng = np.random.default_rng(0)
    orders = make_orders(mesh, rng.integers(1, 5, mesh.n_elements))
    for e in range(mesh.n_edges):
        adj = [t for t in mesh.edge_elems[e] if t >= 0]
        assert orders.q[e] == max(orders.k[t] + 1 for t in adj)


def test_validation_rejects_stale_edge_orders():
    mesh = generate_structured(2, 2, (0, 0, 1, 1))
    om = uniform_orders(mesh, 2)
    bad = OrderMap(om.k, om.q.copy(), om.order_min, om.order_max)
    bad.q[0] += 1
    with pytest.raises(DofMapError):
        build_dof_map(mesh, bad)


def test_validation_rejects_out_of_range():
    mesh = generate_structured(2, 2, (0, 0, 1, 1))
    with pytest.raises(DofMapError):
        build_dof_map(mesh, make_orders(mesh, np.full(mesh.n_elements, 99)))


def test_deterministic_numbering():
    mesh = generate_structured(3, 2, (0, 0, 1, 1), pattern="crossed")
    dm1 = build_dof_map(mesh, uniform_orders(mesh, 2))
    dm2 = build_dof_map(mesh, uniform_orders(mesh, 2))
    for t in range(mesh.n_elements):
        assert np.array_equal(dm1.element_flux_dofs(t), dm2.element_flux_dofs(t))
