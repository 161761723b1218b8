"""Quadrature, hierarchical bases and dof numbering."""

from .basis import (
    BasisEval,
    BasisError,
    ElementGeometry,
    FLUX_DEGREE_CAP,
    hdiv_basis,
    n_flux,
    n_interior,
    n_scalar,
    scalar_tab,
    scalar_tab_rule,
    flux_tab,
    flux_tab_points,
)
from .dofmap import (
    DofMap,
    DofMapError,
    OrderMap,
    build_dof_map,
    edge_orders_from_elements,
    make_orders,
    uniform_orders,
)
from .quadrature import DEGREE_CAP, ORDER_MAX, QuadratureError, QuadratureRule, quadrature_rule

__all__ = [
    "BasisEval", "BasisError", "ElementGeometry", "FLUX_DEGREE_CAP",
    "hdiv_basis", "n_flux", "n_interior", "n_scalar", "scalar_tab",
    "scalar_tab_rule", "flux_tab", "flux_tab_points",
    "DofMap", "DofMapError", "OrderMap", "build_dof_map",
    "edge_orders_from_elements", "make_orders", "uniform_orders",
    "DEGREE_CAP", "ORDER_MAX", "QuadratureError", "QuadratureRule",
    "quadrature_rule",
]
