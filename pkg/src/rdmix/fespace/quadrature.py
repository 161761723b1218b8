"""Quadrature rules on the reference triangle and segment.

Triangle rules are collapsed (Duffy) products of Gauss-Legendre and
Gauss-Jacobi(1,0) lines, so any degree up to the cap is available with
positive weights and machine-precision exactness. Segment rules are
Gauss-Legendre mapped to [0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi

ORDER_MAX = 8          # mass-field cap; flux goes one higher
DEGREE_CAP = 2 * ORDER_MAX + 4


class QuadratureError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    domain: str                 # "triangle" | "segment"
    points: np.ndarray          # triangle: (n, 3) barycentric; segment: (n,) in [0, 1]
    weights: np.ndarray         # sums to 1/2 (triangle) or 1 (segment)
    exact_degree: int

    @property
    def xy(self) -> np.ndarray:
        """Reference (x, y) coordinates for a triangle rule."""
        return self.points[:, 1:]


@lru_cache(maxsize=None)
def quadrature_rule(domain: str, degree: int) -> QuadratureRule:
    """Smallest shipped rule integrating polynomials of `degree` exactly."""
    if degree < 0:
        raise QuadratureError(f"negative quadrature degree {degree}")
    if degree > DEGREE_CAP:
        raise QuadratureError(
            f"quadrature degree {degree} above supported cap {DEGREE_CAP}"
        )
    n = degree // 2 + 1
    if domain == "segment":
        s, w = np.polynomial.legendre.leggauss(n)
        pts = (s + 1.0) / 2.0
        return QuadratureRule("segment", pts, w / 2.0, 2 * n - 1)
    if domain == "triangle":
        xi, wx = np.polynomial.legendre.leggauss(n)
        eta, we = roots_jacobi(n, 1.0, 0.0)
        XI, ETA = np.meshgrid(xi, eta, indexing="ij")
        x = (1.0 + XI) * (1.0 - ETA) / 4.0
        y = (1.0 + ETA) / 2.0
        w = np.outer(wx, we) / 8.0
        x, y, w = x.ravel(), y.ravel(), w.ravel()
        bary = np.column_stack([1.0 - x - y, x, y])
        return QuadratureRule("triangle", bary, w, 2 * n - 1)
    raise QuadratureError(f"unknown quadrature domain {domain!r}")
