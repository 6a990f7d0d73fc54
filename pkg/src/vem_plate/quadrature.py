"""Quadrature rules on the unit interval and the reference triangle."""

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def edge_gauss(npts: int = 3):
    """Gauss-Legendre points on [0, 1] and weights summing to 1.

    An ``npts`` rule is exact for polynomials of degree ``2*npts - 1``.
    """
    x, w = np.polynomial.legendre.leggauss(npts)
    u = 0.5 * (x + 1.0)
    w = 0.5 * w
    u.setflags(write=False)
    w.setflags(write=False)
    return u, w


def triangle_rule():
    """Degree-2 rule: barycentric coordinates (3, 3) and weights summing to 1."""
    bary = np.array([[2 / 3, 1 / 6, 1 / 6], [1 / 6, 2 / 3, 1 / 6], [1 / 6, 1 / 6, 2 / 3]])
    return bary, np.full(3, 1 / 3)
