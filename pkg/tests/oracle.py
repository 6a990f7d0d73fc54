"""Brute-force reference projectors, written independently of the package.

Traces are rebuilt per edge by solving the 3x3 interpolation problem in the
arclength variable, polynomials use raw (unscaled, origin-based) monomials,
boundary integrals use a 7-point Gauss rule, and the energy projection is
the least-squares solution of the overdetermined Galerkin system.
"""

import numpy as np

GX, GW = np.polynomial.legendre.leggauss(7)
GX = 0.5 * (GX + 1.0)
GW = 0.5 * GW


def _area(P):
    x, y = P[:, 0], P[:, 1]
    return 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)


def edge_trace(P, tau, j, u):
    """Trace of the V-function with dofs ``tau`` on edge j at fractions u."""
    n = len(P)
    a, b = P[j], P[(j + 1) % n]
    L = np.linalg.norm(b - a)
    t = (b - a) / L
    nn = np.array([t[1], -t[0]])
    va = tau[2 * j : 2 * j + 2]
    vb = tau[2 * ((j + 1) % n) : 2 * ((j + 1) % n) + 2]
    mean = tau[2 * n + j]
    # tangential part: c0 + c1 s + c2 s^2 with values at 0, L and mean over [0, L]
    M = np.array([[1, 0, 0], [1, L, L * L], [1, L / 2, L * L / 3]])
    c = np.linalg.solve(M, [va @ t, vb @ t, mean])
    s = np.asarray(u) * L
    tan = c[0] + c[1] * s + c[2] * s * s
    nor = (1 - np.asarray(u)) * (va @ nn) + np.asarray(u) * (vb @ nn)
    return tan[:, None] * t + nor[:, None] * nn, L, t, nn


def _basis():
    # raw monomials (1,0),(0,1),(x,0),(0,x),(y,0),(0,y): value and gradient
    def val(x, y):
        z, o = np.zeros_like(x), np.ones_like(x)
        return np.stack(
            [np.stack([o, z]), np.stack([z, o]), np.stack([x, z]), np.stack([z, x]), np.stack([y, z]), np.stack([z, y])]
        )  # (6, 2, npts)

    grads = np.zeros((6, 2, 2))  # grad[k] = d comp_i / d x_j
    grads[2, 0, 0] = 1
    grads[3, 1, 0] = 1
    grads[4, 0, 1] = 1
    grads[5, 1, 1] = 1
    return val, grads


def _C(E, nu, eps):
    D = E / (12 * (1 - nu * nu))
    return D * ((1 - nu) * eps + nu * np.trace(eps) * np.eye(2))


def oracle_pi_eps(P, tau, E=1.0, nu=0.0):
    """Coefficients of the energy projection in raw monomials."""
    P = np.asarray(P, float)
    n = len(P)
    val, grads = _basis()
    eps = 0.5 * (grads + grads.transpose(0, 2, 1))
    area = _area(P)
    H = np.array([[area * np.sum(_C(E, nu, eps[a]) * eps[b]) for b in range(6)] for a in range(6)])
    rhs = np.zeros(6)
    for j in range(n):
        tr, L, _, nn = edge_trace(P, tau, j, GX)
        for a in range(6):
            rhs[a] += L * np.sum(GW * (tr @ (_C(E, nu, eps[a]) @ nn)))
    # rigid motions: vertex-average pairing
    x, y = P[:, 0], P[:, 1]
    z, o = np.zeros(n), np.ones(n)
    rigid = [np.stack([o, z], 1), np.stack([z, o], 1), np.stack([-y, x], 1)]
    V = val(x, y).transpose(0, 2, 1)  # (6, n, 2)
    tv = tau[: 2 * n].reshape(n, 2)
    K = np.array([[np.sum(r * V[a]) / n for a in range(6)] for r in rigid])
    k = np.array([np.sum(r * tv) / n for r in rigid])
    A = np.vstack([H, K])
    coef, *_ = np.linalg.lstsq(A, np.r_[rhs, k], rcond=None)
    return coef


def eval_raw(coef, pts):
    x, y = pts[:, 0], pts[:, 1]
    val, _ = _basis()
    return np.einsum("a,aip->pi", coef, val(x, y))


def oracle_pi_zero(P, tau, shift=(0.3, -0.7)):
    """Cell average via boundary tangential traces about an arbitrary point.

    With a shift off the centroid the rotation term no longer drops out; it
    is recovered from the circulation of the trace.
    """
    P = np.asarray(P, float)
    n = len(P)
    area = _area(P)
    x0, y0 = shift
    x, y = P[:, 0], P[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cr = x * yn - xn * y
    mx = np.sum((x + xn) * cr) / 6.0  # int_E x
    my = np.sum((y + yn) * cr) / 6.0  # int_E y
    circ, ix, iy = 0.0, 0.0, 0.0
    for j in range(n):
        tr, L, t, _ = edge_trace(P, tau, j, GX)
        a, b = P[j], P[(j + 1) % n]
        q = a + GX[:, None] * (b - a)
        tt = tr @ t
        circ += L * np.sum(GW * tt)
        ix -= L * np.sum(GW * tt * (q[:, 1] - y0))
        iy -= L * np.sum(GW * tt * (x0 - q[:, 0]))
    rot = circ / area
    ix += rot * (my - y0 * area)
    iy += rot * (x0 * area - mx)
    return np.array([ix, iy]) / area
