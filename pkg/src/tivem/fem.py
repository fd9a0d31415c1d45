"""Conforming Q1 and Q2 (9-node Lagrange) plane-strain quadrilaterals.

Node order: corners 0-3 counter-clockwise, then for Q2 the mid-edge nodes of
edges 0-1, 1-2, 2-3, 3-0 and finally the centre node.  Full Gauss
integration (2x2 for Q1, 3x3 for Q2).
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import NonPositiveJacobian

# reference coordinates of the 9 Lagrange nodes
_Q2_NODES = np.array(
    [[-1, -1], [1, -1], [1, 1], [-1, 1], [0, -1], [1, 0], [0, 1], [-1, 0], [0, 0]],
    dtype=float,
)


def _lagrange3(t):
    # 1D quadratic Lagrange at nodes -1, 0, 1 and derivatives
    N = np.array([0.5 * t * (t - 1.0), 1.0 - t * t, 0.5 * t * (t + 1.0)])
    dN = np.array([t - 0.5, -2.0 * t, t + 0.5])
    return N, dN


def shape_q1(xi: float, eta: float):
    """Bilinear shape functions and their reference gradients (4, 2)."""
    sx = np.array([-1.0, 1.0, 1.0, -1.0])
    sy = np.array([-1.0, -1.0, 1.0, 1.0])
    N = 0.25 * (1 + sx * xi) * (1 + sy * eta)
    dN = np.column_stack([0.25 * sx * (1 + sy * eta), 0.25 * sy * (1 + sx * xi)])
    return N, dN


def shape_q2(xi: float, eta: float):
    """Biquadratic shape functions and their reference gradients (9, 2)."""
    Nx, dNx = _lagrange3(xi)
    Ny, dNy = _lagrange3(eta)
    ix = (_Q2_NODES[:, 0] + 1).astype(int)
    iy = (_Q2_NODES[:, 1] + 1).astype(int)
    N = Nx[ix] * Ny[iy]
    dN = np.column_stack([dNx[ix] * Ny[iy], Nx[ix] * dNy[iy]])
    return N, dN


@lru_cache(maxsize=None)
def _gauss_rule(n: int):
    g, w = np.polynomial.legendre.leggauss(n)
    pts = [(a, b) for b in g for a in g]
    wts = [wa * wb for wb in w for wa in w]
    return tuple(pts), tuple(wts)


def _bmatrix(dNdx: np.ndarray) -> np.ndarray:
    n = dNdx.shape[0]
    B = np.zeros((3, 2 * n))
    B[0, 0::2] = dNdx[:, 0]
    B[1, 1::2] = dNdx[:, 1]
    B[2, 0::2] = dNdx[:, 1]
    B[2, 1::2] = dNdx[:, 0]
    return B


def _stiffness(coords, C, shape, order, C_at=None):
    coords = np.asarray(coords, dtype=float)
    n = coords.shape[0]
    K = np.zeros((2 * n, 2 * n))
    pts, wts = _gauss_rule(order)
    for (xi, eta), w in zip(pts, wts):
        N, dN = shape(xi, eta)
        J = dN.T @ coords
        detJ = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
        if detJ <= 0.0:
            raise NonPositiveJacobian(f"det J = {detJ!r} at ({xi}, {eta})")
        B = _bmatrix(np.linalg.solve(J, dN.T).T)
        Cq = C if C_at is None else C_at(N @ coords)
        K += (B.T @ Cq @ B) * (detJ * w)
    return 0.5 * (K + K.T)


def q1_stiffness(coords, C: np.ndarray, C_at=None) -> np.ndarray:
    """8 x 8 stiffness of a bilinear quadrilateral.

    Args:
        coords: (4, 2) corner coordinates, counter-clockwise.
        C: 3x3 Voigt stiffness used at every Gauss point.
        C_at: optional callable point -> C overriding ``C`` per Gauss point.
    """
    return _stiffness(coords, C, shape_q1, 2, C_at)


def q2_stiffness(coords, C: np.ndarray, C_at=None) -> np.ndarray:
    """18 x 18 stiffness of a 9-node biquadratic quadrilateral."""
    return _stiffness(coords, C, shape_q2, 3, C_at)


def q2_nodes(corners) -> np.ndarray:
    """Straight-sided 9-node layout of a quadrilateral given its corners."""
    c = np.asarray(corners, dtype=float)
    mids = 0.5 * (c + np.roll(c, -1, axis=0))
    return np.vstack([c, mids, c.mean(axis=0)])
