"""Lowest-order virtual element kernels for plane elasticity.

Element dofs are interleaved as [u_1, v_1, u_2, v_2, ..., u_N, v_N] over the
counter-clockwise vertex ring.  Strains use the engineering Voigt order
[eps_xx, eps_yy, 2 eps_xy].
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .errors import RankDeficientMonomials
from .mesh import ElementGeometry, polygon_geometry


def projection(geom: ElementGeometry, vertices: np.ndarray) -> np.ndarray:
    """3 x 2N matrix mapping element dofs to the projected constant strain.

    Boundary traces are linear, so each edge integral is exactly
    |e|/2 times the sum of its two endpoint values.
    """
    N = len(vertices)
    # |e| n for edge i (vertex i -> i+1); a vertex collects half of both adjacent edges
    ln = geom.normals * geom.edge_lengths[:, None]
    w = 0.5 * (ln + np.roll(ln, 1, axis=0)) / geom.area
    P = np.zeros((3, 2 * N))
    P[0, 0::2] = w[:, 0]
    P[1, 1::2] = w[:, 1]
    P[2, 0::2] = w[:, 1]
    P[2, 1::2] = w[:, 0]
    return P


def monomial_matrix(geom: ElementGeometry, vertices: np.ndarray) -> np.ndarray:
    """2N x 6 matrix of scaled linear monomials {1, xi, eta} per component."""
    vertices = np.asarray(vertices, dtype=float)
    N = len(vertices)
    xi = (vertices[:, 0] - geom.centroid[0]) / geom.diameter
    eta = (vertices[:, 1] - geom.centroid[1]) / geom.diameter
    D = np.zeros((2 * N, 6))
    D[0::2, 0] = 1.0
    D[0::2, 1] = xi
    D[0::2, 2] = eta
    D[1::2, 3] = 1.0
    D[1::2, 4] = xi
    D[1::2, 5] = eta
    return D


def consistency_stiffness(P: np.ndarray, C: np.ndarray, geom: ElementGeometry) -> np.ndarray:
    return geom.area * (P.T @ C @ P)


def stabilization_stiffness(D: np.ndarray, mu: float) -> np.ndarray:
    """mu [I - D (D^T D)^{-1} D^T], computed through a pivoted QR of D."""
    Q, R, _ = scipy.linalg.qr(D, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    if diag.size < D.shape[1] or diag[-1] <= 1e-12 * diag[0]:
        raise RankDeficientMonomials(
            f"monomial matrix is rank deficient (|R| range {diag[0]:.3e}..{diag[-1]:.3e})"
        )
    n = D.shape[0]
    return mu * (np.eye(n) - Q @ Q.T)


def element_stiffness(
    vertices: np.ndarray,
    C: np.ndarray,
    mu: float,
    geom: ElementGeometry | None = None,
) -> np.ndarray:
    """Complete element stiffness K_con + K_stab with stabilisation scale mu."""
    vertices = np.asarray(vertices, dtype=float)
    if geom is None:
        geom = polygon_geometry(vertices)
    P = projection(geom, vertices)
    K = consistency_stiffness(P, C, geom) + stabilization_stiffness(
        monomial_matrix(geom, vertices), mu
    )
    return 0.5 * (K + K.T)
