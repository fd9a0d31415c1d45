"""Transversely isotropic linear elasticity.

The material is described either by engineering constants (E_T, nu, p) with
p = E_L / E_T, or by the moduli (lambda, alpha, beta, mu_T, mu_L) of the
structural-tensor form

    sigma = lam tr(eps) I + 2 mu_T eps + beta (M:eps) M
            + alpha ((M:eps) I + tr(eps) M) + 2 (mu_L - mu_T)(eps M + M eps)

with M = a (x) a for the fibre direction a.

Voigt convention used everywhere in the package: strain vectors are
[eps_xx, eps_yy, 2 eps_xy] (engineering shear), stress vectors are
[sig_xx, sig_yy, sig_xy].  The strain energy density is then 0.5 e^T C e.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDenominator, NonUnitDirection, SingularStiffness

_UNIT_TOL = 1e-9
_COND_MAX = 1e14

# (i, j) index pairs for the 3D and plane Voigt orderings
VOIGT6 = ((0, 0), (1, 1), (2, 2), (1, 2), (0, 2), (0, 1))
VOIGT3 = ((0, 0), (1, 1), (0, 1))


@dataclass(frozen=True)
class EngineeringParams:
    """Engineering constants with nu_T = nu_L = nu and mu_L = mu_T.

    Attributes:
        E_T: Young's modulus in the plane of isotropy.
        nu: Poisson's ratio.
        p: Anisotropy ratio E_L / E_T.
    """

    E_T: float
    nu: float
    p: float

    @property
    def E_L(self) -> float:
        return self.p * self.E_T

    def validate(self) -> None:
        """Raise ValueError naming the first offending field."""
        if not (math.isfinite(self.E_T) and self.E_T > 0.0):
            raise ValueError(f"E_T must be positive, got {self.E_T!r}")
        if not (math.isfinite(self.nu) and 0.0 <= self.nu < 0.5):
            raise ValueError(f"nu must satisfy 0 <= nu < 0.5, got {self.nu!r}")
        if not (math.isfinite(self.p) and self.p >= 1.0):
            raise ValueError(f"p must satisfy p >= 1, got {self.p!r}")


@dataclass(frozen=True)
class TIConstants:
    lam: float
    alpha: float
    beta: float
    mu_T: float
    mu_L: float

    @classmethod
    def isotropic(cls, lam: float, mu: float) -> "TIConstants":
        return cls(lam=lam, alpha=0.0, beta=0.0, mu_T=mu, mu_L=mu)


@dataclass(frozen=True)
class FibreDirection:
    """In-plane fibre direction; a and -a describe the same material."""

    ax: float
    ay: float

    @classmethod
    def from_angle(cls, angle: float) -> "FibreDirection":
        return cls(math.cos(angle), math.sin(angle))

    @classmethod
    def from_vector(cls, v) -> "FibreDirection":
        """Normalise an arbitrary nonzero 2-vector."""
        x, y = float(v[0]), float(v[1])
        n = math.hypot(x, y)
        if n == 0.0:
            raise NonUnitDirection("zero vector has no direction")
        return cls(x / n, y / n)

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.ax, self.ay])

    @property
    def angle(self) -> float:
        return math.atan2(self.ay, self.ax)

    def structural_tensor(self) -> np.ndarray:
        a = self.vector
        return np.outer(a, a)


def engineering_to_ti(params: EngineeringParams) -> TIConstants:
    """Convert engineering constants to the structural-tensor moduli."""
    E, nu, p = params.E_T, params.nu, params.p
    D = (1.0 + nu) * (p * (1.0 - nu) - 2.0 * nu**2)
    if abs(D) < 1e-14:
        raise DegenerateDenominator(
            f"denominator D = {D!r} vanishes for nu={nu!r}, p={p!r}"
        )
    lam = E * nu * (nu + p) / D
    alpha = E * nu**2 * (p - 1.0) / D
    beta = E * (p**2 * (1.0 - nu**2) - p * (1.0 + 2.0 * nu**2) + 3.0 * nu**2) / D
    mu = E / (2.0 * (1.0 + nu))
    return TIConstants(lam=lam, alpha=alpha, beta=beta, mu_T=mu, mu_L=mu)


def pointwise_stability(params: EngineeringParams) -> bool:
    """Sufficient stability test: lam + 2/3 mu > 0, mu > 0 and p >= 1."""
    if not params.p >= 1.0:
        return False
    try:
        c = engineering_to_ti(params)
    except DegenerateDenominator:
        return False
    return bool(c.lam + 2.0 * c.mu_T / 3.0 > 0.0 and c.mu_T > 0.0)


def stiffness_tensor(consts: TIConstants, a) -> np.ndarray:
    """Fourth-order elasticity tensor C_ijkl for fibre vector ``a``.

    The dimension of the tensor follows ``len(a)`` (2 or 3).
    """
    a = np.asarray(a, dtype=float)
    n = a.size
    I = np.eye(n)
    M = np.outer(a, a)
    sym = 0.5 * (np.einsum("ik,jl->ijkl", I, I) + np.einsum("il,jk->ijkl", I, I))
    return (
        consts.lam * np.einsum("ij,kl->ijkl", I, I)
        + 2.0 * consts.mu_T * sym
        + consts.beta * np.einsum("ij,kl->ijkl", M, M)
        + consts.alpha * (np.einsum("ij,kl->ijkl", I, M) + np.einsum("ij,kl->ijkl", M, I))
        + 2.0 * (consts.mu_L - consts.mu_T) * _epsM_tensor(a)
    )


def tensor_to_voigt(C: np.ndarray, pairs=VOIGT3) -> np.ndarray:
    """Voigt matrix acting on engineering strain; no shear factors needed."""
    m = len(pairs)
    out = np.empty((m, m))
    for I, (i, j) in enumerate(pairs):
        for J, (k, l) in enumerate(pairs):
            out[I, J] = C[i, j, k, l]
    return out


def _check_unit(direction: FibreDirection) -> None:
    n = math.hypot(direction.ax, direction.ay)
    if abs(n - 1.0) > _UNIT_TOL:
        raise NonUnitDirection(f"fibre direction has norm {n!r}")


def build_stiffness(consts: TIConstants, direction: FibreDirection) -> np.ndarray:
    """Plane-strain 3x3 Voigt stiffness for an in-plane fibre direction."""
    _check_unit(direction)
    ax, ay = direction.ax, direction.ay
    m = np.array([ax * ax, ay * ay, ax * ay])  # M_xx, M_yy, M_xy
    tr = np.array([1.0, 1.0, 0.0])
    # with engineering shear, M:eps = m . e, so the beta and alpha terms are outer products
    C = (
        consts.lam * np.outer(tr, tr)
        + consts.mu_T * np.diag([2.0, 2.0, 1.0])
        + consts.beta * np.outer(m, m)
        + consts.alpha * (np.outer(tr, m) + np.outer(m, tr))
    )
    dmu = consts.mu_L - consts.mu_T
    if dmu != 0.0:
        C = C + 2.0 * dmu * tensor_to_voigt(
            _epsM_tensor(np.array([ax, ay])), VOIGT3
        )
    return 0.5 * (C + C.T)


def _epsM_tensor(a: np.ndarray) -> np.ndarray:
    # (eps M + M eps)_ij = eps_ik M_kj + M_ik eps_kj, symmetrised in (k, l)
    I = np.eye(a.size)
    M = np.outer(a, a)
    return 0.5 * (
        np.einsum("ik,lj->ijkl", I, M)
        + np.einsum("il,kj->ijkl", I, M)
        + np.einsum("ik,jl->ijkl", M, I)
        + np.einsum("il,jk->ijkl", M, I)
    )


def isotropic_plane_strain(lam: float, mu: float) -> np.ndarray:
    return np.array(
        [[lam + 2.0 * mu, lam, 0.0], [lam, lam + 2.0 * mu, 0.0], [0.0, 0.0, mu]]
    )


def engineering_compliance(params: EngineeringParams) -> np.ndarray:
    """6x6 compliance with the fibre along x3.

    Ordering is (11, 22, 33, 23, 13, 12) acting on stress and returning
    strains with engineering shears.
    """
    E_T, nu = params.E_T, params.nu
    E_L = params.E_L
    mu = E_T / (2.0 * (1.0 + nu))
    S = np.zeros((6, 6))
    S[0, 0] = S[1, 1] = 1.0 / E_T
    S[0, 1] = S[1, 0] = -nu / E_T
    S[0, 2] = S[2, 0] = S[1, 2] = S[2, 1] = -nu / E_L
    S[2, 2] = 1.0 / E_L
    S[3, 3] = S[4, 4] = 1.0 / mu  # mu_L
    S[5, 5] = 1.0 / mu  # mu_T
    return S


def reduced_compliance(consts: TIConstants, direction: FibreDirection) -> np.ndarray:
    """Inverse of the plane-strain Voigt stiffness.

    Column 0 holds the coefficients S_11, S_21, S_31 that enter the
    closed-form beam solution.
    """
    C = build_stiffness(consts, direction)
    cond = np.linalg.cond(C)
    if not np.isfinite(cond) or cond > _COND_MAX:
        raise SingularStiffness(f"plane-strain stiffness condition number {cond:.3e}")
    return np.linalg.inv(C)


def voigt_rotation(theta: float) -> np.ndarray:
    """Stress-vector rotation T with sig' = T sig for a rotation by ``theta``.

    For the engineering-strain convention C(R a) = T C(a) T^T.
    """
    c, s = math.cos(theta), math.sin(theta)
    return np.array(
        [
            [c * c, s * s, -2.0 * c * s],
            [s * s, c * c, 2.0 * c * s],
            [c * s, -c * s, c * c - s * s],
        ]
    )
