"""Exact 3x3 linear algebra used throughout the package.

Provides symmetric/skew/deviatoric decompositions, the Frobenius inner
product, axis-angle rotation matrices, and a Newton-iteration polar
decomposition.  All functions are pure and operate on plain (3, 3) numpy
arrays, so they are safe to call concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

IDENTITY = np.eye(3)

# Rotation generators about the coordinate axes: J @ R(theta) = dR/dtheta.
GENERATOR_X = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]])
GENERATOR_Y = np.array([[0.0, 0.0, 1.0], [0.0, 0.0, 0.0], [-1.0, 0.0, 0.0]])
GENERATOR_Z = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])


class SingularDeformationError(ValueError):
    """Raised when a deformation gradient has non-positive determinant."""


class PolarConvergenceError(RuntimeError):
    """Raised when the polar Newton iteration fails to converge."""

    def __init__(self, residual: float, iterations: int):
        self.residual = residual
        self.iterations = iterations
        super().__init__(
            f"polar iteration did not converge after {iterations} steps "
            f"(orthogonality residual {residual:.3e})"
        )


@dataclass(frozen=True)
class MatrixParts:
    """Additive decomposition of a 3x3 matrix."""

    sym: np.ndarray
    skew: np.ndarray
    dev: np.ndarray
    trace: float


@dataclass(frozen=True)
class PolarDecomposition:
    rotation: np.ndarray
    stretch: np.ndarray


def as_matrix(M) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.shape != (3, 3):
        raise ValueError(f"expected a 3x3 matrix, got shape {M.shape}")
    return M


def decompose(M) -> MatrixParts:
    """Split M into symmetric, skew-symmetric and deviatoric parts.

    sym + skew reassembles M; the deviatoric part is trace-free.
    """
    M = as_matrix(M)
    sym = 0.5 * (M + M.T)
    skew = 0.5 * (M - M.T)
    trace = float(np.trace(M))
    dev = M - (trace / 3.0) * IDENTITY
    return MatrixParts(sym=sym, skew=skew, dev=dev, trace=trace)


def sym(M) -> np.ndarray:
    M = as_matrix(M)
    return 0.5 * (M + M.T)


def skew(M) -> np.ndarray:
    M = as_matrix(M)
    return 0.5 * (M - M.T)


def dev(M) -> np.ndarray:
    M = as_matrix(M)
    return M - (np.trace(M) / 3.0) * IDENTITY


def frobenius(A, B) -> float:
    """Frobenius inner product sum_ij A_ij B_ij; frobenius(A, A) = ||A||^2."""
    return float(np.tensordot(as_matrix(A), as_matrix(B), axes=2))


def norm_sq(A) -> float:
    return frobenius(A, A)


def cross_matrix(v) -> np.ndarray:
    """Matrix [v]_x such that [v]_x @ w = v x w."""
    v = np.asarray(v, dtype=float)
    return np.array(
        [
            [0.0, -v[2], v[1]],
            [v[2], 0.0, -v[0]],
            [-v[1], v[0], 0.0],
        ]
    )


def axis_angle(n, angle: float) -> np.ndarray:
    """Rotation by `angle` (radians) about the unit axis `n`.

    Uses the Rodrigues form cos(a) I + sin(a) [n]_x + (1 - cos(a)) n (x) n.
    The axis must be normalised to within 1e-12.
    """
    n = np.asarray(n, dtype=float)
    if n.shape != (3,):
        raise ValueError("rotation axis must be a 3-vector")
    if abs(np.linalg.norm(n) - 1.0) > 1e-12:
        raise ValueError(f"rotation axis must be unit length, got |n| = {np.linalg.norm(n)!r}")
    c, s = np.cos(angle), np.sin(angle)
    return c * IDENTITY + s * cross_matrix(n) + (1.0 - c) * np.outer(n, n)


def rotation_about_z(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rotation_exp(a) -> np.ndarray:
    """exp of the skew matrix built from the rotation vector `a`."""
    a = np.asarray(a, dtype=float)
    theta = np.linalg.norm(a)
    if theta < 1e-300:
        return IDENTITY.copy()
    return axis_angle(a / theta, theta)


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Uniform-ish random element of SO(3) (QR sign-fixed)."""
    Q, R = np.linalg.qr(rng.standard_normal((3, 3)))
    Q = Q @ np.diag(np.sign(np.diag(R)))
    if np.linalg.det(Q) < 0:
        Q[:, 0] = -Q[:, 0]
    return Q


def polar_factor(F, tol: float = 1e-12, max_iter: int = 100) -> np.ndarray:
    """Orthogonal factor of F by Newton averaging R <- (R + R^-T)/2.

    Works for any invertible F; the determinant sign of F carries over to
    the orthogonal factor (det > 0 gives SO(3), det < 0 gives O(3) minus).
    """
    F = as_matrix(F)
    if abs(np.linalg.det(F)) < 1e-14:
        raise SingularDeformationError("polar factor requires an invertible matrix")
    R = F.copy()
    residual = np.inf
    for _ in range(max_iter):
        R_next = 0.5 * (R + np.linalg.inv(R).T)
        residual = float(np.linalg.norm(R_next @ R_next.T - IDENTITY))
        R = R_next
        if residual <= tol:
            return R
    raise PolarConvergenceError(residual, max_iter)


def polar_decompose(F, tol: float = 1e-12, max_iter: int = 100) -> PolarDecomposition:
    """Polar decomposition F = R U with R in SO(3) and U = sqrt(F^T F) SPD.

    Raises SingularDeformationError unless det F > 0.
    """
    F = as_matrix(F)
    if np.linalg.det(F) <= 0.0:
        raise SingularDeformationError(
            f"polar decomposition requires det F > 0, got det F = {np.linalg.det(F):.6g}"
        )
    R = polar_factor(F, tol=tol, max_iter=max_iter)
    U = R.T @ F
    # symmetrise away the last bits of iteration error
    U = 0.5 * (U + U.T)
    return PolarDecomposition(rotation=R, stretch=U)
