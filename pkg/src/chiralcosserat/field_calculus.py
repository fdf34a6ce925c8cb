"""Matrix- and vector-valued fields over 3D space.

A field pairs an evaluation closure with optional analytic partial
derivatives.  Products, transposes, scalar combinations and linear
coordinate pullbacks propagate analytic partials where available, so
curvature measures built from composite fields stay accurate.  Central
finite differences (optionally Richardson-refined) are the fallback.

The row-wise matrix Curl acts on each row as the ordinary vector curl,
and the coordinate-inversion pullback p -> M(-p) is provided as a plain
pullback: sign behaviour of deformation gradients, rotations and
curvature measures emerges from recomputation on the inverted fields.
"""

from __future__ import annotations

import numpy as np

from .tensor_core import (
    GENERATOR_X,
    GENERATOR_Y,
    GENERATOR_Z,
    IDENTITY,
    as_matrix,
)

DEFAULT_FD_STEP = 1e-4
ORTHOGONALITY_TOL = 1e-8

# Levi-Civita symbol, used for curls and the starred gradient map.
EPSILON = np.zeros((3, 3, 3))
EPSILON[0, 1, 2] = EPSILON[1, 2, 0] = EPSILON[2, 0, 1] = 1.0
EPSILON[0, 2, 1] = EPSILON[2, 1, 0] = EPSILON[1, 0, 2] = -1.0


class FieldDomainError(RuntimeError):
    """Evaluation failed at a (possibly finite-difference shifted) point."""


class OrthogonalityError(ValueError):
    """A field value expected to be orthogonal is not."""


def _point(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.shape != (3,):
        raise ValueError("points are 3-vectors")
    return p


class _FieldBase:
    """Shared finite-difference machinery for matrix and vector fields."""

    def __init__(self, fn, partials=None, fd_step: float = DEFAULT_FD_STEP,
                 partials_all=None):
        self._fn = fn
        self._partials = partials
        self._partials_all = partials_all
        self.fd_step = float(fd_step)

    @property
    def has_analytic_partials(self) -> bool:
        return self._partials is not None or self._partials_all is not None

    def __call__(self, p):
        try:
            return self._fn(_point(p))
        except FieldDomainError:
            raise
        except Exception as exc:  # noqa: BLE001 - wrap evaluation failures
            raise FieldDomainError(f"field evaluation failed at {p}: {exc}") from exc

    def partial(self, p, axis: int, richardson: bool = False):
        """Partial derivative along `axis`, analytic when available."""
        p = _point(p)
        if self._partials is not None:
            return self._partials(p, axis)
        if self._partials_all is not None:
            return self._partials_all(p)[axis]
        return self._fd_partial(p, axis, self.fd_step, richardson)

    def partials(self, p, richardson: bool = False):
        """All three partial derivatives at once (cheaper than three calls
        when the analytic derivative shares work between axes)."""
        p = _point(p)
        if self._partials_all is not None:
            return list(self._partials_all(p))
        if self._partials is not None:
            return [self._partials(p, a) for a in range(3)]
        return [self._fd_partial(p, a, self.fd_step, richardson) for a in range(3)]

    def _fd_partial(self, p, axis, h, richardson):
        if richardson:
            d1 = self._fd_partial(p, axis, h, False)
            d2 = self._fd_partial(p, axis, 2.0 * h, False)
            return (4.0 * d1 - d2) / 3.0
        shift = np.zeros(3)
        shift[axis] = h
        return (self(p + shift) - self(p - shift)) / (2.0 * h)


class MatrixField(_FieldBase):
    """Smooth map from 3D points to 3x3 matrices.

    `fn(p)` returns the value; `partials(p, axis)` (optional) returns the
    analytic partial derivative matrix along the given coordinate axis.
    Fields are immutable after construction and safe to evaluate from
    multiple threads.
    """

    def __matmul__(self, other: "MatrixField") -> "MatrixField":
        fn = lambda p: self(p) @ other(p)
        partials = None
        if self.has_analytic_partials and other.has_analytic_partials:
            partials = lambda p, i: (
                self.partial(p, i) @ other(p) + self(p) @ other.partial(p, i)
            )
        return MatrixField(fn, partials, max(self.fd_step, other.fd_step))

    def transpose(self) -> "MatrixField":
        partials = None
        if self.has_analytic_partials:
            partials = lambda p, i: self.partial(p, i).T
        return MatrixField(lambda p: self(p).T, partials, self.fd_step)

    @property
    def T(self) -> "MatrixField":
        return self.transpose()

    def scaled(self, c: float) -> "MatrixField":
        partials = None
        if self.has_analytic_partials:
            partials = lambda p, i: c * self.partial(p, i)
        return MatrixField(lambda p: c * self(p), partials, self.fd_step)

    def __neg__(self) -> "MatrixField":
        return self.scaled(-1.0)

    def __add__(self, other: "MatrixField") -> "MatrixField":
        partials = None
        if self.has_analytic_partials and other.has_analytic_partials:
            partials = lambda p, i: self.partial(p, i) + other.partial(p, i)
        return MatrixField(
            lambda p: self(p) + other(p), partials, max(self.fd_step, other.fd_step)
        )

    def left_multiply(self, Q) -> "MatrixField":
        """Field p -> Q M(p) for a constant matrix Q."""
        Q = as_matrix(Q)
        partials = None
        if self.has_analytic_partials:
            partials = lambda p, i: Q @ self.partial(p, i)
        return MatrixField(lambda p: Q @ self(p), partials, self.fd_step)

    def right_multiply(self, Q) -> "MatrixField":
        """Field p -> M(p) Q for a constant matrix Q."""
        Q = as_matrix(Q)
        partials = None
        if self.has_analytic_partials:
            partials = lambda p, i: self.partial(p, i) @ Q
        return MatrixField(lambda p: self(p) @ Q, partials, self.fd_step)

    def pullback(self, A) -> "MatrixField":
        """Coordinate pullback p -> M(A p) for a constant matrix A."""
        A = as_matrix(A)
        partials = None
        if self.has_analytic_partials:
            partials = lambda p, i: sum(
                A[m, i] * self.partial(A @ p, m) for m in range(3)
            )
        return MatrixField(lambda p: self(A @ p), partials, self.fd_step)


class VectorField(_FieldBase):
    """Smooth map from 3D points to 3-vectors (deformations, displacements)."""

    def scaled(self, c: float) -> "VectorField":
        partials = None
        if self.has_analytic_partials:
            partials = lambda p, i: c * self.partial(p, i)
        return VectorField(lambda p: c * self(p), partials, self.fd_step)

    def __neg__(self) -> "VectorField":
        return self.scaled(-1.0)

    def pullback(self, A) -> "VectorField":
        A = as_matrix(A)
        partials = None
        if self.has_analytic_partials:
            partials = lambda p, i: sum(
                A[m, i] * self.partial(A @ p, m) for m in range(3)
            )
        return VectorField(lambda p: self(A @ p), partials, self.fd_step)


def constant_matrix_field(M) -> MatrixField:
    M = as_matrix(M).copy()
    zero = np.zeros((3, 3))
    return MatrixField(lambda p: M, lambda p, i: zero)


def gradient(phi: VectorField, p, richardson: bool = False) -> np.ndarray:
    """Deformation gradient of a point map: rows are components, columns
    are derivative directions, F_ij = d phi_i / d x_j."""
    cols = [phi.partial(p, j, richardson=richardson) for j in range(3)]
    return np.column_stack(cols)


def gradient_field(phi: VectorField) -> MatrixField:
    return MatrixField(
        lambda p: gradient(phi, p), None, fd_step=10.0 * phi.fd_step
    )


def curl(M: MatrixField, p, richardson: bool = False) -> np.ndarray:
    """Row-wise curl: row i of the result is the vector curl of row i of M,
    (Curl M)_ij = eps_jpq d_p M_iq."""
    parts = np.stack(M.partials(p, richardson=richardson))
    # parts[a] = d_a M; contract eps_jpq parts[p]_{iq}
    return np.einsum("jpq,piq->ij", EPSILON, parts)


def curl_from_stencil(plus, minus, h: float) -> np.ndarray:
    """Row-wise curl from precomputed values at p +/- h e_a.

    `plus` and `minus` are length-3 sequences of 3x3 matrices.
    """
    parts = np.stack([(plus[a] - minus[a]) / (2.0 * h) for a in range(3)])
    return np.einsum("jpq,piq->ij", EPSILON, parts)


def curl_field(M: MatrixField, richardson: bool = False) -> MatrixField:
    """The curl of M as a new field.

    The result carries no analytic partials; an outer curl applied to it
    falls back to finite differences with a 10x larger step, which keeps
    noise amplification of nested derivatives under control.
    """
    return MatrixField(
        lambda p: curl(M, p, richardson=richardson),
        None,
        fd_step=10.0 * M.fd_step,
    )


def invert_field(M: MatrixField) -> MatrixField:
    """The coordinate-inversion pullback p -> M(-p).

    No sign is inserted here; signs of derived quantities (F, rotations,
    curvature measures) come out of recomputing them on inverted inputs.
    """
    return M.pullback(-IDENTITY)


def invert_vector_field(u: VectorField) -> VectorField:
    return u.pullback(-IDENTITY)


def inverted_deformation(phi: VectorField) -> VectorField:
    """Deformation seen in inverted coordinates: p -> -phi(-p)."""
    return invert_vector_field(phi).scaled(-1.0)


def require_orthogonal(R, tol: float = ORTHOGONALITY_TOL) -> np.ndarray:
    R = as_matrix(R)
    defect = np.linalg.norm(R.T @ R - IDENTITY)
    if defect > tol:
        raise OrthogonalityError(
            f"matrix is not orthogonal (||R^T R - I|| = {defect:.3e} > {tol:.1e})"
        )
    return R


def dislocation_density(Rbar: MatrixField, p, richardson: bool = False) -> np.ndarray:
    """Curvature measure Kbar = Rbar^T Curl(Rbar) at p.

    The value of Rbar at p must be orthogonal to within 1e-8 (both
    determinant signs are accepted so inverted fields can be probed).
    """
    R = require_orthogonal(Rbar(p))
    return R.T @ curl(Rbar, p, richardson=richardson)


def mixed_curvatures(R: MatrixField, Rbar: MatrixField, p, richardson: bool = False):
    """The two mixed measures L = R^T Curl(Rbar) and M = Rbar^T Curl(R)."""
    Rv = require_orthogonal(R(p))
    Rbv = require_orthogonal(Rbar(p))
    L = Rv.T @ curl(Rbar, p, richardson=richardson)
    M = Rbv.T @ curl(R, p, richardson=richardson)
    return L, M


def star_gradient(grad_trace) -> np.ndarray:
    """Map a gradient vector g to the matrix S_ik = eps_ijk g_j."""
    g = np.asarray(grad_trace, dtype=float)
    return np.einsum("ijk,j->ik", EPSILON, g)


# ---------------------------------------------------------------------------
# Smooth random fields (trigonometric polynomials on a 2*pi-periodic box)
# ---------------------------------------------------------------------------


class TrigScalar:
    """Scalar field a0 + sum_k [c_k cos(k.p) + s_k sin(k.p)] with analytic
    gradient; k ranges over a small set of integer wavevectors, so the
    field is 2*pi-periodic in each coordinate."""

    def __init__(self, offset, waves, cos_amps, sin_amps):
        self.offset = float(offset)
        self.waves = np.asarray(waves, dtype=float)
        self.cos_amps = np.asarray(cos_amps, dtype=float)
        self.sin_amps = np.asarray(sin_amps, dtype=float)

    @classmethod
    def random(cls, rng: np.random.Generator, amplitude: float = 0.5, offset_scale: float = 0.5):
        waves = [(1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 0), (0, 1, 1)]
        n = len(waves)
        scale = amplitude / n
        return cls(
            offset=offset_scale * rng.uniform(-1.0, 1.0),
            waves=waves,
            cos_amps=scale * rng.uniform(-1.0, 1.0, size=n),
            sin_amps=scale * rng.uniform(-1.0, 1.0, size=n),
        )

    def __call__(self, p) -> float:
        phases = self.waves @ np.asarray(p, dtype=float)
        return self.offset + float(
            self.cos_amps @ np.cos(phases) + self.sin_amps @ np.sin(phases)
        )

    def grad(self, p) -> np.ndarray:
        phases = self.waves @ np.asarray(p, dtype=float)
        coef = -self.cos_amps * np.sin(phases) + self.sin_amps * np.cos(phases)
        return coef @ self.waves

    def shifted_by(self, other: "TrigScalar", eps: float) -> "TrigScalar":
        """The field self + eps * other (both on the standard wave set)."""
        if not np.array_equal(self.waves, other.waves):
            raise ValueError("can only combine TrigScalar fields on the same wave set")
        return TrigScalar(
            self.offset + eps * other.offset,
            self.waves,
            self.cos_amps + eps * other.cos_amps,
            self.sin_amps + eps * other.sin_amps,
        )


def rotation_field_zyx(alpha: TrigScalar, beta: TrigScalar, gamma: TrigScalar,
                       analytic: bool = True, fd_step: float = DEFAULT_FD_STEP) -> MatrixField:
    """Orthogonal-valued field Rz(alpha(p)) Ry(beta(p)) Rx(gamma(p)).

    With `analytic=True` the exact partial derivatives are attached
    (product rule over the three factors); otherwise the field falls back
    to finite differences, which is useful for exercising FD tolerances.
    """

    def rot(J, theta):
        c, s = np.cos(theta), np.sin(theta)
        return IDENTITY + s * J + (1.0 - c) * (J @ J)

    def value(p):
        return rot(GENERATOR_Z, alpha(p)) @ rot(GENERATOR_Y, beta(p)) @ rot(GENERATOR_X, gamma(p))

    def partials_all(p):
        Rz = rot(GENERATOR_Z, alpha(p))
        Ry = rot(GENERATOR_Y, beta(p))
        Rx = rot(GENERATOR_X, gamma(p))
        RyRx = Ry @ Rx
        A1 = GENERATOR_Z @ Rz @ RyRx
        A2 = Rz @ (GENERATOR_Y @ Ry) @ Rx
        A3 = Rz @ Ry @ (GENERATOR_X @ Rx)
        ga, gb, gg = alpha.grad(p), beta.grad(p), gamma.grad(p)
        return [ga[i] * A1 + gb[i] * A2 + gg[i] * A3 for i in range(3)]

    return MatrixField(value, None, fd_step=fd_step,
                       partials_all=partials_all if analytic else None)


def rotation_field_variation(alpha: TrigScalar, beta: TrigScalar, gamma: TrigScalar,
                             dalpha: TrigScalar, dbeta: TrigScalar,
                             dgamma: TrigScalar) -> MatrixField:
    """Tangent field d/deps of rotation_field_zyx(alpha + eps dalpha, ...)
    at eps = 0.  Values lie in the tangent space of SO(3) at the base
    rotation, which is what manifold-compatible variations require."""

    def rot(J, theta):
        c, s = np.cos(theta), np.sin(theta)
        return IDENTITY + s * J + (1.0 - c) * (J @ J)

    def value(p):
        Rz = rot(GENERATOR_Z, alpha(p))
        Ry = rot(GENERATOR_Y, beta(p))
        Rx = rot(GENERATOR_X, gamma(p))
        return (
            dalpha(p) * (GENERATOR_Z @ Rz) @ Ry @ Rx
            + dbeta(p) * Rz @ (GENERATOR_Y @ Ry) @ Rx
            + dgamma(p) * Rz @ Ry @ (GENERATOR_X @ Rx)
        )

    return MatrixField(value, None)


def random_rotation_field(rng: np.random.Generator, amplitude: float = 0.5,
                          analytic: bool = True) -> MatrixField:
    return rotation_field_zyx(
        TrigScalar.random(rng, amplitude),
        TrigScalar.random(rng, amplitude),
        TrigScalar.random(rng, amplitude),
        analytic=analytic,
    )


def random_deformation_field(rng: np.random.Generator, amplitude: float = 0.3,
                             analytic: bool = True) -> VectorField:
    """Deformation p -> p + u(p) with a smooth periodic displacement u."""
    comps = [TrigScalar.random(rng, amplitude, offset_scale=0.0) for _ in range(3)]

    def value(p):
        return np.asarray(p, dtype=float) + np.array([c(p) for c in comps])

    def partials(p, i):
        e = np.zeros(3)
        e[i] = 1.0
        return e + np.array([c.grad(p)[i] for c in comps])

    return VectorField(value, partials if analytic else None)


def deformation_gradient_field(phi: VectorField, analytic: bool = True) -> MatrixField:
    """F = grad(phi) as a matrix field.

    When phi has analytic partials the values of F are exact; partials of
    F itself are finite-differenced (second derivatives of phi).
    """
    if analytic and phi.has_analytic_partials:
        return MatrixField(lambda p: gradient(phi, p), None, fd_step=phi.fd_step)
    return gradient_field(phi)
