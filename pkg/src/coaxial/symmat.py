"""
Dense symmetric-matrix algebra for 2x2 and 3x3 tensors.

Matrices are plain ``numpy.ndarray`` objects of shape (n, n) with n in {2, 3};
:func:`as_symmetric` validates them. Spectral work goes through a cyclic Jacobi
solver so that eigenvalue ordering, eigenvector signs and multiplicity
clusters are reproducible run to run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .exceptions import (
    DimensionError,
    DomainError,
    EigenConvergenceError,
    NotCommutingError,
)

CLUSTER_RTOL = 1e-8
CLUSTER_ATOL = 1e-12
COMMUTE_TOL = 1e-10
JACOBI_MAX_SWEEPS = 100
JACOBI_REL_THRESHOLD = 1e-14

_VOIGT_3 = ((0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2))
_VOIGT_2 = ((0, 0), (1, 1), (0, 1))
_LOWER = {n: np.tril(np.ones((n, n), dtype=bool), -1) for n in (1, 2, 3)}


def as_symmetric(A, dims: Sequence[int] = (2, 3), sym_tol: float = 1e-10) -> np.ndarray:
    """Validate ``A`` as a finite symmetric matrix and return a symmetrized copy.

    Only the upper triangle is trusted; the lower triangle must agree with it
    to ``sym_tol`` relative to the largest entry.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] not in dims:
        raise DimensionError(f"expected a square matrix with n in {tuple(dims)}, got shape {A.shape}")
    # a non-finite entry makes the max non-finite as well
    scale = float(np.abs(A).max())
    if not math.isfinite(scale):
        raise DomainError("matrix has non-finite entries")
    if float(np.abs(A - A.T).max()) > sym_tol * max(1.0, scale):
        raise DomainError("matrix is not symmetric")
    return np.where(_LOWER[A.shape[0]], A.T, A)


def from_voigt(values: Sequence[float]) -> np.ndarray:
    """Build a symmetric matrix from its wire format.

    Six values are read as (xx, yy, zz, xy, xz, yz) and three as (xx, yy, xy).
    """
    values = [float(v) for v in values]
    if len(values) == 6:
        n, order = 3, _VOIGT_3
    elif len(values) == 3:
        n, order = 2, _VOIGT_2
    else:
        raise DimensionError(f"symmetric matrix needs 3 or 6 components, got {len(values)}")
    A = np.zeros((n, n))
    for v, (i, j) in zip(values, order):
        A[i, j] = A[j, i] = v
    return as_symmetric(A)


def to_voigt(A) -> list[float]:
    A = as_symmetric(A)
    order = _VOIGT_3 if A.shape[0] == 3 else _VOIGT_2
    return [float(A[i, j]) for i, j in order]


def _same(x: float, y: float, rtol: float, atol: float) -> bool:
    return abs(x - y) <= max(rtol * max(1.0, abs(x), abs(y)), atol)


def cluster_indices(values: Sequence[float], rtol: float = CLUSTER_RTOL,
                    atol: float = CLUSTER_ATOL) -> tuple[tuple[int, ...], ...]:
    """Group indices of (descending) ``values`` whose neighbours coincide within tolerance."""
    if len(values) == 0:
        return ()
    clusters = [[0]]
    for k in range(1, len(values)):
        if _same(values[k - 1], values[k], rtol, atol):
            clusters[-1].append(k)
        else:
            clusters.append([k])
    return tuple(tuple(c) for c in clusters)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Orthogonal eigenbasis with descending eigenvalues.

    ``basis[:, k]`` is the eigenvector for ``eigenvalues[k]``, so the input is
    ``basis @ diag(eigenvalues) @ basis.T``.
    """

    basis: np.ndarray
    eigenvalues: np.ndarray
    clusters: tuple[tuple[int, ...], ...]

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    def distinct_values(self) -> np.ndarray:
        """One representative (the cluster mean) per eigenvalue cluster."""
        return np.array([np.mean(self.eigenvalues[list(c)]) for c in self.clusters])

    def cluster_of(self) -> list[int]:
        """Cluster label for each eigenvalue index."""
        labels = [0] * self.dim
        for label, members in enumerate(self.clusters):
            for i in members:
                labels[i] = label
        return labels

    def reconstruct(self) -> np.ndarray:
        return (self.basis * self.eigenvalues) @ self.basis.T

    def apply(self, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        out = (self.basis * f(self.eigenvalues)) @ self.basis.T
        return 0.5 * (out + out.T)


def _jacobi(A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # plain floats: numpy call overhead dominates at n <= 3
    n = A.shape[0]
    a = A.tolist()
    v = [[1.0 if i == j else 0.0 for j in range(n)] for i in range(n)]
    norm = math.sqrt(sum(x * x for row in a for x in row))
    if n == 1 or norm == 0.0:
        return np.array([a[i][i] for i in range(n)]), np.eye(n)
    threshold = JACOBI_REL_THRESHOLD * norm
    off = 0.0
    for _ in range(JACOBI_MAX_SWEEPS):
        off = math.sqrt(2.0 * sum(a[p][q] ** 2 for p in range(n) for q in range(p + 1, n)))
        if off <= threshold:
            return np.array([a[i][i] for i in range(n)]), np.array(v)
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p][q]
                if apq == 0.0:
                    continue
                tau = (a[q][q] - a[p][p]) / (2.0 * apq)
                t = math.copysign(1.0, tau) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                for k in range(n):
                    akp, akq = a[k][p], a[k][q]
                    a[k][p] = c * akp - s * akq
                    a[k][q] = s * akp + c * akq
                for k in range(n):
                    apk, aqk = a[p][k], a[q][k]
                    a[p][k] = c * apk - s * aqk
                    a[q][k] = s * apk + c * aqk
                a[p][q] = a[q][p] = 0.0
                for k in range(n):
                    vkp, vkq = v[k][p], v[k][q]
                    v[k][p] = c * vkp - s * vkq
                    v[k][q] = s * vkp + c * vkq
    raise EigenConvergenceError(
        f"Jacobi eigensolver did not converge in {JACOBI_MAX_SWEEPS} sweeps (off-diagonal norm {off:.3e})"
    )


def _canonical_signs(vectors: np.ndarray) -> np.ndarray:
    out = vectors.copy()
    for k in range(out.shape[1]):
        col = out[:, k]
        for x in col:
            if abs(x) > 1e-12:
                if x < 0:
                    out[:, k] = -col
                break
    return out


def eigendecompose(A, rtol: float = CLUSTER_RTOL, atol: float = CLUSTER_ATOL) -> SpectralDecomposition:
    """Spectral decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Eigenvalues come back in descending order; each eigenvector has its first
    non-negligible component positive. Eigenvalues with
    ``|a_i - a_j| <= max(rtol * max(1, |a_i|, |a_j|), atol)`` share a cluster.

    Raises
    ------
    EigenConvergenceError
        If the off-diagonal mass does not drop below ``1e-14 * ||A||`` within
        100 sweeps.
    """
    A = as_symmetric(A, dims=(1, 2, 3))
    return _decompose(A, rtol, atol)


def _decompose(A: np.ndarray, rtol: float, atol: float) -> SpectralDecomposition:
    values, vectors = _jacobi(A)
    order = np.argsort(-values, kind="stable")
    values = values[order]
    vectors = _canonical_signs(vectors[:, order])
    return SpectralDecomposition(vectors, values, cluster_indices(values, rtol, atol))


class Invariants(NamedTuple):
    """Principal invariants (trace, cofactor trace, determinant)."""

    i1: float
    i2: float
    i3: float


def invariants(B) -> Invariants:
    B = as_symmetric(B, dims=(3,))
    i1 = float(np.trace(B))
    i2 = 0.5 * (i1 * i1 - float(np.trace(B @ B)))
    return Invariants(i1, i2, float(np.linalg.det(B)))


def invariants_of_values(x: Sequence[float]) -> Invariants:
    x1, x2, x3 = (float(v) for v in x)
    return Invariants(x1 + x2 + x3, x1 * x2 + x1 * x3 + x2 * x3, x1 * x2 * x3)


def eigenvalues_from_invariants(inv: Sequence[float]) -> np.ndarray:
    """Roots of ``x^3 - I1 x^2 + I2 x - I3`` in descending order.

    Uses the trigonometric form of the depressed cubic (argument of ``acos``
    clamped to [-1, 1]) followed by one Newton polish per root.

    Raises
    ------
    DomainError
        If the roots are not all real and positive.
    """
    i1, i2, i3 = (float(v) for v in inv)
    shift = i1 / 3.0
    p = i2 - i1 * i1 / 3.0
    q = -2.0 * i1 ** 3 / 27.0 + i1 * i2 / 3.0 - i3
    scale = max(1.0, abs(i1), abs(i2) ** 0.5, abs(i3) ** (1.0 / 3.0))
    disc = q * q / 4.0 + p ** 3 / 27.0
    if disc > 1e-12 * scale ** 6:
        raise DomainError(f"invariants {tuple(inv)} have complex eigenvalues")
    if p >= -1e-14 * scale ** 2:
        roots = np.full(3, shift)
    else:
        r = 2.0 * math.sqrt(-p / 3.0)
        arg = 3.0 * q / (p * r)
        theta = math.acos(min(1.0, max(-1.0, arg))) / 3.0
        roots = np.array([shift + r * math.cos(theta - 2.0 * math.pi * k / 3.0) for k in range(3)])
    polished = []
    for x in roots:
        f = ((x - i1) * x + i2) * x - i3
        df = (3.0 * x - 2.0 * i1) * x + i2
        if df != 0.0 and abs(f / df) < 1e-6 * scale:
            x -= f / df
        polished.append(x)
    roots = np.sort(np.array(polished))[::-1]
    if roots[-1] <= 0.0:
        raise DomainError(f"invariants {tuple(inv)} have non-positive eigenvalues")
    return roots


def commutes(A, B, tol: float = COMMUTE_TOL) -> bool:
    """True iff ``||AB - BA||_F <= tol * (1 + ||A||_F ||B||_F)``."""
    A, B = as_symmetric(A), as_symmetric(B)
    if A.shape != B.shape:
        raise DimensionError(f"dimension mismatch {A.shape} vs {B.shape}")
    return _commutes(A, B, tol)


def _commutes(A: np.ndarray, B: np.ndarray, tol: float) -> bool:
    if tol == math.inf:
        return True
    AB = A @ B
    # both symmetric, so BA is the transpose of AB
    comm = math.sqrt(float(np.sum((AB - AB.T) ** 2)))
    return comm <= tol * (1.0 + math.sqrt(float(np.sum(A * A)) * float(np.sum(B * B))))


def simultaneous_diagonalize(A, B, tol: float = COMMUTE_TOL, rtol: float = CLUSTER_RTOL,
                             atol: float = CLUSTER_ATOL, spec_a: SpectralDecomposition | None = None):
    """Common orthogonal eigenbasis of two commuting symmetric matrices.

    A is decomposed first; B is then diagonalized inside each eigenspace of A,
    so ``b[k]`` is the eigenvalue of B corresponding to ``a[k]``.

    Returns
    -------
    Q : ndarray
        Columns are the shared eigenvectors (``A = Q diag(a) Q^T``).
    a, b : ndarray
        Eigenvalues of A (descending) and the corresponding ones of B.
    spec_a : SpectralDecomposition
        Decomposition of A, carrying its clusters.

    A decomposition of A that is already at hand can be passed as ``spec_a``
    to skip the eigensolve.
    """
    A, B = as_symmetric(A), as_symmetric(B)
    if A.shape != B.shape:
        raise DimensionError(f"dimension mismatch {A.shape} vs {B.shape}")
    if not _commutes(A, B, tol):
        raise NotCommutingError("matrices do not commute within tolerance")
    dec = _decompose(A, rtol, atol) if spec_a is None else spec_a
    Q = dec.basis.copy()
    for members in dec.clusters:
        if len(members) == 1:
            continue
        idx = list(members)
        P = Q[:, idx]
        block = P.T @ B @ P
        sub = _decompose(0.5 * (block + block.T), rtol, atol)
        Q[:, idx] = P @ sub.basis
    b = np.einsum("ik,ij,jk->k", Q, B, Q)
    return Q, dec.eigenvalues.copy(), b, dec


def _pattern_ok(clusters, b, rtol, atol) -> bool:
    for members in clusters:
        vals = [b[i] for i in members]
        if any(not _same(vals[0], v, rtol, atol) for v in vals[1:]):
            return False
    return True


def is_coaxial(A, B, tol: float = COMMUTE_TOL, rtol: float = CLUSTER_RTOL,
               atol: float = CLUSTER_ATOL, spec_a: SpectralDecomposition | None = None) -> bool:
    """Whether every eigenvector of A is an eigenvector of B.

    Decided by commutation plus the eigenvalue pattern: equal eigenvalues of A
    must carry equal corresponding eigenvalues of B.
    """
    try:
        _, _, b, dec = simultaneous_diagonalize(A, B, tol, rtol, atol, spec_a)
    except NotCommutingError:
        return False
    return _pattern_ok(dec.clusters, b, rtol, atol)


def is_bicoaxial(A, B, tol: float = COMMUTE_TOL, rtol: float = CLUSTER_RTOL,
                 atol: float = CLUSTER_ATOL, spec_a: SpectralDecomposition | None = None,
                 spec_b: SpectralDecomposition | None = None) -> bool:
    return (is_coaxial(A, B, tol, rtol, atol, spec_a)
            and is_coaxial(B, A, tol, rtol, atol, spec_b))


def matrix_function(A, f: Callable[[np.ndarray], np.ndarray], spd: bool = False) -> np.ndarray:
    """Apply a scalar function to the eigenvalues of a symmetric matrix.

    With ``spd=True`` the input must be positive definite.
    """
    dec = eigendecompose(A)
    if spd and dec.eigenvalues[-1] <= 0.0:
        raise DomainError("matrix is not positive definite")
    return dec.apply(f)


def sym_log(A) -> np.ndarray:
    return matrix_function(A, np.log, spd=True)


def sym_sqrt(A) -> np.ndarray:
    return matrix_function(A, np.sqrt, spd=True)


def sym_inv(A) -> np.ndarray:
    return matrix_function(A, np.reciprocal, spd=True)


def dev(A) -> np.ndarray:
    """Deviatoric part ``A - tr(A)/n * id``."""
    A = as_symmetric(A)
    n = A.shape[0]
    return A - np.trace(A) / n * np.eye(n)


def is_spd(A) -> bool:
    try:
        np.linalg.cholesky(as_symmetric(A))
    except np.linalg.LinAlgError:
        return False
    return True


def random_rotation(rng: np.random.Generator, n: int = 3) -> np.ndarray:
    """Haar-distributed proper rotation from an orthogonalized Gaussian."""
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    Q = Q * np.sign(np.diag(R))
    if np.linalg.det(Q) < 0:
        Q[:, 0] = -Q[:, 0]
    return Q
