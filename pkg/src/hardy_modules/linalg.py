"""Dense complex linear algebra shared by every other module.

Subspaces are carried around as matrices with orthonormal columns whenever
possible; dense projection matrices are only formed on request, because the
truncated polydisc spaces get large quickly.
"""

from __future__ import annotations

from functools import cached_property

import numpy as np
import scipy.linalg

from .config import TOL_RANK, check_dimension

__all__ = [
    "ProjectionMatrix",
    "as_cmatrix",
    "commutator_norm",
    "kernel_basis",
    "kron",
    "kron_all",
    "op_norm",
    "orth_projection_onto_columns",
    "projection_distance",
    "range_basis",
    "sin_angle_to_span",
]


def as_cmatrix(a, name: str = "matrix") -> np.ndarray:
    arr = np.asarray(a, dtype=complex)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def op_norm(a: np.ndarray) -> float:
    """Spectral norm; 0 for empty matrices."""
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def kron(a, b) -> np.ndarray:
    """Kronecker product with the left factor varying slowest.

    Raises DimensionLimitError before allocating anything too large.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    rows = a.shape[0] * b.shape[0]
    cols = a.shape[1] * b.shape[1]
    check_dimension(max(rows, cols), "Kronecker product")
    return np.kron(a, b)


def kron_all(mats) -> np.ndarray:
    mats = list(mats)
    if not mats:
        return np.ones((1, 1), dtype=complex)
    out = np.asarray(mats[0], dtype=complex)
    for m in mats[1:]:
        out = kron(out, m)
    return out


def range_basis(v, tol_rank: float = TOL_RANK) -> np.ndarray:
    """Orthonormal basis of the column span.

    Singular values at or below ``tol_rank * sigma_max`` count as zero.
    An all-zero input gives a basis with no columns.
    """
    v = as_cmatrix(v)
    if v.shape[1] == 0 or not np.any(v):
        return np.zeros((v.shape[0], 0), dtype=complex)
    u, s, _ = np.linalg.svd(v, full_matrices=False)
    keep = s > tol_rank * s[0]
    return u[:, keep]


def kernel_basis(a, tol_rank: float = TOL_RANK, scale: float | None = None) -> np.ndarray:
    """Orthonormal basis of the numerical null space of ``a``.

    Singular values at or below ``tol_rank * scale`` count as zero; ``scale``
    defaults to the largest singular value. Pass a known norm bound when
    ``a`` may be pure roundoff, where a relative threshold is meaningless.
    """
    a = as_cmatrix(a)
    n = a.shape[1]
    if a.shape[0] == 0 or not np.any(a):
        return np.eye(n, dtype=complex)
    # For tall inputs the thin SVD already returns the complete right factor.
    _, s, vh = np.linalg.svd(a, full_matrices=a.shape[0] < n)
    ref = s[0] if scale is None else scale
    rank = int(np.sum(s > tol_rank * ref))
    return vh[rank:].conj().T


def commutator_norm(a, b) -> tuple[float, float]:
    """Frobenius and operator norm of ``a b* - b* a``."""
    a = as_cmatrix(a, "a")
    b = as_cmatrix(b, "b")
    if a.shape != b.shape or a.shape[0] != a.shape[1]:
        raise ValueError(f"commutator needs equal square shapes, got {a.shape} and {b.shape}")
    bh = b.conj().T
    c = a @ bh - bh @ a
    return float(np.linalg.norm(c)), op_norm(c)


def sin_angle_to_span(x, basis) -> float:
    """Sine of the angle between vector ``x`` and the span of orthonormal ``basis``."""
    x = np.asarray(x, dtype=complex).ravel()
    nx = np.linalg.norm(x)
    if nx == 0:
        return 0.0
    basis = as_cmatrix(basis)
    r = x - basis @ (basis.conj().T @ x)
    return float(min(1.0, np.linalg.norm(r) / nx))


def projection_distance(u, v) -> float:
    """``||P_U - P_V||_op`` for orthonormal bases ``u`` and ``v``.

    Computed from the residuals ``(I - P_V) U`` so that tiny distances are not
    lost to cancellation the way ``sqrt(1 - cos^2)`` would lose them.
    """
    u = as_cmatrix(u, "u")
    v = as_cmatrix(v, "v")
    if u.shape[1] != v.shape[1]:
        return 1.0
    if u.shape[1] == 0:
        return 0.0
    ru = u - v @ (v.conj().T @ u)
    rv = v - u @ (u.conj().T @ v)
    return float(min(1.0, max(op_norm(ru), op_norm(rv))))


class ProjectionMatrix:
    """Orthogonal projection on C^dim.

    Build it from an orthonormal basis of its range (cheap, the dense matrix is
    formed lazily) or from an explicit matrix.
    """

    def __init__(self, matrix=None, *, basis=None, tol: float = 10 * TOL_RANK):
        if (matrix is None) == (basis is None):
            raise ValueError("give exactly one of matrix or basis")
        self.tol = float(tol)
        if basis is not None:
            basis = as_cmatrix(basis, "basis")
            self._basis = basis
            self.dim = basis.shape[0]
        else:
            matrix = as_cmatrix(matrix, "projection")
            if matrix.shape[0] != matrix.shape[1]:
                raise ValueError("projection matrix must be square")
            self.__dict__["matrix"] = matrix
            self._basis = None
            self.dim = matrix.shape[0]

    @classmethod
    def zero(cls, dim: int) -> ProjectionMatrix:
        return cls(basis=np.zeros((dim, 0), dtype=complex))

    @classmethod
    def identity(cls, dim: int) -> ProjectionMatrix:
        check_dimension(dim, "identity projection")
        return cls(basis=np.eye(dim, dtype=complex))

    @cached_property
    def matrix(self) -> np.ndarray:
        check_dimension(self.dim, "dense projection")
        b = self._basis
        return b @ b.conj().T

    @property
    def basis(self) -> np.ndarray:
        if self._basis is None:
            w, vecs = scipy.linalg.eigh(0.5 * (self.matrix + self.matrix.conj().T))
            self._basis = vecs[:, w > 0.5]
        return self._basis

    @property
    def rank(self) -> int:
        if self._basis is not None:
            return self._basis.shape[1]
        return round(float(np.trace(self.matrix).real))

    def residuals(self) -> dict[str, float]:
        """Frobenius residuals of idempotence and self-adjointness, and trace vs rank."""
        p = self.matrix
        return {
            "idempotence": float(np.linalg.norm(p @ p - p)),
            "self_adjoint": float(np.linalg.norm(p - p.conj().T)),
            "trace_rank": float(abs(np.trace(p).real - self.rank)),
        }

    def is_valid(self) -> bool:
        return all(r <= self.tol for r in self.residuals().values())

    def complement(self) -> ProjectionMatrix:
        return ProjectionMatrix(np.eye(self.dim) - self.matrix, tol=self.tol)

    def __repr__(self) -> str:
        return f"ProjectionMatrix(dim={self.dim}, rank={self.rank})"


def orth_projection_onto_columns(v, tol_rank: float = TOL_RANK) -> ProjectionMatrix:
    """Projection onto the column span of ``v`` (rank-revealing, via SVD)."""
    v = as_cmatrix(v)
    if v.shape[1] == 0:
        raise ValueError("need at least one column")
    return ProjectionMatrix(basis=range_basis(v, tol_rank), tol=10 * tol_rank)
