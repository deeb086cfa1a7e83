"""One-variable quotient modules of H^2(D).

For a finite Blaschke product of degree d the quotient ``H^2 / theta H^2`` is
d-dimensional, with the Takenaka-Malmquist functions as orthonormal basis.
Basis functions are stored as Taylor coefficient columns through ``trunc``.
The zero function stands for the whole Hardy space, which at truncation
``trunc`` is represented by the monomials ``1, z, ..., z**trunc``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .blaschke import BlaschkeProduct
from .config import TOL_RANK, CheckFailure, InputError, check_dimension
from .linalg import op_norm, projection_distance, range_basis, sin_angle_to_span

GUARD_TAIL = 1e-13
IDENTITY_TOL = 1e-10
DEFECT_TOL = 1e-8
CLUSTER_EPS = 1e-12


class TruncationError(InputError):
    """Taylor truncation too small for the requested model space."""


class NotModelShiftError(InputError):
    """Matrix is not the compressed shift of a one-variable model space."""


def guard_truncation(theta: BlaschkeProduct) -> int:
    """Smallest truncation whose Taylor tail bound ``r**(trunc-d) / (1-r)`` is <= 1e-13.

    Zeros at the origin give polynomial basis functions of degree < d, so in
    that case ``d - 1`` already embeds the basis exactly.
    """
    d = theta.degree
    r = theta.max_modulus
    if d == 0:
        return 0
    if r == 0:
        return d - 1
    k = math.ceil(math.log(GUARD_TAIL * (1 - r)) / math.log(r))
    k = max(k, 0)
    while r**k / (1 - r) > GUARD_TAIL:
        k += 1
    return d + k


def shift_matrix_1d(trunc: int) -> np.ndarray:
    """Multiplication by z on polynomials of degree <= trunc (top degree falls off)."""
    return np.eye(trunc + 1, k=-1, dtype=complex)


def _apply_shift(cols: np.ndarray) -> np.ndarray:
    out = np.zeros_like(cols)
    out[1:] = cols[:-1]
    return out


def takenaka_malmquist(zeros, trunc: int) -> np.ndarray:
    """Taylor coefficients (rows) of the Takenaka-Malmquist functions (columns).

    ``e_k = sqrt(1-|a_k|^2) / (1 - conj(a_k) z) * prod_{j<k} (z - a_j)/(1 - conj(a_j) z)``
    """
    zeros = list(zeros)
    basis = np.zeros((trunc + 1, len(zeros)), dtype=complex)
    partial = np.zeros(trunc + 1, dtype=complex)
    partial[0] = 1.0
    for k, a in enumerate(zeros):
        ab = np.conj(a)
        scale = math.sqrt(1 - abs(a) ** 2)
        col = np.empty(trunc + 1, dtype=complex)
        # divide by (1 - conj(a) z): e_m = conj(a) e_{m-1} + scale * p_m
        col[0] = scale * partial[0]
        for m in range(1, trunc + 1):
            col[m] = ab * col[m - 1] + scale * partial[m]
        basis[:, k] = col
        nxt = np.empty_like(partial)
        nxt[0] = -a * partial[0]
        for m in range(1, trunc + 1):
            nxt[m] = ab * nxt[m - 1] + partial[m - 1] - a * partial[m]
        partial = nxt
    return basis


@dataclass(frozen=True, eq=False)
class ModelSpace:
    """A one-variable quotient module with an orthonormal basis and compressed shift.

    ``theta`` is the zero function when the space is the whole (truncated)
    Hardy space; ``is_full`` tells the two situations apart.
    """

    theta: BlaschkeProduct
    basis: np.ndarray
    shift: np.ndarray
    trunc: int

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def is_full(self) -> bool:
        return self.theta.is_zero_function

    def projection(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T

    def defect(self) -> np.ndarray:
        """``I - C C*`` in the stored basis."""
        return np.eye(self.dim) - self.shift @ self.shift.conj().T

    def gram_defect(self) -> np.ndarray:
        """``P_Q P_C P_Q`` in the stored basis (outer product of the coordinates of P_Q 1)."""
        w = self.basis[0].conj()
        return np.outer(w, w.conj())

    def describe(self) -> dict:
        if self.is_full:
            return {"type": "full"}
        return self.theta.to_json()


def build_model_space(theta: BlaschkeProduct, trunc: int | None = None) -> ModelSpace:
    """Model space of a finite Blaschke product, embedded through Taylor degree ``trunc``.

    ``trunc=None`` picks the guard truncation; an explicit value below it is an error.
    """
    if theta.is_zero_function:
        raise InputError("the zero function has the whole Hardy space as quotient; use full_space")
    guard = guard_truncation(theta)
    if trunc is None:
        trunc = guard
    elif trunc < guard:
        raise TruncationError(
            f"truncation {trunc} below guard {guard} for degree {theta.degree}, "
            f"max |zero| {theta.max_modulus:.3g}"
        )
    check_dimension(trunc + 1, "Taylor truncation")
    basis = takenaka_malmquist(theta.zeros, trunc)
    shift = basis.conj().T @ _apply_shift(basis)
    return ModelSpace(theta, basis, shift, trunc)


def full_space(trunc: int) -> ModelSpace:
    if trunc < 0:
        raise ValueError("trunc must be >= 0")
    check_dimension(trunc + 1, "Taylor truncation")
    return ModelSpace(BlaschkeProduct.zero(), np.eye(trunc + 1, dtype=complex), shift_matrix_1d(trunc), trunc)


def model_space_from_basis(basis: np.ndarray, theta: BlaschkeProduct | None = None) -> ModelSpace:
    """Wrap an orthonormal basis of a one-variable quotient module (Taylor rows)."""
    trunc = basis.shape[0] - 1
    shift = basis.conj().T @ _apply_shift(basis)
    if theta is None:
        theta = BlaschkeProduct.zero() if basis.shape[1] == trunc + 1 else recover_inner_from_shift(shift)
    return ModelSpace(theta, basis, shift, trunc)


@dataclass(frozen=True)
class ProjectOneResult:
    coords: np.ndarray  # P_Q 1 in the model-space basis
    ppp_coords: np.ndarray  # (P_Q P_C P_Q) 1
    value_at_origin: complex
    residuals: dict
    collinearity_angle: float


def project_one(theta: BlaschkeProduct, trunc: int | None = None, tol: float = IDENTITY_TOL) -> ProjectOneResult:
    """Coordinates of ``P_Q 1`` and ``(P_Q P_C P_Q) 1``, each computed two ways.

    Closed forms ``1 - conj(theta(0)) theta`` and ``(1 - |theta(0)|^2)`` times
    it are checked against direct Gram projection of the constant function.
    Disagreement beyond ``tol`` raises CheckFailure.
    """
    if theta.is_zero_function:
        raise InputError("project_one needs a Blaschke product, not the zero function")
    ms = build_model_space(theta, trunc)
    b = ms.basis
    t0 = theta.value_at_origin()

    closed = -np.conj(t0) * theta.taylor(ms.trunc)
    closed[0] += 1.0
    closed_coords = b.conj().T @ closed
    gram_coords = b[0].conj().copy()  # B* e_0

    ppp_gram = ms.gram_defect() @ gram_coords
    ppp_closed = (1 - abs(t0) ** 2) * closed_coords

    residuals = {
        "p_one": float(np.linalg.norm(closed_coords - gram_coords)),
        "p_one_in_q": float(np.linalg.norm(closed - b @ closed_coords)),
        "ppp_one": float(np.linalg.norm(ppp_gram - ppp_closed)),
    }
    for name, res in residuals.items():
        if res > tol:
            raise CheckFailure(f"project_one {name}", res, tol)

    if ms.dim == 0:
        angle = 0.0
    else:
        rng = range_basis(ms.gram_defect(), TOL_RANK)
        angle = math.asin(sin_angle_to_span(gram_coords, rng)) if rng.shape[1] else 0.0
    return ProjectOneResult(gram_coords, ppp_gram, t0, residuals, angle)


@dataclass(frozen=True)
class Regeneration:
    dim: int
    span_dim: int
    residual: float
    wandering: np.ndarray  # spans ran(I - C C*)

    @property
    def passed(self) -> bool:
        return self.span_dim == self.dim


def wandering_regeneration(ms: ModelSpace, tol_rank: float = TOL_RANK) -> Regeneration:
    """Grow ``L = ran(I - C C*)`` under the compressed shift and measure the span.

    Arnoldi with reorthogonalisation; a step whose new direction is below
    ``tol_rank`` (relative to the starting vector) ends the Krylov sequence.
    """
    d = ms.dim
    if d == 0:
        return Regeneration(0, 0, 0.0, np.zeros(0, dtype=complex))
    wb = range_basis(ms.defect(), tol_rank)
    if wb.shape[1] == 0:
        return Regeneration(d, 0, 1.0, np.zeros(d, dtype=complex))
    v = wb[:, 0]
    vecs = [v]
    c = ms.shift
    for _ in range(d - 1):
        w = c @ vecs[-1]
        V = np.column_stack(vecs)
        for _ in range(2):
            w = w - V @ (V.conj().T @ w)
        nw = np.linalg.norm(w)
        if nw <= tol_rank:
            break
        vecs.append(w / nw)
    V = np.column_stack(vecs)
    residual = projection_distance(V, np.eye(d)) if V.shape[1] == d else 1.0
    return Regeneration(d, V.shape[1], residual, v)


def _linkage_groups(values: np.ndarray, threshold: float) -> list[np.ndarray]:
    n = len(values)
    label = np.arange(n)
    close = np.abs(values[:, None] - values[None, :]) <= threshold
    changed = True
    while changed:
        changed = False
        for i in range(n):
            for j in np.nonzero(close[i])[0]:
                if label[j] != label[i]:
                    low = min(label[i], label[j])
                    label[label == label[i]] = low
                    label[label == label[j]] = low
                    changed = True
    return [values[label == k] for k in np.unique(label)]


def _cluster_mean(values: np.ndarray, eps: float) -> list[complex]:
    """Merge eigenvalues that sit within the perturbation radius of a multiple root.

    An m-fold eigenvalue perturbed by eps splits over a radius of roughly
    eps**(1/m). A group of m eigenvalues lying within twice that radius of its
    mean is replaced by the mean, which is accurate to O(eps).
    """
    values = np.asarray(values, dtype=complex)
    m = len(values)
    if m <= 1:
        return list(values)
    mu = values.mean()
    if np.max(np.abs(values - mu)) <= 2 * eps ** (1.0 / m):
        return [complex(mu)] * m
    for k in range(m - 1, 0, -1):
        groups = _linkage_groups(values, 4 * eps ** (1.0 / k))
        if len(groups) > 1:
            out = []
            for g in groups:
                out.extend(_cluster_mean(g, eps))
            return out
    return [complex(v) for v in values]


def recover_inner_from_shift(shift, tol: float = DEFECT_TOL, cluster_eps: float = CLUSTER_EPS) -> BlaschkeProduct:
    """Blaschke product whose model space carries the given compressed shift.

    Zeros are the eigenvalues (Schur diagonal, with multiplicity) and the
    constant is 1. The defect ``I - A A*`` must have rank <= 1.
    """
    a = np.asarray(shift, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotModelShiftError(f"shift must be square, got shape {a.shape}")
    d = a.shape[0]
    if d == 0:
        return BlaschkeProduct(())
    if op_norm(a) > 1 + tol:
        raise NotModelShiftError(f"shift is not a contraction (norm {op_norm(a):.6g})")
    s = np.linalg.svd(np.eye(d) - a @ a.conj().T, compute_uv=False)
    defect_rank = int(np.sum(s > tol))
    if defect_rank > 1:
        raise NotModelShiftError(f"defect rank {defect_rank} > 1; singular values {s[:3]}")
    t, _ = scipy.linalg.schur(a, output="complex")
    eig = np.diag(t)
    if np.any(np.abs(eig) >= 1 - tol):
        raise NotModelShiftError(f"eigenvalue with modulus >= 1 - {tol}: {eig[np.argmax(np.abs(eig))]}")
    return BlaschkeProduct(tuple(_cluster_mean(eig, cluster_eps)))
