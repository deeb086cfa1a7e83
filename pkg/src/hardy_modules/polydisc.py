"""Quotient modules of the truncated Hardy space on the polydisc.

Coordinates: monomials ``z^k`` with ``0 <= k_i <= N``, ordered as
``numpy.ndindex`` orders them (variable 1 slowest), which is the same order
``numpy.kron`` produces when variable 1 is the leftmost factor.

The truncated shift drops the top degree, so identities involving the
ambient ``M_{z_i}`` are only exact on vectors with ``k_i <= N - 1``; the
adjoint shift is exact on the whole truncation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .blaschke import BlaschkeProduct, complex_from_json
from .config import TOL_FACT, TOL_RANK, CheckFailure, InputError, check_dimension
from .linalg import ProjectionMatrix, kron_all, op_norm, range_basis
from .model_space import ModelSpace, build_model_space, full_space, shift_matrix_1d

DEFECT_AGREEMENT_TOL = 1e-12
REDUCING_TOL = 1e-10


class NotQuotientModuleError(InputError):
    """A raw subspace whose orthocomplement is not invariant under the shifts."""


@dataclass(frozen=True)
class PolydiscTruncation:
    n: int
    N: int

    def __post_init__(self):
        if self.n < 1:
            raise InputError("need at least one variable")
        if self.N < 0:
            raise InputError("truncation must be >= 0")
        check_dimension((self.N + 1) ** self.n, "truncated polydisc space")

    @property
    def dim(self) -> int:
        return (self.N + 1) ** self.n

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.N + 1,) * self.n

    def multi_indices(self) -> np.ndarray:
        return np.array(list(np.ndindex(*self.shape)), dtype=int).reshape(-1, self.n)

    def index_of(self, k) -> int:
        k = tuple(int(x) for x in k)
        if len(k) != self.n or any(not 0 <= x <= self.N for x in k):
            raise InputError(f"multi-index {k} outside the truncation (n={self.n}, N={self.N})")
        return int(np.ravel_multi_index(k, self.shape))

    def safe_mask(self, i: int) -> np.ndarray:
        """Multi-indices with ``k_i <= N - 1``, where the truncated shift in slot i is exact."""
        return self.multi_indices()[:, i - 1] <= self.N - 1

    def _check_var(self, i: int):
        if not 1 <= i <= self.n:
            raise InputError(f"variable index {i} outside 1..{self.n}")


def shift_matrix(trunc: PolydiscTruncation, i: int) -> np.ndarray:
    """Dense matrix of ``M_{z_i}`` on the truncation (variables numbered from 1)."""
    trunc._check_var(i)
    eye = np.eye(trunc.N + 1, dtype=complex)
    mats = [eye] * trunc.n
    mats[i - 1] = shift_matrix_1d(trunc.N)
    return kron_all(mats)


def apply_shift(trunc: PolydiscTruncation, i: int, x: np.ndarray, adjoint: bool = False) -> np.ndarray:
    """``M_{z_i} x`` (or the adjoint) for the columns of ``x`` without forming the matrix."""
    trunc._check_var(i)
    x = np.asarray(x, dtype=complex)
    cols = x.shape[1] if x.ndim == 2 else None
    t = x.reshape(trunc.shape + ((cols,) if cols is not None else ()))
    out = np.zeros_like(t)
    ax = i - 1
    src = [slice(None)] * t.ndim
    dst = [slice(None)] * t.ndim
    if adjoint:
        src[ax], dst[ax] = slice(1, None), slice(None, -1)
    else:
        src[ax], dst[ax] = slice(None, -1), slice(1, None)
    out[tuple(dst)] = t[tuple(src)]
    return out.reshape(x.shape)


@dataclass(frozen=True)
class TensorBuilt:
    thetas: tuple[BlaschkeProduct, ...]


@dataclass(frozen=True, eq=False)
class Raw:
    vectors: np.ndarray = field(repr=False)


@dataclass(frozen=True, eq=False)
class QuotientModule:
    """A subspace Q of the truncated space with its compressed coordinate shifts.

    ``basis`` has orthonormal columns spanning Q; ``compressed_ops[i]`` is
    ``P_Q M_{z_{i+1}}|_Q`` in that basis.
    """

    trunc: PolydiscTruncation
    basis: np.ndarray = field(repr=False)
    compressed_ops: tuple[np.ndarray, ...] = field(repr=False)
    provenance: TensorBuilt | Raw
    coinvariance: float = 0.0

    @property
    def n(self) -> int:
        return self.trunc.n

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def projection(self) -> ProjectionMatrix:
        return ProjectionMatrix(basis=self.basis)

    @property
    def is_full(self) -> bool:
        return self.dim == self.trunc.dim

    def rebuild(self, N: int) -> QuotientModule | None:
        """The same module at another truncation, when the provenance allows it."""
        if isinstance(self.provenance, TensorBuilt):
            return tensor_module(self.provenance.thetas, N)
        return None


def tensor_quotient(factors: list[ModelSpace]) -> QuotientModule:
    """``Q_1 (x) ... (x) Q_n`` with module operators ``I (x) .. C_i .. (x) I``."""
    factors = list(factors)
    if not factors:
        raise InputError("need at least one factor")
    N = factors[0].trunc
    if any(f.trunc != N for f in factors):
        raise InputError(f"factor truncations differ: {[f.trunc for f in factors]}")
    trunc = PolydiscTruncation(len(factors), N)
    basis = kron_all([f.basis for f in factors])
    ops = []
    for i in range(len(factors)):
        mats = [np.eye(f.dim, dtype=complex) for f in factors]
        mats[i] = factors[i].shift
        ops.append(kron_all(mats))
    return QuotientModule(trunc, basis, tuple(ops), TensorBuilt(tuple(f.theta for f in factors)))


def tensor_module(thetas, N: int) -> QuotientModule:
    """Tensor quotient of the model spaces of ``thetas`` (zero function = whole space) at truncation N."""
    factors = [full_space(N) if t.is_zero_function else build_model_space(t, N) for t in thetas]
    return tensor_quotient(factors)


def coinvariance_residual(trunc: PolydiscTruncation, basis: np.ndarray) -> float:
    """``max_i ||(I - P) M_{z_i}^* P||``; the adjoint shift is exact on the truncation."""
    worst = 0.0
    for i in range(1, trunc.n + 1):
        y = apply_shift(trunc, i, basis, adjoint=True)
        r = y - basis @ (basis.conj().T @ y)
        worst = max(worst, op_norm(r))
    return worst


def compressed_shifts(trunc: PolydiscTruncation, basis: np.ndarray) -> tuple[np.ndarray, ...]:
    bh = basis.conj().T
    return tuple(bh @ apply_shift(trunc, i, basis) for i in range(1, trunc.n + 1))


def raw_quotient(
    vectors,
    trunc: PolydiscTruncation,
    tol_rank: float = TOL_RANK,
    tol: float = TOL_FACT,
    check: bool = True,
) -> QuotientModule:
    """Quotient module spanned by the columns of ``vectors``.

    With ``check`` a co-invariance residual above ``tol`` raises
    NotQuotientModuleError; without it the residual is only recorded.
    """
    vectors = np.asarray(vectors, dtype=complex)
    if vectors.ndim == 1:
        vectors = vectors[:, None]
    if vectors.shape[0] != trunc.dim:
        raise InputError(f"vectors have {vectors.shape[0]} rows, truncation needs {trunc.dim}")
    basis = range_basis(vectors, tol_rank)
    if basis.shape[1] == 0:
        raise InputError("spanning set is zero")
    res = coinvariance_residual(trunc, basis)
    if check and res > tol:
        raise NotQuotientModuleError(
            f"span is not co-invariant (residual {res:.3e} > {tol:.1e}); its orthocomplement is not a submodule"
        )
    return QuotientModule(trunc, basis, compressed_shifts(trunc, basis), Raw(vectors), res)


def polynomials_to_vectors(trunc: PolydiscTruncation, polys) -> np.ndarray:
    """Coefficient columns for polynomials given as ``[[multi_index, coeff], ...]``."""
    out = np.zeros((trunc.dim, len(polys)), dtype=complex)
    for j, poly in enumerate(polys):
        for term in poly:
            if len(term) != 2:
                raise InputError(f"polynomial term must be [multi_index, coeff], got {term!r}")
            k, c = term
            out[trunc.index_of(k), j] += complex_from_json(c)
    return out


def doubly_commuting_residual(q: QuotientModule) -> np.ndarray:
    """Operator norms of ``C_i C_j^* - C_j^* C_i``; symmetric with zero diagonal."""
    n = q.n
    out = np.zeros((n, n))
    ops = q.compressed_ops
    for i, j in itertools.combinations(range(n), 2):
        a, b = ops[i], ops[j]
        bh = b.conj().T
        out[i, j] = out[j, i] = op_norm(a @ bh - bh @ a)
    return out


def is_doubly_commuting(q: QuotientModule, tol_dc: float) -> bool:
    return float(doubly_commuting_residual(q).max(initial=0.0)) <= tol_dc


def is_jordan_block(q: QuotientModule, tol_dc: float) -> bool:
    return is_doubly_commuting(q, tol_dc) and not q.is_full


def hereditary_defect_routes(trunc: PolydiscTruncation, excluded: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """``prod_{i != excluded} (I - M_{z_i} M_{z_i}^*)`` evaluated two independent ways.

    Returns the inclusion-exclusion sum over subsets of the other variables
    and the Kronecker product with the identity in slot ``excluded`` and the
    constant projection in every other slot.
    """
    if trunc.n < 2:
        raise InputError("the hereditary defect needs at least two variables")
    trunc._check_var(excluded)
    others = [i for i in range(1, trunc.n + 1) if i != excluded]
    shifts = {i: shift_matrix(trunc, i) for i in others}
    total = np.zeros((trunc.dim, trunc.dim), dtype=complex)
    for size in range(len(others) + 1):
        for subset in itertools.combinations(others, size):
            m = np.eye(trunc.dim, dtype=complex)
            for i in subset:
                m = m @ shifts[i]
            for i in subset:
                m = m @ shifts[i].conj().T
            total += (-1) ** size * m
    const = np.zeros((trunc.N + 1, trunc.N + 1), dtype=complex)
    const[0, 0] = 1.0
    mats = [const] * trunc.n
    mats[excluded - 1] = np.eye(trunc.N + 1, dtype=complex)
    return total, kron_all(mats)


def hereditary_defect(trunc: PolydiscTruncation, excluded: int = 1, tol: float = DEFECT_AGREEMENT_TOL) -> np.ndarray:
    """The defect in product form, after asserting both routes agree within ``tol`` (Frobenius)."""
    total, product = hereditary_defect_routes(trunc, excluded)
    err = float(np.linalg.norm(total - product))
    if err > tol:
        raise CheckFailure("hereditary defect inclusion-exclusion", err, tol)
    return product


@dataclass(frozen=True)
class ReducingResult:
    is_reducing: bool
    factor: ProjectionMatrix | None
    residuals: dict
    reason: str = ""


def reducing_subspace_test(p: ProjectionMatrix, trunc: PolydiscTruncation, tol: float = REDUCING_TOL) -> ReducingResult:
    """Is ran(p) reducing for ``M_{z_2}, ..., M_{z_n}``? If so, return its first-slot factor.

    Commutators are measured on the columns where the truncated shift is
    exact. The factor is read off from ``p`` times the hereditary defect,
    which projects onto ``S_1 (x) C (x) ... (x) C``.
    """
    if trunc.n < 2:
        raise InputError("reducing_subspace_test needs at least two variables")
    P = p.matrix
    residuals = {}
    for i in range(2, trunc.n + 1):
        s = shift_matrix(trunc, i)
        comm = (s @ P - P @ s)[:, trunc.safe_mask(i)]
        residuals[f"commutator_{i}"] = op_norm(comm)
    if max(residuals.values()) > tol:
        return ReducingResult(False, None, residuals, "does not commute with the other coordinate shifts")

    d = hereditary_defect(trunc, 1)
    pd = P @ d
    residuals["defect_product_idempotent"] = float(np.linalg.norm(pd @ pd - pd))
    residuals["defect_product_self_adjoint"] = float(np.linalg.norm(pd - pd.conj().T))
    first_slot = np.array([trunc.index_of((k,) + (0,) * (trunc.n - 1)) for k in range(trunc.N + 1)])
    s1 = range_basis(pd[np.ix_(first_slot, first_slot)], TOL_RANK)
    factor = ProjectionMatrix(basis=s1)
    rebuilt = kron_all([factor.matrix] + [np.eye(trunc.N + 1)] * (trunc.n - 1))
    residuals["tensor_reconstruction"] = op_norm(rebuilt - P)
    if max(residuals.values()) > tol:
        return ReducingResult(False, None, residuals, "projection is not of the form S_1 (x) H^2 (x) ... (x) H^2")
    return ReducingResult(True, factor, residuals)
