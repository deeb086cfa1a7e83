"""Co-doubly commuting submodules ``S = sum_j Theta_j(z_{i_j}) H^2``.

Every factor projection is built from an exact model-space basis, so the
projections being combined genuinely commute and the product formula for
``P_{S^perp}`` is a plain Kronecker product. The truncated multiplier form
``M_Theta M_Theta^*`` is kept only as a diagnostic.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .blaschke import BlaschkeProduct
from .config import (
    TOL_COMM,
    TOL_DC,
    TOL_FACT,
    CheckFailure,
    HardyError,
    InputError,
    check_dimension,
)
from .factorization import Factorization, factorize
from .linalg import ProjectionMatrix, kron_all, op_norm, projection_distance
from .model_space import ModelSpace, build_model_space, full_space, takenaka_malmquist
from .polydisc import (
    PolydiscTruncation,
    QuotientModule,
    doubly_commuting_residual,
    tensor_quotient,
)

AGREEMENT_TOL = 1e-11
LEAKAGE_FLOOR = 1e-17


class NonCommutingProjectionsError(InputError):
    """Projections handed to the commuting sum do not commute."""


class NotJordanBlockError(HardyError):
    """The quotient is the whole truncated space, so there is no submodule to recover."""


def _as_matrix(p) -> np.ndarray:
    return p.matrix if isinstance(p, ProjectionMatrix) else np.asarray(p, dtype=complex)


def projection_sum_routes(ps) -> dict[str, np.ndarray]:
    """The three expressions for the projection onto the sum of ranges.

    ``forward`` is ``sum_k P_k prod_{l>k} (I - P_l)``, ``reverse`` is
    ``sum_k P_k prod_{l<k} (I - P_l)`` and ``product`` is ``I - prod (I - P_k)``.
    """
    mats = [_as_matrix(p) for p in ps]
    if not mats:
        raise InputError("need at least one projection")
    eye = np.eye(mats[0].shape[0], dtype=complex)
    comps = [eye - m for m in mats]
    forward = np.zeros_like(eye)
    for k, m in enumerate(mats):
        term = m
        for c in comps[k + 1 :]:
            term = term @ c
        forward += term
    reverse = np.zeros_like(eye)
    for k, m in enumerate(mats):
        term = m
        for c in comps[:k]:
            term = term @ c
        reverse += term
    prod = eye
    for c in comps:
        prod = prod @ c
    return {"forward": forward, "reverse": reverse, "product": eye - prod}


def commuting_projection_sum(ps, tol_comm: float = TOL_COMM, agree_tol: float = AGREEMENT_TOL) -> ProjectionMatrix:
    """Projection onto ``sum ran P_k`` for pairwise commuting projections.

    Raises NonCommutingProjectionsError on a commutator above ``tol_comm``
    and CheckFailure when the three routes disagree by more than ``agree_tol``.
    """
    mats = [_as_matrix(p) for p in ps]
    for (a, pa), (b, pb) in itertools.combinations(enumerate(mats), 2):
        c = op_norm(pa @ pb - pb @ pa)
        if c > tol_comm:
            raise NonCommutingProjectionsError(f"projections {a} and {b} do not commute (residual {c:.3e})")
    routes = projection_sum_routes(mats)
    for x, y in itertools.combinations(routes, 2):
        err = op_norm(routes[x] - routes[y])
        if err > agree_tol:
            raise CheckFailure(f"projection sum {x} vs {y}", err, agree_tol)
    return ProjectionMatrix(routes["product"], tol=10 * agree_tol)


def truncation_deviation(theta: BlaschkeProduct, N: int) -> dict[str, float]:
    """How far the truncated ``M_Theta M_Theta^*`` is from the exact ``P_{Theta H^2}``.

    On degrees <= N the two agree identically (``top``, roundoff only). The
    exact projection also maps degrees <= N into higher degrees, which the
    truncation cannot see; ``leakage`` is the norm of that block, measured
    against a reference basis extended until its tail is negligible.
    """
    if theta.is_zero_function or theta.degree == 0:
        raise InputError("truncation_deviation needs a Blaschke product of degree >= 1")
    r = theta.max_modulus
    extra = 2 if r == 0 else math.ceil(math.log(LEAKAGE_FLOOR * (1 - r)) / math.log(r)) + 2
    M = N + 1 + max(extra, theta.degree)
    b = takenaka_malmquist(theta.zeros, M)
    t = theta.multiplier(N)
    top = op_norm(t @ t.conj().T - (np.eye(N + 1) - b[: N + 1] @ b[: N + 1].conj().T))
    leakage = op_norm(b[N + 1 :] @ b[: N + 1].conj().T)
    return {"top": top, "leakage": leakage, "reference_truncation": M}


@dataclass(frozen=True, eq=False)
class CoDoublyCommutingSubmodule:
    trunc: PolydiscTruncation
    inners: tuple[tuple[int, BlaschkeProduct], ...]
    model_spaces: dict = field(repr=False)

    @property
    def m(self) -> int:
        return len(self.inners)

    @property
    def indices(self) -> tuple[int, ...]:
        return tuple(i for i, _ in self.inners)

    def factor(self, i: int) -> ModelSpace:
        """One-variable quotient in slot i: a model space if i is listed, else the whole space."""
        return self.model_spaces.get(i) or full_space(self.trunc.N)

    @property
    def quotient_dim(self) -> int:
        return math.prod(self.factor(i).dim for i in range(1, self.trunc.n + 1))

    @property
    def dim(self) -> int:
        return self.trunc.dim - self.quotient_dim

    def factor_projections(self) -> list[np.ndarray]:
        """``P_j = I - (I (x) .. P_{Q_{Theta_j}} .. (x) I)``: projection onto ``Theta_j(z_{i_j}) H^2``."""
        check_dimension(self.trunc.dim, "dense submodule projection")
        eye = np.eye(self.trunc.N + 1, dtype=complex)
        out = []
        for i, _ in self.inners:
            mats = [eye] * self.trunc.n
            mats[i - 1] = self.model_spaces[i].projection()
            out.append(np.eye(self.trunc.dim, dtype=complex) - kron_all(mats))
        return out

    @cached_property
    def projection(self) -> ProjectionMatrix:
        """``P_S`` by the commuting projection sum."""
        return commuting_projection_sum(self.factor_projections())

    @cached_property
    def complement_projection(self) -> ProjectionMatrix:
        """``P_{S^perp} = prod_j (I - P_j)``, realized as a Kronecker product of factor projections."""
        return ProjectionMatrix(basis=self.quotient_basis())

    def quotient_basis(self) -> np.ndarray:
        return kron_all([self.factor(i).basis for i in range(1, self.trunc.n + 1)])

    def residuals(self) -> dict[str, float]:
        """Complementarity and agreement of the two projection formulas (dense)."""
        ps = self.projection.matrix
        pq = self.complement_projection.matrix
        prod = np.eye(self.trunc.dim, dtype=complex)
        for p in self.factor_projections():
            prod = prod @ (np.eye(self.trunc.dim) - p)
        out = {
            "complementarity": op_norm(ps + pq - np.eye(self.trunc.dim)),
            "product_formula": op_norm(prod - pq),
            "rank": abs(self.projection.rank - self.dim),
        }
        out.update({f"projection_{k}": v for k, v in self.projection.residuals().items()})
        return out

    def truncation_diagnostics(self) -> list[dict]:
        return [{"var": i, **truncation_deviation(theta, self.trunc.N)} for i, theta in self.inners]

    def to_json(self) -> dict:
        return {
            "variables": self.trunc.n,
            "truncation": self.trunc.N,
            "inners": [{"var": i, "theta": t.to_json()} for i, t in self.inners],
            "dimension": self.dim,
            "quotient_dimension": self.quotient_dim,
        }


def build_submodule(inners, trunc: PolydiscTruncation) -> CoDoublyCommutingSubmodule:
    """``S = sum_j Theta_j(z_{i_j}) H^2`` at the given truncation.

    Each variable may carry at most one inner function, the zero function
    and unimodular constants are refused, and at least one inner is needed.
    """
    inners = [(int(i), t) for i, t in inners]
    if not inners:
        raise InputError("need at least one inner function (m >= 1)")
    idx = [i for i, _ in inners]
    if len(set(idx)) != len(idx):
        raise InputError(f"duplicate variable index in inners: {idx}")
    for i, t in inners:
        if not 1 <= i <= trunc.n:
            raise InputError(f"variable index {i} outside 1..{trunc.n}")
        if t.is_zero_function:
            raise InputError(f"variable {i}: the zero function contributes nothing to a submodule")
        if t.degree == 0:
            raise InputError(f"variable {i}: a unimodular constant gives the whole space, not a proper quotient")
    inners.sort(key=lambda p: p[0])
    spaces = {i: build_model_space(t, trunc.N) for i, t in inners}
    return CoDoublyCommutingSubmodule(trunc, tuple(inners), spaces)


def quotient_of(s: CoDoublyCommutingSubmodule, tol_dc: float = TOL_DC) -> QuotientModule:
    """``Q = S^perp`` as a tensor quotient; its double commutation is checked."""
    q = tensor_quotient([s.factor(i) for i in range(1, s.trunc.n + 1)])
    dc = float(doubly_commuting_residual(q).max(initial=0.0))
    if dc > tol_dc:
        raise CheckFailure("quotient doubly commuting", dc, tol_dc)
    return q


@dataclass(frozen=True)
class BeurlingResult:
    submodule: CoDoublyCommutingSubmodule
    factorization: Factorization
    residual: float


def beurling_roundtrip(
    q: QuotientModule, tol_dc: float = TOL_DC, tol_fact: float = TOL_FACT, **factor_kwargs
) -> BeurlingResult:
    """Recover ``S = Q^perp`` in the normal form ``sum_j Theta_j(z_{i_j}) H^2``.

    The non-whole factors of the tensor factorization supply the index set
    and inner functions; the rebuilt ``P_S`` must equal ``I - P_Q``.
    """
    f = factorize(q, tol_dc=tol_dc, tol_fact=tol_fact, **factor_kwargs)
    if not f.jordan_block:
        raise NotJordanBlockError("quotient is the whole truncated space (not a Jordan block); S = {0}")
    inners = [(i + 1, fac.theta) for i, fac in enumerate(f.factors) if not fac.is_full]
    s = build_submodule(inners, PolydiscTruncation(q.n, f.truncation))
    qq = q if f.truncation == q.trunc.N else q.rebuild(f.truncation)
    # ||P_S - (I - P_Q)|| = ||P_{S^perp} - P_Q||
    residual = projection_distance(qq.basis, s.quotient_basis())
    if residual > tol_fact:
        raise CheckFailure("Beurling round trip P_S = I - P_Q", residual, tol_fact)
    return BeurlingResult(s, f, residual)
