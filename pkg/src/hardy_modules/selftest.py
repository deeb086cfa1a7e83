"""Randomized invariant suites run by ``hardy-modules selftest``.

Sizes are kept small so the whole run takes seconds; the seed makes every
draw reproducible.
"""

from __future__ import annotations

import numpy as np

from .blaschke import BlaschkeProduct, match_zeros
from .certificate import VerificationCertificate
from .config import RunConfig
from .factorization import factorize
from .linalg import op_norm, orth_projection_onto_columns, projection_distance
from .model_space import guard_truncation
from .polydisc import (
    PolydiscTruncation,
    hereditary_defect_routes,
    raw_quotient,
    tensor_module,
)
from .submodule import (
    AGREEMENT_TOL,
    beurling_roundtrip,
    build_submodule,
    projection_sum_routes,
    quotient_of,
)

ZERO_MATCH_TOL = 1e-8


def random_blaschke(rng: np.random.Generator, degree: int, rmax: float) -> BlaschkeProduct:
    """Zeros uniform in modulus on [0, rmax] with uniform argument; constant 1."""
    r = rng.uniform(0, rmax, degree)
    phi = rng.uniform(0, 2 * np.pi, degree)
    return BlaschkeProduct(tuple(r * np.exp(1j * phi)))


def random_commuting_family(rng: np.random.Generator, dim: int, count: int) -> list[np.ndarray]:
    """Projections diagonal in a common random unitary basis, with random 0/1 diagonals."""
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    u, _ = np.linalg.qr(z)
    out = []
    for _ in range(count):
        d = rng.integers(0, 2, dim).astype(float)
        out.append((u * d) @ u.conj().T)
    return out


def _model_space_suite(cert: VerificationCertificate, rng, config: RunConfig):
    from .commands import model_space_checks

    for k in range(4):
        theta = random_blaschke(rng, int(rng.integers(1, 5)), 0.8)
        model_space_checks(cert, f"selftest model space {k}", theta, guard_truncation(theta), config.tol_rank)


def _projection_sum_suite(cert: VerificationCertificate, rng):
    for k in range(5):
        ps = random_commuting_family(rng, int(rng.integers(2, 17)), int(rng.integers(1, 6)))
        routes = projection_sum_routes(ps)
        agree = max(op_norm(routes[a] - routes[b]) for a in routes for b in routes if a < b)
        cert.add(f"projection_sum_agreement:selftest {k}", agree, AGREEMENT_TOL)
        oracle = orth_projection_onto_columns(np.hstack(ps)).matrix
        cert.add(f"projection_sum_oracle:selftest {k}", op_norm(routes["product"] - oracle), 1e-10)


def _hereditary_suite(cert: VerificationCertificate):
    for n in (2, 3):
        for N in (1, 2):
            total, product = hereditary_defect_routes(PolydiscTruncation(n, N), 1)
            cert.add(f"hereditary_defect:selftest n={n} N={N}", float(np.linalg.norm(total - product)), 1e-12)


def _factorization_suite(cert: VerificationCertificate, rng, config: RunConfig):
    for k in range(3):
        thetas = [random_blaschke(rng, int(rng.integers(1, 4)), 0.1) for _ in range(2)]
        if k == 2:
            thetas[1] = BlaschkeProduct.zero()
        N = max(guard_truncation(t) for t in thetas if not t.is_zero_function)
        q = tensor_module(thetas, N)
        mix = rng.normal(size=(q.dim, q.dim)) + 1j * rng.normal(size=(q.dim, q.dim))
        raw = raw_quotient(q.basis @ mix, q.trunc)
        for label, module in (("tensor", q), ("raw", raw)):
            f = factorize(module, config.tol_dc, config.tol_fact, config.tol_rank)
            cert.add(f"tensor_factorization:selftest {k} {label}", f.residual, config.tol_fact)
            worst = 0.0
            for t, fac in zip(thetas, f.factors):
                if t.is_zero_function != fac.is_full:
                    worst = float("inf")
                elif not t.is_zero_function:
                    worst = max(worst, match_zeros(fac.theta.zeros, t.zeros))
            cert.add(f"factor_roundtrip:selftest {k} {label}", worst, ZERO_MATCH_TOL)
            if label == "tensor":
                first = f
            else:
                dist = max(projection_distance(a.basis, b.basis) for a, b in zip(f.factors, first.factors))
                cert.add(f"factor_uniqueness:selftest {k}", dist, 1e-8)


def _beurling_suite(cert: VerificationCertificate, rng, config: RunConfig):
    for k, idx in enumerate([(1,), (2,), (1, 2)]):
        inners = [(i, random_blaschke(rng, int(rng.integers(1, 4)), 0.1)) for i in idx]
        N = max(guard_truncation(t) for _, t in inners)
        s = build_submodule(inners, PolydiscTruncation(2, N))
        br = beurling_roundtrip(quotient_of(s, config.tol_dc), config.tol_dc, config.tol_fact, tol_rank=config.tol_rank)
        cert.add(f"beurling_roundtrip:selftest {k}", br.residual, config.tol_fact)
        worst = float("inf")
        if br.submodule.indices == s.indices:
            worst = max(match_zeros(a.zeros, b.zeros) for (_, a), (_, b) in zip(br.submodule.inners, s.inners))
        cert.add(f"beurling_roundtrip:selftest {k} inner data", worst, ZERO_MATCH_TOL)


def run_suites(cert: VerificationCertificate, config: RunConfig):
    rng = np.random.default_rng(config.seed)
    _model_space_suite(cert, rng, config)
    _projection_sum_suite(cert, rng)
    _hereditary_suite(cert)
    _factorization_suite(cert, rng, config)
    _beurling_suite(cert, rng, config)
    cert.result = {"suites": ["model_space", "projection_sum", "hereditary_defect", "factorization", "beurling"]}
