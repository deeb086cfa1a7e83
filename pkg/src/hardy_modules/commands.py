"""The work behind each CLI command; every command returns a certificate."""

from __future__ import annotations

import time
from contextlib import contextmanager

import numpy as np

from .blaschke import BlaschkeProduct, match_zeros
from .certificate import VerificationCertificate
from .config import CheckFailure, DimensionLimitError, RunConfig, dimension_limit
from .factorization import ClassificationError, extract_subspace, factorize
from .inputs import Problem, parse_problem, read_input
from .linalg import kron_all, op_norm, projection_distance
from .model_space import (
    IDENTITY_TOL,
    build_model_space,
    project_one,
    recover_inner_from_shift,
    wandering_regeneration,
)
from .polydisc import (
    PolydiscTruncation,
    QuotientModule,
    TensorBuilt,
    coinvariance_residual,
    doubly_commuting_residual,
    hereditary_defect_routes,
)
from .submodule import (
    AGREEMENT_TOL,
    NotJordanBlockError,
    beurling_roundtrip,
    projection_sum_routes,
    quotient_of,
)

ZERO_MATCH_TOL = 1e-8
EXACT_TOL = 1e-12
HEREDITARY_N = 3
UNIQUENESS_TOL = 1e-9
# Dense D x D checks (projection sums) are only run up to this ambient dimension.
DENSE_CHECK_DIM = 1500


def _new_certificate(
    command: str, digest: str | None, config: RunConfig, truncation: int | None
) -> VerificationCertificate:
    tolerances = dict(config.tolerances())
    tolerances.update(identity=IDENTITY_TOL, agreement=AGREEMENT_TOL, zero_match=ZERO_MATCH_TOL, exact=EXACT_TOL)
    cfg = {"truncation": truncation, "seed": config.seed, "max_dimension": config.max_dimension}
    return VerificationCertificate(command, digest, tolerances, cfg)


@contextmanager
def _timed(cert: VerificationCertificate):
    """Time the body; internal assertion failures and resource limits end up on the certificate."""
    start = time.perf_counter()
    try:
        yield cert
    except CheckFailure as exc:
        record_check_failure(cert, exc)
    except DimensionLimitError as exc:
        cert.error = f"dimension limit: {exc}"
        cert.limit_exceeded = True
    finally:
        cert.wall_time = time.perf_counter() - start


def _load(path, config: RunConfig) -> tuple[Problem, str]:
    obj, digest = read_input(path)
    return parse_problem(obj, config.truncation), digest


def _zeros_json(theta: BlaschkeProduct) -> dict:
    return theta.to_json() if not theta.is_zero_function else {"type": "full"}


def model_space_checks(cert: VerificationCertificate, label: str, theta: BlaschkeProduct, N: int, tol_rank: float):
    """Projection of 1, collinearity, Krylov regeneration and the defect identity for one model space."""
    po = project_one(theta, N, tol=float("inf"))
    cert.add(f"project_one_closed_form:{label}", po.residuals["p_one"], IDENTITY_TOL)
    cert.add(f"project_one_in_quotient:{label}", po.residuals["p_one_in_q"], IDENTITY_TOL)
    cert.add(f"project_one_defect_image:{label}", po.residuals["ppp_one"], IDENTITY_TOL)
    cert.add(f"project_one_collinear:{label}", po.collinearity_angle, ZERO_MATCH_TOL, "angle in radians")
    ms = build_model_space(theta, N)
    cert.add(f"defect_identity:{label}", float(np.linalg.norm(ms.defect() - ms.gram_defect())), IDENTITY_TOL)
    reg = wandering_regeneration(ms, tol_rank)
    cert.add(
        f"wandering_regeneration:{label}",
        reg.residual,
        IDENTITY_TOL,
        f"Krylov span dimension {reg.span_dim} of {reg.dim}",
        passed=reg.passed and reg.residual <= IDENTITY_TOL,
    )
    recovered = recover_inner_from_shift(ms.shift)
    cert.add(f"shift_spectrum_zeros:{label}", match_zeros(recovered.zeros, theta.zeros), ZERO_MATCH_TOL)


def module_checks(cert: VerificationCertificate, q: QuotientModule, config: RunConfig) -> float:
    """Structural checks on a quotient module; returns the doubly commuting residual."""
    gram = q.basis.conj().T @ q.basis
    cert.add("projection_valid", op_norm(gram - np.eye(q.dim)), EXACT_TOL, "orthonormality of the basis of Q")
    cert.add("co_invariance", coinvariance_residual(q.trunc, q.basis), config.tol_fact, "max_i ||(I - P) M_{z_i}^* P||")
    excess = max([0.0] + [op_norm(c) - 1.0 for c in q.compressed_ops])
    cert.add("compressed_contraction", max(excess, 0.0), EXACT_TOL, "max_i ||C_{z_i}|| - 1")
    dc = doubly_commuting_residual(q)
    worst = float(dc.max(initial=0.0))
    cert.add("doubly_commuting", worst, config.tol_dc, "max_{i != j} ||C_i C_j^* - C_j^* C_i||")
    if q.n >= 2:
        small = PolydiscTruncation(q.n, min(q.trunc.N, HEREDITARY_N))
        total, product = hereditary_defect_routes(small, 1)
        cert.add(
            "hereditary_defect",
            float(np.linalg.norm(total - product)),
            EXACT_TOL,
            f"inclusion-exclusion vs Kronecker form at N={small.N}",
        )
    return worst


def _projection_sum_check(cert: VerificationCertificate, factor_projections: list[np.ndarray]):
    routes = projection_sum_routes(factor_projections)
    names = list(routes)
    worst = max(op_norm(routes[a] - routes[b]) for a in names for b in names if a < b) if len(names) > 1 else 0.0
    cert.add("projection_sum_agreement", worst, AGREEMENT_TOL, "forward vs reverse vs product formula")


def _tensor_factor_projections(problem: Problem, q: QuotientModule) -> list[np.ndarray]:
    eye = np.eye(q.trunc.N + 1, dtype=complex)
    out = []
    for i, t in enumerate(problem.thetas):
        if t.is_zero_function:
            continue
        mats = [eye] * q.n
        mats[i] = build_model_space(t, q.trunc.N).projection()
        out.append(np.eye(q.trunc.dim) - kron_all(mats))
    return out


def cmd_verify(path, config: RunConfig) -> VerificationCertificate:
    problem, digest = _load(path, config)
    cert = _new_certificate("verify", digest, config, problem.N)
    cert.warnings.extend(problem.warnings)
    with _timed(cert), dimension_limit(config.max_dimension):
        if problem.kind == "submodule":
            _verify_submodule(cert, problem, config)
        else:
            q = problem.quotient(check=False)
            for i, t in enumerate(problem.thetas, 1):
                if not t.is_zero_function:
                    model_space_checks(cert, f"factor {i}", t, problem.N, config.tol_rank)
            worst = module_checks(cert, q, config)
            if problem.kind == "tensor" and q.trunc.dim <= DENSE_CHECK_DIM:
                ps = _tensor_factor_projections(problem, q)
                if ps:
                    _projection_sum_check(cert, ps)
            cert.result = {
                "kind": problem.kind,
                "variables": q.n,
                "truncation": q.trunc.N,
                "dimension": q.dim,
                "ambient_dimension": q.trunc.dim,
                "doubly_commuting_residuals": doubly_commuting_residual(q).tolist(),
                "doubly_commuting": worst <= config.tol_dc,
                "jordan_block": worst <= config.tol_dc and not q.is_full,
            }
    return cert


def _verify_submodule(cert: VerificationCertificate, problem: Problem, config: RunConfig):
    s = problem.submodule()
    for i, t in s.inners:
        model_space_checks(cert, f"var {i}", t, problem.N, config.tol_rank)
    res = s.residuals()
    cert.add("submodule_complementarity", res["complementarity"], EXACT_TOL, "||P_S + P_{S^perp} - I||")
    cert.add("submodule_product_formula", res["product_formula"], IDENTITY_TOL, "prod (I - P_j) vs Kronecker form")
    _projection_sum_check(cert, s.factor_projections())
    q = quotient_of(s, tol_dc=float("inf"))
    worst = module_checks(cert, q, config)
    cert.add("quotient_doubly_commuting", worst, config.tol_dc)
    cert.result = {
        "kind": "submodule",
        "submodule": s.to_json(),
        "projection_rank": s.projection.rank,
        "truncation_diagnostics": s.truncation_diagnostics(),
    }


def cmd_factor(path, config: RunConfig) -> VerificationCertificate:
    problem, digest = _load(path, config)
    cert = _new_certificate("factor", digest, config, problem.N)
    cert.warnings.extend(problem.warnings)
    with _timed(cert), dimension_limit(config.max_dimension):
        q = problem.quotient(check=False)
        _factor_into(cert, q, config, problem)
    return cert


def _factor_into(cert: VerificationCertificate, q: QuotientModule, config: RunConfig, problem: Problem | None = None):
    coinv = q.coinvariance if not isinstance(q.provenance, TensorBuilt) else coinvariance_residual(q.trunc, q.basis)
    is_quotient = cert.add("co_invariance", coinv, config.tol_fact)
    dc = float(doubly_commuting_residual(q).max(initial=0.0))
    is_dc = cert.add("doubly_commuting", dc, config.tol_dc)
    if not (is_quotient and is_dc):
        reason = "not doubly commuting" if not is_dc else "not a quotient module"
        cert.result = {"refused": reason, "doubly_commuting_residual": dc, "co_invariance_residual": coinv}
        return None
    try:
        f = factorize(q, tol_dc=config.tol_dc, tol_fact=config.tol_fact, tol_rank=config.tol_rank)
    except ClassificationError as exc:
        cert.add("tensor_factorization", exc.diagnostics.get("residual"), config.tol_fact, str(exc))
        cert.result = {"refused": "classification failed", "diagnostics": exc.diagnostics}
        return None
    cert.warnings.extend(f.warnings)
    if not f.jordan_block:
        cert.warnings.append("not a Jordan block: every factor is the whole space, so Q is the full truncated space")
    cert.add("tensor_factorization", f.residual, config.tol_fact, "||P_Q - P_{Q_1} (x) ... (x) P_{Q_n}||")
    fq = q if f.truncation == q.trunc.N else q.rebuild(f.truncation)
    if q.n >= 2:
        dist = max(
            projection_distance(extract_subspace(fq, i, "defect", config.tol_rank), fac.basis)
            for i, fac in enumerate(f.factors, 1)
        )
        cert.add("factor_uniqueness", dist, UNIQUENESS_TOL, "kernel-intersection route vs fiber route")
    if problem is not None and problem.kind == "tensor":
        worst = 0.0
        for t, fac in zip(problem.thetas, f.factors):
            if t.is_zero_function != fac.is_full:
                worst = float("inf")
            elif not t.is_zero_function:
                worst = max(worst, match_zeros(fac.theta.zeros, t.zeros))
        cert.add("factor_roundtrip", worst, ZERO_MATCH_TOL, "recovered inner functions vs input")
    cert.result = {**f.to_json(), "factors": [_zeros_json(t) for t in f.thetas], "tolerances": dict(cert.tolerances)}
    return f


def cmd_beurling(path, config: RunConfig) -> VerificationCertificate:
    problem, digest = _load(path, config)
    cert = _new_certificate("beurling", digest, config, problem.N)
    cert.warnings.extend(problem.warnings)
    with _timed(cert), dimension_limit(config.max_dimension):
        if problem.kind == "submodule":
            s = problem.submodule()
            res = s.residuals()
            cert.add("submodule_complementarity", res["complementarity"], EXACT_TOL)
            cert.add("submodule_product_formula", res["product_formula"], IDENTITY_TOL)
            _projection_sum_check(cert, s.factor_projections())
            q = quotient_of(s, tol_dc=float("inf"))
            dc = float(doubly_commuting_residual(q).max(initial=0.0))
            cert.add("quotient_doubly_commuting", dc, config.tol_dc)
            expected = s.inners
            cert.result = {"submodule": s.to_json(), "truncation_diagnostics": s.truncation_diagnostics()}
        else:
            q = problem.quotient(check=False)
            expected = None
            cert.result = {}
        _beurling_into(cert, q, config, expected)
    return cert


def _beurling_into(cert, q: QuotientModule, config: RunConfig, expected=None):
    dc = float(doubly_commuting_residual(q).max(initial=0.0))
    if not cert.add("doubly_commuting", dc, config.tol_dc):
        cert.result["refused"] = "not doubly commuting"
        return
    try:
        br = beurling_roundtrip(q, tol_dc=config.tol_dc, tol_fact=float("inf"), tol_rank=config.tol_rank)
    except NotJordanBlockError as exc:
        cert.add("jordan_block", None, None, str(exc), passed=False)
        cert.result["refused"] = "not a Jordan block"
        return
    except ClassificationError as exc:
        cert.add("tensor_factorization", exc.diagnostics.get("residual"), config.tol_fact, str(exc))
        cert.result["refused"] = "classification failed"
        return
    cert.warnings.extend(br.factorization.warnings)
    cert.add("jordan_block", None, None, "Q is a proper quotient", passed=True)
    cert.add("beurling_roundtrip", br.residual, config.tol_fact, "||P_S - (I - P_Q)||")
    if expected is not None:
        same_index = tuple(i for i, _ in expected) == br.submodule.indices
        worst = float("inf")
        if same_index:
            worst = max(match_zeros(a.zeros, b.zeros) for (_, a), (_, b) in zip(br.submodule.inners, expected))
        cert.add("beurling_roundtrip:inner data", worst, ZERO_MATCH_TOL, "index set and zero multisets")
    cert.result["recovered"] = {
        "m": br.submodule.m,
        "inners": [{"var": i, "theta": t.to_json()} for i, t in br.submodule.inners],
        "quotient_dimension": br.submodule.quotient_dim,
        "truncation": br.submodule.trunc.N,
    }


def cmd_selftest(config: RunConfig) -> VerificationCertificate:
    from .selftest import run_suites

    cert = _new_certificate("selftest", None, config, config.truncation)
    with _timed(cert), dimension_limit(config.max_dimension):
        run_suites(cert, config)
    return cert


def record_check_failure(cert: VerificationCertificate, exc: CheckFailure):
    """Turn an internal assertion into a failing check on the certificate."""
    name = "projection_sum_agreement" if exc.name.startswith("projection sum") else "tensor_factorization"
    if exc.name.startswith("hereditary"):
        name = "hereditary_defect"
    elif exc.name.startswith("Beurling"):
        name = "beurling_roundtrip"
    elif exc.name.startswith("quotient doubly"):
        name = "quotient_doubly_commuting"
    cert.add(name, exc.residual, exc.tol, str(exc), passed=False)
