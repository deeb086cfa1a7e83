import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hardy_modules.blaschke import BlaschkeProduct, match_zeros
from hardy_modules.config import InputError, dimension_limit
from hardy_modules.factorization import factorize
from hardy_modules.linalg import orth_projection_onto_columns, projection_distance
from hardy_modules.model_space import guard_truncation
from hardy_modules.polydisc import (
    PolydiscTruncation,
    doubly_commuting_residual,
    tensor_module,
)
from hardy_modules.submodule import (
    NonCommutingProjectionsError,
    NotJordanBlockError,
    beurling_roundtrip,
    build_submodule,
    commuting_projection_sum,
    projection_sum_routes,
    quotient_of,
    truncation_deviation,
)

from .conftest import random_blaschke, random_commuting_family

Z = BlaschkeProduct.monomial(1)
Z2 = BlaschkeProduct.monomial(2)
HALF = BlaschkeProduct((0.5,))
FULL = BlaschkeProduct.zero()


def range_oracle(ps):
    """Projection onto the concatenated ranges, computed without the product formula."""
    cols = np.hstack([p @ np.eye(p.shape[0]) for p in ps])
    return orth_projection_onto_columns(cols).matrix


def test_projection_sum_examples():
    e1, e2 = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
    np.testing.assert_allclose(commuting_projection_sum([e1, e2]).matrix, np.eye(2))
    p = np.full((2, 2), 0.5)
    np.testing.assert_allclose(commuting_projection_sum([p, p]).matrix, p, atol=1e-15)
    ps = random_commuting_family(np.random.default_rng(4), 8, 4)
    np.testing.assert_allclose(commuting_projection_sum(ps).matrix, range_oracle(ps), atol=1e-10)


@given(st.integers(0, 10_000), st.integers(1, 64), st.integers(1, 5))
def test_projection_sum_routes_agree(seed, dim, count):
    rng = np.random.default_rng(seed)
    ps = random_commuting_family(rng, dim, count)
    routes = projection_sum_routes(ps)
    for a in routes.values():
        for b in routes.values():
            assert np.linalg.norm(a - b, 2) <= 1e-11
    np.testing.assert_allclose(routes["product"], range_oracle(ps), atol=1e-10)


def test_projection_sum_rejects_non_commuting():
    p = np.diag([1.0, 0.0])
    q = np.full((2, 2), 0.5)
    with pytest.raises(NonCommutingProjectionsError):
        commuting_projection_sum([p, q])
    with pytest.raises(InputError):
        projection_sum_routes([])


def test_build_submodule_examples():
    N = 3
    s = build_submodule([(1, Z)], PolydiscTruncation(2, N))
    assert s.quotient_dim == N + 1
    assert s.projection.rank == (N + 1) ** 2 - (N + 1)
    s = build_submodule([(2, Z), (1, Z)], PolydiscTruncation(2, 2))
    assert s.indices == (1, 2)
    assert s.quotient_dim == 1
    np.testing.assert_allclose(s.complement_projection.matrix, np.diag(np.eye(9)[0]), atol=1e-15)
    assert max(s.residuals().values()) <= 1e-11


def test_three_variable_submodule_dimension():
    # a = 1/2 needs the guard truncation 46, far above the default dense limit; only traces are used
    N = max(guard_truncation(HALF), guard_truncation(Z2))
    with dimension_limit(200_000):
        s = build_submodule([(1, HALF), (2, Z2)], PolydiscTruncation(3, N))
        assert s.quotient_dim == 1 * 2 * (N + 1)
        assert s.complement_projection.rank == s.quotient_dim


def test_build_submodule_rank_matches_dense_projection():
    # zeros at the origin keep the truncation small enough for dense matrices
    thetas = [(1, Z), (3, Z2)]
    s = build_submodule(thetas, PolydiscTruncation(3, 3))
    assert s.projection.rank == s.dim
    res = s.residuals()
    assert res["complementarity"] <= 1e-12
    assert res["product_formula"] <= 1e-12


def test_build_submodule_rejections():
    t = PolydiscTruncation(2, 2)
    with pytest.raises(InputError, match="duplicate"):
        build_submodule([(1, Z), (1, Z2)], t)
    with pytest.raises(InputError):
        build_submodule([(1, FULL)], t)
    with pytest.raises(InputError):
        build_submodule([(1, BlaschkeProduct((), constant=-1))], t)
    with pytest.raises(InputError):
        build_submodule([], t)
    with pytest.raises(InputError):
        build_submodule([(3, Z)], t)


def test_quotient_of_examples():
    q = quotient_of(build_submodule([(1, Z), (2, Z)], PolydiscTruncation(2, 2)))
    assert q.dim == 1
    assert all(not np.any(c) for c in q.compressed_ops)
    s = build_submodule([(1, Z2)], PolydiscTruncation(2, 4))
    q = quotient_of(s)
    assert doubly_commuting_residual(q).max() <= 1e-12
    f = factorize(q)
    assert match_zeros(f.thetas[0].zeros, (0, 0)) <= 1e-8
    assert f.thetas[1].is_zero_function
    pq = q.projection.matrix
    np.testing.assert_allclose(s.projection.matrix + pq, np.eye(25), atol=1e-12)


def test_beurling_examples():
    res = beurling_roundtrip(tensor_module([Z, FULL], 3))
    assert res.submodule.indices == (1,)
    assert match_zeros(res.submodule.inners[0][1].zeros, (0,)) <= 1e-12
    N = guard_truncation(HALF) + 1
    res = beurling_roundtrip(tensor_module([HALF, Z2], N))
    assert res.submodule.indices == (1, 2)
    assert match_zeros(res.submodule.inners[0][1].zeros, (0.5,)) <= 1e-8
    assert match_zeros(res.submodule.inners[1][1].zeros, (0, 0)) <= 1e-8
    assert res.residual <= 1e-8
    with pytest.raises(NotJordanBlockError):
        beurling_roundtrip(tensor_module([FULL, FULL], 2))


def test_beurling_round_trip_from_submodule(rng):
    cases = [
        (2, [(2, random_blaschke(rng, 3, 0.3))]),
        (2, [(1, random_blaschke(rng, 2, 0.3)), (2, random_blaschke(rng, 1, 0.3))]),
        # a whole-space slot in three variables is kept cheap with monomial inners at small N
        (3, [(1, Z2), (3, BlaschkeProduct.monomial(3))]),
        (3, [(i, random_blaschke(rng, i, 0.01)) for i in (1, 2, 3)]),
    ]
    for n, inners in cases:
        N = max(guard_truncation(t) + 1 for _, t in inners)
        s = build_submodule(inners, PolydiscTruncation(n, N))
        res = beurling_roundtrip(quotient_of(s))
        assert res.submodule.indices == s.indices
        for (_, got), (_, want) in zip(res.submodule.inners, s.inners):
            assert match_zeros(got.zeros, want.zeros) <= 1e-8
        assert projection_distance(res.submodule.quotient_basis(), s.quotient_basis()) <= 1e-8


@pytest.mark.parametrize("r", [0.3, 0.6])
def test_truncation_deviation_decays(r):
    theta = BlaschkeProduct((r,))
    devs = [truncation_deviation(theta, N) for N in (10, 20)]
    assert all(d["top"] <= 1e-14 for d in devs)
    assert devs[1]["leakage"] / devs[0]["leakage"] == pytest.approx(r**10, rel=1e-3)
    with pytest.raises(InputError):
        truncation_deviation(FULL, 4)
