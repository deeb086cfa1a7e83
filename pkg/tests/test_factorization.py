import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hardy_modules.blaschke import BlaschkeProduct, match_zeros
from hardy_modules.factorization import (
    ClassificationError,
    NotDoublyCommutingError,
    extract_factor,
    extract_subspace,
    factorize,
    inflate,
)
from hardy_modules.linalg import projection_distance
from hardy_modules.model_space import guard_truncation
from hardy_modules.polydisc import (
    NotQuotientModuleError,
    PolydiscTruncation,
    QuotientModule,
    compressed_shifts,
    polynomials_to_vectors,
    raw_quotient,
    tensor_module,
)

from .conftest import random_blaschke
from .test_polydisc import RAW_POLYS

Z = BlaschkeProduct.monomial(1)
Z2 = BlaschkeProduct.monomial(2)
FULL = BlaschkeProduct.zero()
HALF = BlaschkeProduct((0.5,))


def guard(thetas):
    return max([1] + [guard_truncation(t) + 1 for t in thetas if not t.is_zero_function])


def assert_round_trip(thetas, f):
    for got, want in zip(f.thetas, thetas):
        assert got.is_zero_function == want.is_zero_function
        assert match_zeros(got.zeros, want.zeros) <= 1e-8


def test_inflate_examples():
    q = tensor_module([Z, Z], 1)
    w = inflate(q, 1)
    expected = np.eye(4)[:, [0, 1]]  # 1 and z2
    assert projection_distance(w.basis, expected) <= 1e-14
    again = inflate(tensor_module([FULL, Z], 2), 1)
    assert again.rank == 3 * 3


def test_inflate_full_slot_only_grows_other_slots():
    q = tensor_module([FULL, Z2, Z], 3)
    w = inflate(q, 1)
    assert w.rank == 4 * 4 * 4
    w = inflate(q, 2)
    assert w.rank == 4 * 2 * 4


def test_inflate_is_idempotent():
    q = tensor_module([Z2, HALF], guard([HALF]))
    w = inflate(q, 1)
    again = QuotientModule(q.trunc, w.basis, compressed_shifts(q.trunc, w.basis), q.provenance)
    assert projection_distance(inflate(again, 1).basis, w.basis) <= 1e-12


def test_inflate_order_independent():
    thetas = [BlaschkeProduct((0.01,)), BlaschkeProduct((0.0, 0.005j)), Z]
    q = tensor_module(thetas, guard(thetas))
    spans = [inflate(q, 3, order=o).basis for o in itertools.permutations([1, 2])]
    assert projection_distance(spans[0], spans[1]) <= 1e-10
    with pytest.raises(ValueError):
        inflate(q, 3, order=[1, 3])


def test_extract_factor_examples():
    q = tensor_module([Z2, HALF], guard([HALF]))
    f1, f2 = extract_factor(q, 1), extract_factor(q, 2)
    assert match_zeros(f1.theta.zeros, (0, 0)) <= 1e-8
    assert match_zeros(f2.theta.zeros, (0.5,)) <= 1e-8
    q = tensor_module([FULL, Z], 3)
    assert extract_factor(q, 1).is_full
    assert match_zeros(extract_factor(q, 2).theta.zeros, (0,)) <= 1e-12
    q = tensor_module([BlaschkeProduct((0.2, -0.1j))], guard([BlaschkeProduct((0.2,))]))
    assert projection_distance(extract_subspace(q, 1), q.basis) <= 1e-15
    with pytest.raises(ValueError):
        extract_subspace(tensor_module([Z, Z], 1), 1, "svd")


def test_extraction_routes_agree():
    thetas = [BlaschkeProduct((0.3, -0.2)), BlaschkeProduct((0.1j,))]
    q = tensor_module(thetas, guard(thetas))
    for i in (1, 2):
        assert projection_distance(extract_subspace(q, i), extract_subspace(q, i, "defect")) <= 1e-9


def test_factorize_examples():
    thetas = [Z2, HALF]
    f = factorize(tensor_module(thetas, guard(thetas)))
    assert f.residual <= 1e-10 and f.jordan_block and not f.warnings
    assert_round_trip(thetas, f)
    f = factorize(tensor_module([FULL, FULL], 3))
    assert all(t.is_zero_function for t in f.thetas)
    assert not f.jordan_block
    assert f.to_json()["jordan_block"] is False


def test_factorize_refuses_non_doubly_commuting():
    t = PolydiscTruncation(2, 1)
    q = raw_quotient(polynomials_to_vectors(t, RAW_POLYS), t, check=False)
    with pytest.raises(NotDoublyCommutingError, match="not doubly commuting"):
        factorize(q)


def test_factorize_refuses_non_coinvariant_raw_span():
    # span{z1}: commutators vanish (the compressed shifts are zero) but it is not co-invariant
    t = PolydiscTruncation(2, 2)
    q = raw_quotient(polynomials_to_vectors(t, [[[[1, 0], 1]]]), t, check=False)
    with pytest.raises(NotQuotientModuleError):
        factorize(q)


def test_factorize_one_variable():
    theta = BlaschkeProduct((0.2, 0.3j))
    f = factorize(tensor_module([theta], guard([theta])))
    assert f.residual <= 1e-12
    assert_round_trip([theta], f)


@settings(max_examples=15)
@given(st.integers(0, 10_000))
def test_round_trip_two_variables(seed):
    rng = np.random.default_rng(seed)
    thetas = [random_blaschke(rng, int(rng.integers(1, 4)), 0.3) for _ in range(2)]
    f = factorize(tensor_module(thetas, guard(thetas)))
    assert f.residual <= 1e-9
    assert_round_trip(thetas, f)


def test_round_trip_three_variables(rng):
    thetas = [random_blaschke(rng, d, 0.01) for d in (1, 2, 3)]
    f = factorize(tensor_module(thetas, guard(thetas)))
    assert f.residual <= 1e-9
    assert_round_trip(thetas, f)


def test_uniqueness_under_scrambled_spanning_set(rng):
    thetas = [BlaschkeProduct((0.25, -0.1 + 0.2j)), BlaschkeProduct((0.3j,))]
    q0 = tensor_module(thetas, guard(thetas))
    mix = rng.normal(size=(q0.dim, q0.dim + 2)) + 1j * rng.normal(size=(q0.dim, q0.dim + 2))
    q = raw_quotient(q0.basis @ mix, q0.trunc)
    f0, f = factorize(q0), factorize(q)
    for a, b in zip(f0.factors, f.factors):
        assert projection_distance(a.basis, b.basis) <= 1e-8
    assert_round_trip(thetas, f)


def test_starvation_retry():
    # z^(N+1) at truncation N fills the truncation; the retry at N+4 tells it apart from FULL.
    N = 3
    theta = BlaschkeProduct.monomial(N + 1)
    f = factorize(tensor_module([theta, Z], N))
    assert f.retries and f.retries[0]["reason"] == "starvation"
    assert f.retries[0]["to"] == N + 4
    assert any("starvation" in w for w in f.warnings)
    assert match_zeros(f.thetas[0].zeros, (0,) * (N + 1)) <= 1e-8
    f = factorize(tensor_module([FULL, Z], N))
    assert f.thetas[0].is_zero_function


def test_raw_starved_factor_is_reported():
    q0 = tensor_module([FULL, Z], 2)
    f = factorize(raw_quotient(q0.basis, q0.trunc))
    assert f.thetas[0].is_zero_function
    assert any("cannot be rebuilt" in w for w in f.warnings)


def test_monotone_truncation():
    thetas = [BlaschkeProduct((0.2,)), BlaschkeProduct((0.1, 0.1j))]
    N = guard(thetas)
    r0 = factorize(tensor_module(thetas, N)).residual
    r1 = factorize(tensor_module(thetas, N + 1)).residual
    assert r1 <= r0 + 1e-10


def test_classification_error_carries_diagnostics():
    thetas = [Z2, Z]
    with pytest.raises(ClassificationError) as exc:
        factorize(tensor_module(thetas, 3), tol_fact=-1.0)
    assert "genuine failure" in str(exc.value)
    assert exc.value.diagnostics["retry_truncation"] == 5
