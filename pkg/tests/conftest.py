import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from hardy_modules.blaschke import BlaschkeProduct
from hardy_modules.selftest import random_blaschke, random_commuting_family  # noqa: F401

settings.register_profile(
    "default", max_examples=30, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

# Filled by tests/test_acceptance.py: criterion number -> (passed, detail).
ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


def taylor_of_polynomial(coeffs, trunc):
    out = np.zeros(trunc + 1, dtype=complex)
    out[: len(coeffs)] = coeffs
    return out


def szego_kernel(a: complex, trunc: int) -> np.ndarray:
    """Taylor coefficients of ``1 / (1 - conj(a) z)``; spans Q_Theta together with its siblings."""
    return np.conj(a) ** np.arange(trunc + 1)


def theta_from_zeros(*zeros) -> BlaschkeProduct:
    return BlaschkeProduct(tuple(zeros))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_RESULTS):
        passed, detail = ACCEPTANCE_RESULTS[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if passed else 'FAIL'}  {detail}")
