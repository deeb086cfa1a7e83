"""Finite Blaschke products and the zero function.

These are the only inner-function data the package represents exactly. A
singular inner factor has no finite description here and is refused when
parsing input.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.optimize import linear_sum_assignment

from .config import InputError
from .linalg import kron_all

BOUNDARY_MARGIN = 1e-8
CONSTANT_TOL = 1e-12


class UnsupportedInnerError(InputError):
    """Inner-function data that is not a finite Blaschke product or zero."""


def complex_to_json(z: complex) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def complex_from_json(obj) -> complex:
    if isinstance(obj, (int, float)) and not isinstance(obj, bool):
        return complex(obj)
    if isinstance(obj, dict) and set(obj) <= {"re", "im"} and "re" in obj:
        return complex(float(obj["re"]), float(obj.get("im", 0.0)))
    raise InputError(f"expected a complex number as {{'re':..,'im':..}}, got {obj!r}")


@dataclass(frozen=True)
class BlaschkeProduct:
    """``c * prod_k (z - a_k) / (1 - conj(a_k) z)``, or the zero function.

    A zero list of length 0 is the unimodular constant ``c``, whose model space
    is ``{0}``.
    """

    zeros: tuple[complex, ...] = ()
    constant: complex = 1.0
    is_zero_function: bool = False
    _arr: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        zs = tuple(complex(a) for a in self.zeros)
        object.__setattr__(self, "zeros", zs)
        object.__setattr__(self, "constant", complex(self.constant))
        if self.is_zero_function:
            if zs:
                raise InputError("the zero function carries no zeros")
            object.__setattr__(self, "constant", 0j)
        else:
            for a in zs:
                if not np.isfinite(a) or abs(a) > 1 - BOUNDARY_MARGIN:
                    raise InputError(f"zero {a} is not inside |z| <= 1 - {BOUNDARY_MARGIN}")
            if abs(abs(self.constant) - 1) > CONSTANT_TOL:
                raise InputError(f"constant {self.constant} is not unimodular")
        object.__setattr__(self, "_arr", np.array(zs, dtype=complex))

    @classmethod
    def zero(cls) -> BlaschkeProduct:
        return cls(is_zero_function=True)

    @classmethod
    def monomial(cls, k: int) -> BlaschkeProduct:
        """``z**k``."""
        return cls((0j,) * k)

    @property
    def degree(self) -> int:
        return len(self.zeros)

    @property
    def max_modulus(self) -> float:
        return float(np.max(np.abs(self._arr))) if self.zeros else 0.0

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        if self.is_zero_function:
            return np.zeros_like(z)[()]
        out = np.full(z.shape, self.constant, dtype=complex)
        for a in self._arr:
            out = out * (z - a) / (1 - np.conj(a) * z)
        return out[()]

    def value_at_origin(self) -> complex:
        if self.is_zero_function:
            return 0j
        return complex(self.constant * np.prod(-self._arr))

    def taylor(self, degree: int) -> np.ndarray:
        """Maclaurin coefficients through ``z**degree``.

        Multiplying ``h`` by one factor ``(z - a)/(1 - conj(a) z)`` gives
        ``g_m = conj(a) g_{m-1} + h_{m-1} - a h_m``.
        """
        if degree < 0:
            raise ValueError("degree must be >= 0")
        h = np.zeros(degree + 1, dtype=complex)
        if self.is_zero_function:
            return h
        h[0] = self.constant
        for a in self._arr:
            ab = np.conj(a)
            g = np.empty_like(h)
            g[0] = -a * h[0]
            for m in range(1, degree + 1):
                g[m] = ab * g[m - 1] + h[m - 1] - a * h[m]
            h = g
        return h

    def multiplier(self, trunc: int) -> np.ndarray:
        """Lower-triangular Toeplitz matrix of multiplication by the product on degrees <= trunc."""
        c = self.taylor(trunc)
        return scipy.linalg.toeplitz(c, np.zeros(trunc + 1, dtype=complex))

    def __mul__(self, other: BlaschkeProduct) -> BlaschkeProduct:
        if self.is_zero_function or other.is_zero_function:
            return BlaschkeProduct.zero()
        return BlaschkeProduct(self.zeros + other.zeros, self.constant * other.constant)

    def to_json(self) -> dict:
        if self.is_zero_function:
            return {"type": "zero"}
        return {
            "type": "blaschke",
            "zeros": [complex_to_json(a) for a in self.zeros],
            "constant": complex_to_json(self.constant),
        }

    @classmethod
    def from_json(cls, obj) -> BlaschkeProduct:
        if not isinstance(obj, dict) or "type" not in obj:
            raise InputError(f"inner function must be an object with a 'type', got {obj!r}")
        kind = obj["type"]
        if kind == "zero":
            return cls.zero()
        if kind != "blaschke":
            raise UnsupportedInnerError(
                f"inner function type {kind!r} is not supported; only finite "
                "Blaschke products and the zero function are representable"
            )
        zeros = [complex_from_json(a) for a in obj.get("zeros", [])]
        constant = complex_from_json(obj["constant"]) if "constant" in obj else 1.0
        return cls(tuple(zeros), constant)


@dataclass(frozen=True)
class ExtendedInner:
    """``z -> base(z_i)`` on the n-variable polydisc (variables numbered from 1)."""

    base: BlaschkeProduct
    variable: int
    n: int

    def __post_init__(self):
        if not 1 <= self.variable <= self.n:
            raise InputError(f"variable index {self.variable} outside 1..{self.n}")

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return self.base(z[..., self.variable - 1])

    def multiplier(self, trunc: int) -> np.ndarray:
        eye = np.eye(trunc + 1, dtype=complex)
        mats = [eye] * self.n
        mats[self.variable - 1] = self.base.multiplier(trunc)
        return kron_all(mats)


def match_zeros(found, expected) -> float:
    """Largest distance under the optimal one-to-one matching of two zero multisets.

    Returns inf when the multisets differ in size.
    """
    found = np.asarray(list(found), dtype=complex)
    expected = np.asarray(list(expected), dtype=complex)
    if found.size != expected.size:
        return float("inf")
    if found.size == 0:
        return 0.0
    cost = np.abs(found[:, None] - expected[None, :])
    r, c = linear_sum_assignment(cost)
    return float(cost[r, c].max())
