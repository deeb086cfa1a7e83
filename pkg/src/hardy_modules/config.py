"""Tolerances, run configuration and the global dimension limit."""

from __future__ import annotations

import contextlib
import contextvars
import os
from dataclasses import asdict, dataclass

TOL_RANK = 1e-10
TOL_DC = 1e-9
TOL_FACT = 1e-8
TOL_COMM = 1e-10
DEFAULT_MAX_DIM = 20_000
MAX_DIM_ENV = "HARDY_MODULES_MAX_DIM"


class HardyError(Exception):
    """Base class for errors raised by this package."""


class InputError(HardyError):
    """Malformed or out-of-contract input data."""


class DimensionLimitError(HardyError):
    """A dense object would exceed the configured maximum dimension."""


class CheckFailure(HardyError):
    """An internal identity that must hold failed its tolerance."""

    def __init__(self, name: str, residual: float, tol: float):
        super().__init__(f"{name}: residual {residual:.3e} exceeds {tol:.1e}")
        self.name = name
        self.residual = residual
        self.tol = tol


def _env_max_dim() -> int:
    raw = os.environ.get(MAX_DIM_ENV)
    if raw is None:
        return DEFAULT_MAX_DIM
    try:
        value = int(raw)
    except ValueError:
        raise InputError(f"{MAX_DIM_ENV} must be an integer, got {raw!r}") from None
    if value < 1:
        raise InputError(f"{MAX_DIM_ENV} must be positive")
    return value


_max_dim: contextvars.ContextVar[int | None] = contextvars.ContextVar("max_dim", default=None)


def max_dimension() -> int:
    value = _max_dim.get()
    return _env_max_dim() if value is None else value


@contextlib.contextmanager
def dimension_limit(limit: int):
    """Temporarily override the maximum dense dimension."""
    token = _max_dim.set(int(limit))
    try:
        yield
    finally:
        _max_dim.reset(token)


def check_dimension(dim: int, what: str = "object") -> None:
    limit = max_dimension()
    if dim > limit:
        raise DimensionLimitError(f"{what} has dimension {dim} > max dimension {limit}")


@dataclass(frozen=True)
class RunConfig:
    truncation: int | None = None
    tol_rank: float = TOL_RANK
    tol_dc: float = TOL_DC
    tol_fact: float = TOL_FACT
    tol_comm: float = TOL_COMM
    max_dimension: int = DEFAULT_MAX_DIM
    seed: int = 0

    def __post_init__(self):
        if self.truncation is not None and self.truncation < 1:
            raise InputError("truncation must be >= 1")
        for name in ("tol_rank", "tol_dc", "tol_fact", "tol_comm"):
            tol = getattr(self, name)
            if not 0.0 < tol < 1e-2:
                raise InputError(f"{name} must lie in (0, 1e-2), got {tol}")
        if self.max_dimension < 1:
            raise InputError("max_dimension must be >= 1")

    def tolerances(self) -> dict[str, float]:
        return {k: v for k, v in asdict(self).items() if k.startswith("tol_")}
