"""Problem descriptions: JSON loading, schema validation and parsing."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from functools import cache
from importlib import resources

import jsonschema
import numpy as np

from .blaschke import BlaschkeProduct
from .config import InputError
from .model_space import guard_truncation
from .polydisc import (
    PolydiscTruncation,
    QuotientModule,
    polynomials_to_vectors,
    raw_quotient,
    tensor_module,
)
from .submodule import CoDoublyCommutingSubmodule, build_submodule


@cache
def load_schema(name: str) -> dict:
    """One of the schema files shipped with the package (``input`` or ``certificate``)."""
    text = resources.files("hardy_modules").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)


def digest(data: bytes) -> str:
    return "sha256:" + hashlib.sha256(data).hexdigest()


def read_input(path) -> tuple[dict, str]:
    """Parse and validate an input file; returns the object and the digest of its bytes."""
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read input: {exc}") from None
    try:
        obj = json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise InputError(f"malformed JSON: {exc}") from None
    validate_input(obj)
    return obj, digest(data)


def validate_input(obj) -> None:
    try:
        jsonschema.validate(obj, load_schema("input"))
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise InputError(f"schema violation at {where}: {exc.message}") from None


@dataclass
class Problem:
    """A parsed input, at the truncation it will be computed on."""

    kind: str  # "tensor", "raw" or "submodule"
    n: int
    N: int
    thetas: tuple[BlaschkeProduct, ...] = ()
    inners: tuple[tuple[int, BlaschkeProduct], ...] = ()
    vectors: np.ndarray | None = None
    warnings: list[str] = field(default_factory=list)

    def quotient(self, check: bool = True) -> QuotientModule:
        if self.kind == "tensor":
            return tensor_module(self.thetas, self.N)
        if self.kind == "raw":
            return raw_quotient(self.vectors, PolydiscTruncation(self.n, self.N), check=check)
        raise InputError("input describes a submodule, not a quotient module")

    def submodule(self) -> CoDoublyCommutingSubmodule:
        if self.kind != "submodule":
            raise InputError("input describes a quotient module, not a submodule")
        return build_submodule(self.inners, PolydiscTruncation(self.n, self.N))


def _truncation(requested: int | None, thetas, warnings: list[str]) -> int:
    finite = [t for t in thetas if not t.is_zero_function]
    guard = max([1] + [guard_truncation(t) for t in finite])
    if requested is None:
        # One degree of headroom keeps every finite factor out of the starvation band.
        return max([guard] + [t.degree + 1 for t in finite])
    if requested < guard:
        warnings.append(f"truncation raised from {requested} to {guard} so every model-space basis embeds accurately")
        return guard
    return requested


def parse_problem(obj: dict, truncation: int | None = None) -> Problem:
    """Turn a validated input object into a Problem.

    ``truncation`` (from the command line) overrides the value in the input.
    Inputs built from inner functions are raised to the guard truncation.
    """
    n = obj["variables"]
    requested = truncation if truncation is not None else obj.get("truncation")
    warnings: list[str] = []
    if "submodule" in obj:
        inners = tuple((item["var"], BlaschkeProduct.from_json(item["theta"])) for item in obj["submodule"]["inners"])
        N = _truncation(requested, [t for _, t in inners], warnings)
        return Problem("submodule", n, N, inners=inners, warnings=warnings)
    module = obj["module"]
    if module["type"] == "tensor":
        thetas = tuple(BlaschkeProduct.from_json(f) for f in module["factors"])
        if len(thetas) != n:
            raise InputError(f"{len(thetas)} factors given for {n} variables")
        for i, t in enumerate(thetas, 1):
            if not t.is_zero_function and t.degree == 0:
                raise InputError(f"factor {i} is a unimodular constant, so the module would be {{0}}")
        N = _truncation(requested, thetas, warnings)
        return Problem("tensor", n, N, thetas=thetas, warnings=warnings)
    if requested is None:
        raise InputError("a raw spanning set needs a truncation (in the input or via --truncation)")
    vectors = polynomials_to_vectors(PolydiscTruncation(n, requested), module["spanning_set"])
    return Problem("raw", n, requested, vectors=vectors, warnings=warnings)
