"""Verification certificates: a machine-readable record of every check run."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import jsonschema

from . import __version__
from .inputs import load_schema

BASIS_ORDER = "monomials z^k, 0 <= k_i <= N, lexicographic with variable 1 slowest (numpy.kron order)"

# Each check name maps to the result it instantiates. Certificates must carry
# this anchor so a reader can trace a residual back to the statement behind it.
ANCHORS = {
    "projection_valid": "Section 1, orthogonal projections",
    "co_invariance": "Definition 1.1",
    "compressed_contraction": "Definition 1.1",
    "doubly_commuting": "Definition 1.1",
    "jordan_block": "Definition 1.1",
    "project_one_closed_form": "Lemma 2.1",
    "project_one_in_quotient": "Lemma 2.1",
    "project_one_defect_image": "Lemma 2.1",
    "project_one_collinear": "Corollary 2.2",
    "defect_identity": "Section 2, I - C C* = P_Q P_C P_Q",
    "wandering_regeneration": "Lemma 2.3",
    "hereditary_defect": "Proposition 2.4",
    "reducing_subspace": "Proposition 2.4",
    "projection_sum_agreement": "Lemma 2.6",
    "projection_sum_oracle": "Lemma 2.6",
    "shift_spectrum_zeros": "Section 3, uniqueness of the tensor representation",
    "tensor_factorization": "Theorem 3.2",
    "factor_uniqueness": "Section 3, uniqueness of the tensor representation",
    "factor_roundtrip": "Theorem 3.2",
    "submodule_complementarity": "Corollary 4.2",
    "submodule_product_formula": "Corollary 4.2",
    "quotient_doubly_commuting": "Theorem 4.1",
    "beurling_roundtrip": "Theorem 4.1",
    "dimension_limit": "artifact resource limit",
}


def anchor_for(name: str) -> str:
    base = name.split(":", 1)[0]
    if base not in ANCHORS:
        raise KeyError(f"check {name!r} has no anchor")
    return ANCHORS[base]


def _finite(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


@dataclass
class VerificationCertificate:
    command: str
    input_digest: str | None
    tolerances: dict
    config: dict
    checks: list = field(default_factory=list)
    result: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    error: str | None = None
    wall_time: float = 0.0
    limit_exceeded: bool = False

    def add(self, name: str, residual, tol, detail: str = "", passed: bool | None = None) -> bool:
        """Record a check. ``passed`` defaults to ``residual <= tol`` (a non-finite residual fails)."""
        res = _finite(residual)
        if passed is None:
            passed = res is not None and res <= tol
        entry = {
            "name": name,
            "paper_anchor": anchor_for(name),
            "residual": res,
            "tolerance": _finite(tol),
            "pass": bool(passed),
        }
        if detail:
            entry["detail"] = detail
        self.checks.append(entry)
        return bool(passed)

    @property
    def passed(self) -> bool:
        return self.error is None and all(c["pass"] for c in self.checks)

    def failing(self) -> list[str]:
        return [c["name"] for c in self.checks if not c["pass"]]

    def to_json(self) -> dict:
        return {
            "schema_version": "1",
            "tool_version": __version__,
            "input_digest": self.input_digest,
            "command": self.command,
            "basis_order": BASIS_ORDER,
            "config": self.config,
            "tolerances": self.tolerances,
            "checks": self.checks,
            "result": self.result,
            "warnings": self.warnings,
            "error": self.error,
            "pass": self.passed,
            "wall_time": round(self.wall_time, 6),
        }

    def dumps(self) -> str:
        obj = self.to_json()
        validate_certificate(obj)
        return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"

    def summary(self) -> str:
        lines = [f"{self.command}: {'PASS' if self.passed else 'FAIL'}"]
        for c in self.checks:
            res = "n/a" if c["residual"] is None else f"{c['residual']:.3e}"
            lines.append(f"  [{'ok' if c['pass'] else 'FAIL'}] {c['name']} ({c['paper_anchor']}): {res}")
        lines.extend(f"  warning: {w}" for w in self.warnings)
        if self.error:
            lines.append(f"  error: {self.error}")
        return "\n".join(lines)


def validate_certificate(obj: dict) -> None:
    jsonschema.validate(obj, load_schema("certificate"))
