"""Regenerate the CLI test inputs (tests/data) and golden certificates (tests/golden).

Run from the repository root:  python scripts/make_goldens.py

Every golden is produced by the installed command-line entry point with the
default seed. ``wall_time`` is dropped because it is the one field allowed to
vary between runs. The manifest records the command, flags and exit code of
every case so the tests can replay them.
"""

from __future__ import annotations

import contextlib
import io
import json
from pathlib import Path

from hardy_modules.cli import main

ROOT = Path(__file__).resolve().parent.parent
DATA = ROOT / "tests" / "data"
GOLDEN = ROOT / "tests" / "golden"


def blaschke(*zeros):
    return {"type": "blaschke", "zeros": [{"re": complex(z).real, "im": complex(z).imag} for z in zeros]}


def tensor(n, factors, truncation=None):
    obj = {"variables": n, "module": {"type": "tensor", "factors": factors}}
    if truncation is not None:
        obj["truncation"] = truncation
    return obj


def raw(n, truncation, polys):
    return {"variables": n, "truncation": truncation, "module": {"type": "raw", "spanning_set": polys}}


def half_z2_as_raw(N=47, a=0.5):
    """(a) (x) (z^2) given by a scrambled spanning set.

    The model space of a single zero a is spanned by the Szego kernel
    sum_k a^k z^k; that of z^2 by 1 and z. The spanning vectors are the
    kernel times (1 + z2) and times (1 - 2 z2), truncated at degree N.
    """
    kernel = [[[k, 0], a**k] for k in range(N + 1)]
    first = kernel + [[[k, 1], c] for (k, _), c in kernel]
    second = kernel + [[[k, 1], -2 * c] for (k, _), c in kernel]
    return raw(2, N, [first, second])


INPUTS = {
    "tensor_z2_z": tensor(2, [blaschke(0, 0), blaschke(0)]),
    "raw_not_doubly_commuting": raw(
        2, 1, [[[[0, 0], 1]], [[[1, 0], 1], [[0, 1], 1]], [[[1, 1], 1]]]
    ),
    "raw_half_z2": half_z2_as_raw(),
    "full_space": tensor(2, [{"type": "zero"}, {"type": "zero"}], truncation=3),
    "starved_z4_z": tensor(2, [blaschke(0, 0, 0, 0), blaschke(0)], truncation=3),
    "submodule_z1_z2": {
        "variables": 2,
        "truncation": 2,
        "submodule": {"inners": [{"var": 1, "theta": blaschke(0)}, {"var": 2, "theta": blaschke(0)}]},
    },
    "quotient_z_full": tensor(2, [blaschke(0), {"type": "zero"}], truncation=3),
    "duplicate_var": {
        "variables": 2,
        "truncation": 2,
        "submodule": {"inners": [{"var": 1, "theta": blaschke(0)}, {"var": 1, "theta": blaschke(0.5)}]},
    },
    "unsupported_inner": tensor(2, [{"type": "singular", "measure": [1.0]}, blaschke(0)], truncation=2),
}

# name -> (command, input or None, extra flags, expected exit code)
CASES = {
    "verify_tensor_z2_z": ("verify", "tensor_z2_z", [], 0),
    "verify_raw_not_doubly_commuting": ("verify", "raw_not_doubly_commuting", [], 1),
    "factor_raw_half_z2": ("factor", "raw_half_z2", [], 0),
    "factor_raw_not_doubly_commuting": ("factor", "raw_not_doubly_commuting", [], 1),
    "factor_full_space": ("factor", "full_space", [], 0),
    "factor_starved_z4_z": ("factor", "starved_z4_z", [], 0),
    "beurling_submodule_z1_z2": ("beurling", "submodule_z1_z2", [], 0),
    "beurling_quotient_z_full": ("beurling", "quotient_z_full", [], 0),
    "selftest_default": ("selftest", None, [], 0),
}

# Error cases: no certificate, only an exit code.
ERRORS = {
    "malformed_json": ("verify", "malformed.json", [], 2),
    "duplicate_var": ("beurling", "duplicate_var.json", [], 2),
    "unsupported_inner": ("verify", "unsupported_inner.json", [], 2),
    "max_dim_verify": ("verify", "tensor_z2_z.json", ["--max-dim", "1"], 3),
    "max_dim_selftest": ("selftest", None, ["--max-dim", "1"], 3),
}


def argv_for(command, input_name, flags):
    argv = [command]
    if input_name is not None:
        name = input_name if input_name.endswith(".json") else f"{input_name}.json"
        argv += ["--input", str(DATA / name)]
    return argv + list(flags)


def run(argv) -> tuple[int, str]:
    out = io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(io.StringIO()):
        code = main(argv)
    return code, out.getvalue()


def write_inputs():
    DATA.mkdir(parents=True, exist_ok=True)
    for name, obj in INPUTS.items():
        (DATA / f"{name}.json").write_text(json.dumps(obj, indent=2) + "\n")
    (DATA / "malformed.json").write_text('{"variables": 2, "module": {"type": "tensor", \n')


def write_goldens():
    GOLDEN.mkdir(parents=True, exist_ok=True)
    manifest = {"cases": {}, "errors": {}}
    for name, (command, input_name, flags, expected) in CASES.items():
        code, text = run(argv_for(command, input_name, flags))
        if code != expected:
            raise SystemExit(f"{name}: exit {code}, expected {expected}")
        cert = json.loads(text)
        cert.pop("wall_time")
        (GOLDEN / f"{name}.json").write_text(json.dumps(cert, indent=2, sort_keys=True) + "\n")
        manifest["cases"][name] = {"command": command, "input": input_name, "flags": flags, "exit": code}
    for name, (command, input_name, flags, expected) in ERRORS.items():
        code, _ = run(argv_for(command, input_name, flags))
        if code != expected:
            raise SystemExit(f"{name}: exit {code}, expected {expected}")
        manifest["errors"][name] = {"command": command, "input": input_name, "flags": flags, "exit": code}
    (GOLDEN / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


if __name__ == "__main__":
    write_inputs()
    write_goldens()
    print(f"wrote {len(INPUTS) + 1} inputs and {len(CASES)} goldens")
