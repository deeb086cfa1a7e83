"""Random tensor round trips: build Q_theta1 (x) Q_theta2, factor it, compare.

Reports the worst zero mismatch and factorization residual over many seeds.

    python scripts/roundtrip_sweep.py [--trials 50] [--radius 0.3] [--max-degree 3]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from hardy_modules.blaschke import match_zeros
from hardy_modules.factorization import factorize
from hardy_modules.model_space import guard_truncation
from hardy_modules.polydisc import tensor_module
from hardy_modules.selftest import random_blaschke


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--trials", type=int, default=50)
    parser.add_argument("--radius", type=float, default=0.3)
    parser.add_argument("--max-degree", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    worst_zero = worst_res = 0.0
    start = time.perf_counter()
    for _ in range(args.trials):
        thetas = [random_blaschke(rng, int(rng.integers(1, args.max_degree + 1)), args.radius) for _ in range(2)]
        N = max(guard_truncation(t) for t in thetas) + 1
        f = factorize(tensor_module(thetas, N))
        worst_res = max(worst_res, f.residual)
        worst_zero = max(worst_zero, *(match_zeros(g.zeros, t.zeros) for g, t in zip(f.thetas, thetas)))
    elapsed = time.perf_counter() - start
    print(f"trials {args.trials}  max residual {worst_res:.2e}  max zero mismatch {worst_zero:.2e}  ({elapsed:.1f} s)")


if __name__ == "__main__":
    main()
