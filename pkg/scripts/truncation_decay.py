"""Measure how the truncation deviation of a single Blaschke factor decays with N.

For theta with one zero at r the leakage of the exact projection onto
theta H^2 past degree N should decay like r^(N+1). The script fits the slope
of log(leakage) against N and prints it next to log(r).

    python scripts/truncation_decay.py [--radii 0.3 0.6 0.9] [--span 40]
"""

from __future__ import annotations

import argparse

import numpy as np

from hardy_modules.blaschke import BlaschkeProduct
from hardy_modules.submodule import truncation_deviation


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--radii", type=float, nargs="+", default=[0.3, 0.6, 0.9])
    parser.add_argument("--span", type=int, default=40, help="largest N offset above the degree")
    args = parser.parse_args()

    print(f"{'r':>5} {'slope':>10} {'log r':>10} {'ratio':>7} {'max top':>10}")
    for r in args.radii:
        theta = BlaschkeProduct((r,))
        Ns = np.arange(theta.degree + 5, theta.degree + args.span + 1)
        devs = [truncation_deviation(theta, int(N)) for N in Ns]
        leak = np.array([d["leakage"] for d in devs])
        slope = np.polyfit(Ns, np.log(leak), 1)[0]
        top = max(d["top"] for d in devs)
        print(f"{r:5.2f} {slope:10.5f} {np.log(r):10.5f} {slope / np.log(r):7.4f} {top:10.2e}")


if __name__ == "__main__":
    main()
