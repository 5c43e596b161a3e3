"""Benchmark the compiled kernel backend against the pure-Python one.

Run with `python -m svhmc.bench [n]`.  Times the four hot kernels at a
representative path length (default 2000, the full-scale study size) and
prints per-call times and speedups.
"""

from __future__ import annotations

import sys
import timeit

import numpy as np

from svhmc import _kernels
from svhmc._kernels import pure


def _setup(n: int):
    rng = np.random.default_rng(0)
    y2 = rng.gamma(1.0, 0.4, size=n)
    h = rng.normal(-1.0, 0.5, size=n)
    p = rng.standard_normal(n)
    u_prop = rng.random(n)
    u_acc = rng.random(n)
    return y2, h, p, u_prop, u_acc


def _time(fn, repeat: int = 5, number: int = 200) -> float:
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number


def run(n: int = 2000) -> None:
    if "compiled" not in _kernels.available_backends():
        print("compiled backend unavailable; nothing to compare")
        return
    from svhmc._kernels import _core
    y2, h, p, u_prop, u_acc = _setup(n)
    mu, phi, s2 = -1.0, 0.97, 0.05
    cases = {
        "potential_energy": lambda mod: (
            lambda: mod.potential_energy(y2, h, mu, phi, s2)),
        "potential_gradient": lambda mod: (
            lambda: mod.potential_gradient(y2, h, mu, phi, s2)),
        "leapfrog_trajectory(10)": lambda mod: (
            lambda: mod.leapfrog_trajectory(y2, h, p, mu, phi, s2, 0.05, 10)),
        "metropolis_sweep": lambda mod: (
            lambda: mod.metropolis_sweep(y2, h.copy(), mu, phi, s2, 1.0,
                                         u_prop, u_acc)),
    }
    print(f"kernel timings at n={n} (best of 5 x 200 calls)")
    print(f"{'kernel':<24}{'pure':>12}{'compiled':>12}{'speedup':>10}")
    for name, make in cases.items():
        t_pure = _time(make(pure))
        t_core = _time(make(_core))
        print(f"{name:<24}{t_pure * 1e6:>10.1f}us{t_core * 1e6:>10.1f}us"
              f"{t_pure / t_core:>9.1f}x")


if __name__ == "__main__":
    run(int(sys.argv[1]) if len(sys.argv) > 1 else 2000)
