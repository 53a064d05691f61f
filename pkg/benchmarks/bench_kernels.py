"""Time the hot kernels on every available backend.

    python benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from fermikin import LatticeContext, Potential, kernels
from fermikin.bosonization import boson_operator
from fermikin.conventions import RAW
from fermikin.states import generate_slater, make_slater

CASES = {
    "delta_t_array (1e6)": lambda e: kernels.delta_t_array(37.0, e),
    "disk_count (r=2000)": lambda e: kernels.disk_count(2000 ** 2),
    "annulus_count (p_F=400)": lambda e: kernels.annulus_count(400 ** 2 - 201 ** 2, 400 ** 2 - 200 ** 2),
    "plane_lune_count (k=(1,2,3), p_F=60)": lambda e: kernels.plane_lune_count((1, 2, 3), 40, 3600),
    "lune_points (k=(0,1,1), p_F=60)": lambda e: kernels.lune_points((0, 1, 1), 3600),
}


def _boson_case():
    ctx = LatticeContext(3, 20.0, 1)
    pot = Potential.indicator(3, 1)
    data = generate_slater(ctx, 2, seed=3)
    f = make_slater(ctx, data.H, data.P, data.epsilon)
    return lambda e: boson_operator(ctx, pot, f, 0.0, 15.0, RAW)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    energies = np.random.default_rng(0).normal(scale=20.0, size=1_000_000)
    cases = dict(CASES)
    cases["B_t on Slater data (p_F=20)"] = _boson_case()
    backends = kernels.available_backends()
    print(f"{'kernel':42s}" + "".join(f"{b:>12s}" for b in backends) + "    speedup")
    for name, fn in cases.items():
        times = []
        for b in backends:
            kernels.use_backend(b)
            times.append(min(timeit.repeat(lambda: fn(energies), number=1, repeat=args.repeat)))
        line = f"{name:42s}" + "".join(f"{t * 1e3:10.2f}ms" for t in times)
        if len(times) == 2:
            line += f"  {times[1] / times[0]:8.1f}x"
        print(line)


if __name__ == "__main__":
    main()
