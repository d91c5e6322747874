"""Compiled closed-walk kernel against the numpy fallback.

    python benchmarks/bench_kernels.py --repeat 3
"""

import argparse
import timeit

import numpy as np

from ramanujan_bigraphs.bigraph import arithmetic_cayley, arithmetic_schreier
from ramanujan_bigraphs.dynamics import HAVE_KERNELS, nb_closed_walks_dfs
from ramanujan_bigraphs.lattice import generator_system
from ramanujan_bigraphs.spectral import integer_gram, modular_rank

CASES = {
    "Y_E^{2,7}": (lambda: arithmetic_schreier(generator_system("eisenstein", 2), 7, "projective-plane"), 12),
    "Y_E^{2,5}": (lambda: arithmetic_schreier(generator_system("eisenstein", 2), 5, "isotropic"), 10),
    "X_E^{5,2}": (lambda: arithmetic_cayley(generator_system("eisenstein", 5), 2)[0], 6),
}


def best_of(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    print(f"compiled kernels available: {HAVE_KERNELS}")
    print(f"{'instance':<12}{'m':>4}{'numpy s':>12}{'compiled s':>12}{'speedup':>10}")
    for name, (build, m) in CASES.items():
        g = build()
        slow = best_of(lambda: nb_closed_walks_dfs(g, m, use_kernel=False), args.repeat)
        if HAVE_KERNELS:
            fast = best_of(lambda: nb_closed_walks_dfs(g, m, use_kernel=True), args.repeat)
            assert np.array_equal(nb_closed_walks_dfs(g, m, use_kernel=True),
                                  nb_closed_walks_dfs(g, m, use_kernel=False))
            print(f"{name:<12}{m:>4}{slow:>12.3f}{fast:>12.3f}{slow / fast:>10.1f}")
        else:
            print(f"{name:<12}{m:>4}{slow:>12.3f}{'-':>12}{'-':>10}")

    print("\nmodular rank of the integer Gram matrix (blocked float elimination)")
    for name, (build, _) in CASES.items():
        G = integer_gram(build())
        t = best_of(lambda: modular_rank(G, 1_048_583), args.repeat)
        print(f"{name:<12}{G.shape[0]:>6} x {G.shape[0]:<6}{t:>10.4f} s")


if __name__ == "__main__":
    main()
