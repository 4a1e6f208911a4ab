"""Compare the compiled and numpy kernel backends.

    python benchmarks/bench_kernels.py [--n 262144] [--repeat 5]

Reports the best wall-clock time per kernel and backend, and the largest
absolute difference between backends.
"""
import argparse
import time

import numpy as np

from chiral_pinem import kernels


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=256 * 256, help="number of pixels")
    ap.add_argument("--beta-max", type=float, default=3.0)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    psi = rng.normal(size=args.n) + 1j * rng.normal(size=args.n)
    beta = args.beta_max * np.sqrt(rng.random(args.n)) * np.exp(2j * np.pi * rng.random(args.n))
    l_max = int(np.ceil(2 * args.beta_max)) + 15
    side = int(np.sqrt(args.n))
    field = psi[: side * side].reshape(side, side)
    radii = np.linspace(0, 0.45 * side, 64)
    c = side / 2.0

    cases = {
        "bessel_j_ladder": lambda m: m.bessel_j_ladder(2 * np.abs(beta), l_max),
        "sideband_stack": lambda m: m.sideband_stack(psi, beta, l_max),
        "ring_sample": lambda m: m.ring_sample(field, c, c, radii, 512),
    }
    found = kernels.backends()
    print(f"n = {args.n}, l_max = {l_max}, default backend = {kernels.BACKEND}")
    print(f"{'kernel':<18}" + "".join(f"{name:>12}" for name in found) + f"{'speedup':>10}{'max diff':>12}")
    for label, fn in cases.items():
        times, outs = {}, {}
        for name, mod in found.items():
            times[name], outs[name] = best_of(lambda: fn(mod), args.repeat)
        row = f"{label:<18}" + "".join(f"{times[n] * 1e3:>10.2f}ms" for n in found)
        if "cython" in found:
            diff = float(np.max(np.abs(outs["cython"] - outs["python"])))
            row += f"{times['python'] / times['cython']:>9.2f}x{diff:>12.2e}"
        print(row)


if __name__ == "__main__":
    main()
