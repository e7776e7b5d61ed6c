"""Compare the compiled and pure-Python kernel backends.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import timeit

from pdcnet import _kernels
from pdcnet._kernels import _pykernels
from pdcnet.rng import Rng

try:
    from pdcnet._kernels import _ckernels
except ImportError:
    _ckernels = None


def workloads(mod):
    rng = Rng(0)
    alphabet = "ACDEFGHIKLMNPQRSTVWY"
    pairs = [("".join(alphabet[rng.below(20)] for _ in range(30)), "".join(alphabet[rng.below(20)] for _ in range(30)))
             for _ in range(50)]
    seqs = [[rng.below(1 << 40) for _ in range(12)] for _ in range(1000)]
    return {
        "nw_score (50 pairs, len 30)": lambda: [mod.nw_score(a, b) for a, b in pairs],
        "hash_ints (1000 x 12 ints)": lambda: [mod.hash_ints(s, 7) for s in seqs],
        "xoshiro_fill_uniform (100k)": lambda: mod.xoshiro_fill_uniform([1, 2, 3, 4], 100_000),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    print(f"active backend: {_kernels.BACKEND}")
    backends = {"python": _pykernels}
    if _ckernels is not None:
        backends["cython"] = _ckernels
    results = {name: {k: min(timeit.repeat(f, number=1, repeat=args.repeat)) for k, f in workloads(mod).items()}
               for name, mod in backends.items()}
    print(f"{'kernel':32s}" + "".join(f"{b:>12s}" for b in backends) + ("     speedup" if len(backends) == 2 else ""))
    for k in results["python"]:
        row = f"{k:32s}" + "".join(f"{results[b][k] * 1e3:10.2f}ms" for b in backends)
        if len(backends) == 2:
            row += f"{results['python'][k] / results['cython'][k]:11.1f}x"
        print(row)


if __name__ == "__main__":
    main()
