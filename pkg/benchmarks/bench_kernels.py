"""Compare the compiled kernels with the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat N] [--end-to-end]

Micro benchmarks call both kernel modules directly on the same random
sparse polynomials and assert identical results.  ``--end-to-end`` also
times acceptance criteria 2 and 9 in subprocesses with and without
``POISSONLR_PURE=1``.
"""

from __future__ import annotations

import argparse
import os
import random
import subprocess
import sys
import timeit

from gmpy2 import mpq

from poissonlr import _kernels_py as py
from poissonlr._kernels_py import FIELD

try:
    from poissonlr import _ckernels as cy
except ImportError:  # extension not built
    cy = None


def random_poly(rng: random.Random, terms: int, nvars: int = 3, deg: int = 6) -> dict:
    out = {}
    for _ in range(terms):
        key = rng.randrange(2)  # power of i
        for v in range(1, nvars + 1):
            key |= rng.randrange(deg + 1) << (FIELD * v)
        out[key] = mpq(rng.randint(-50, 50) or 1, rng.randint(1, 12))
    return out


def cases(rng):
    a, b = random_poly(rng, 40), random_poly(rng, 40)
    return {
        "poly_add": (a, b),
        "poly_mul": (a, b),
        "poly_diff": (a, FIELD),
        "poly_scale": (a, mpq(3, 7)),
        "weyl_pairs": (12, 15),
        "binomial_row": (40,),
    }


def micro(repeat: int) -> list[tuple[str, float, float]]:
    rng = random.Random(1)
    rows = []
    for name, args in cases(rng).items():
        fp = getattr(py, name)
        t_py = min(timeit.repeat(lambda: fp(*args), number=repeat, repeat=3)) / repeat
        t_cy = float("nan")
        if cy is not None:
            fc = getattr(cy, name)
            assert fc(*args) == fp(*args), name
            t_cy = min(timeit.repeat(lambda: fc(*args), number=repeat, repeat=3)) / repeat
        rows.append((name, t_py, t_cy))
    return rows


def end_to_end(only: str) -> tuple[float, float]:
    code = (
        "import time; from poissonlr.acceptance import run_criteria; t = time.perf_counter(); "
        f"assert all(r.ok for r in run_criteria({only!r})); print(time.perf_counter() - t)"
    )
    out = []
    for pure in (True, False):
        env = dict(os.environ)
        env.pop("POISSONLR_PURE", None)
        if pure:
            env["POISSONLR_PURE"] = "1"
        res = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        out.append(float(res.stdout.strip().splitlines()[-1]))
    return out[0], out[1]


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=200)
    ap.add_argument("--end-to-end", action="store_true")
    args = ap.parse_args(argv)

    print(f"compiled kernels: {'available' if cy else 'not built'}")
    print(f"{'kernel':<14}{'python (us)':>14}{'cython (us)':>14}{'speedup':>10}")
    for name, t_py, t_cy in micro(args.repeat):
        print(f"{name:<14}{t_py * 1e6:>14.2f}{t_cy * 1e6:>14.2f}{t_py / t_cy:>10.2f}")
    if args.end_to_end:
        for only in ("2", "9"):
            t_py, t_cy = end_to_end(only)
            print(f"criterion {only}: python {t_py:.2f}s, cython {t_cy:.2f}s, speedup {t_py / t_cy:.2f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
