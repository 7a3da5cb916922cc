"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py --rows 2000 --repeat 5
"""
from __future__ import annotations

import argparse
import json
import sys
import timeit

import numpy as np

from trendmill import _kernels_py

try:
    from trendmill import _kernels
except ImportError:  # extension not built
    _kernels = None


def _cases(rows: int, features: int, seed: int):
    rng = np.random.default_rng(seed)
    X = np.ascontiguousarray(rng.integers(0, 60, size=(rows, features)).astype(np.float64))
    y = rng.normal(50, 15, rows)
    idx = np.arange(rows, dtype=np.intp)
    states = rng.choice(["California", "Texas", "New York", "N3w York", "Ohio!"], size=rows * 50).tolist()
    # complete depth-5 tree, splitting on each feature in turn
    n_split = 31
    feature = np.full(63, -1, dtype=np.int64)
    threshold = np.zeros(63)
    left = np.full(63, -1, dtype=np.int64)
    right = np.full(63, -1, dtype=np.int64)
    for i in range(n_split):
        feature[i] = i % features
        threshold[i] = float(rng.integers(0, 60))
        left[i], right[i] = 2 * i + 1, 2 * i + 2
    value = rng.normal(50, 15, 63)
    return {
        "best_split": lambda m: m.best_split(X, y, idx, 1),
        "outside_charset_mask": lambda m: m.outside_charset_mask(
            states, "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz "),
        "predict_rows": lambda m: m.predict_rows(feature, threshold, left, right, value, X),
    }


def _same(a, b) -> bool:
    if isinstance(a, tuple):
        return len(a) == len(b) and all(_same(x, y) for x, y in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b))


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--rows", type=int, default=2000)
    p.add_argument("--features", type=int, default=9)
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true", help="print machine-readable results")
    args = p.parse_args(argv)

    if _kernels is None:
        print("compiled kernels not available; build with `pip install --no-build-isolation -e .`",
              file=sys.stderr)
        return 1

    results = []
    for name, call in _cases(args.rows, args.features, args.seed).items():
        if not _same(call(_kernels), call(_kernels_py)):
            print(f"{name}: backends disagree", file=sys.stderr)
            return 1
        py = min(timeit.repeat(lambda: call(_kernels_py), number=1, repeat=args.repeat))
        cy = min(timeit.repeat(lambda: call(_kernels), number=1, repeat=args.repeat))
        results.append({"kernel": name, "python_s": py, "cython_s": cy, "speedup": py / cy if cy else None})

    if args.json:
        print(json.dumps(results, indent=2))
    else:
        print(f"{'kernel':<22}{'python ms':>12}{'cython ms':>12}{'speedup':>10}")
        for r in results:
            print(f"{r['kernel']:<22}{r['python_s'] * 1e3:>12.3f}{r['cython_s'] * 1e3:>12.3f}{r['speedup']:>9.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
