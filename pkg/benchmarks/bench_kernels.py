"""Compare the compiled and the NumPy kernels on the hot simulation loops.

    python3 benchmarks/bench_kernels.py [--n-paths 200000] [--repeat 3]

Both backends are loaded side by side, checked for bit-identical output and
timed (best of ``--repeat``).
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from novikov import _backend

CASES = {
    "scan_lower b=0.94": lambda k, n: k.scan_lower(42, 0, n, 0.9417751453067922, 10**7),
    "scan_upper b=-0.48 c=8": lambda k, n: k.scan_upper(42, 0, n, -0.476292, 8.0, 10**7),
    "count_jumps t=2": lambda k, n: k.count_jumps(42, 0, n, 2.0, 10**7),
    "jump_matrix k=16": lambda k, n: k.jump_matrix(42, 0, n, 16),
}


def best_of(fn, repeat: int) -> tuple[float, object]:
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def same(x, y) -> bool:
    xs = x if isinstance(x, tuple) else (x,)
    ys = y if isinstance(y, tuple) else (y,)
    return all(np.array_equal(p, q, equal_nan=p.dtype.kind == "f") for p, q in zip(xs, ys))


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n-paths", type=int, default=200_000)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    backends = {name: _backend.load(name) for name in _backend.available()}
    print(f"backends: {', '.join(backends)}; n_paths={args.n_paths}")
    header = f"{'kernel':<24}" + "".join(f"{name + ' [s]':>14}" for name in backends) + f"{'speedup':>10}{'identical':>11}"
    print(header)
    for label, call in CASES.items():
        times, outs = {}, {}
        for name, mod in backends.items():
            times[name], outs[name] = best_of(lambda: call(mod, args.n_paths), args.repeat)
        row = f"{label:<24}" + "".join(f"{times[n]:>14.4f}" for n in backends)
        if len(backends) == 2:
            speedup = times["python"] / times["cython"]
            row += f"{speedup:>9.1f}x{str(same(outs['cython'], outs['python'])):>11}"
        print(row)


if __name__ == "__main__":
    main()
