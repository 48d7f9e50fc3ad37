"""Compare the compiled and pure-python value-iteration kernels.

Runs hard and soft value iteration for one target of the bundled scene at a
few grid resolutions on each available backend and prints wall times plus the
max absolute disagreement.

Usage: python3 benchmarks/bench_kernels.py [--repeats N]
"""
import argparse
import time

import numpy as np

from shared_autonomy import load_bundled_scene
from shared_autonomy._kernels import get_backend
from shared_autonomy.values import hard_value_iteration, soft_value_iteration


def available_backends():
    names = []
    for name in ("python", "native"):
        try:
            get_backend(name)
            names.append(name)
        except Exception:
            pass
    return names


def bench(fn, repeats):
    best = float("inf")
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return best, result


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    cfg = load_bundled_scene("default")
    target = cfg.scene.goals[0].targets[0]
    w = cfg.scene.workspace
    backends = available_backends()
    print(f"backends: {', '.join(backends)}")
    print(f"{'kind':<6} {'res':>5} " + " ".join(f"{b + ' (s)':>12}" for b in backends) +
          f" {'speedup':>8} {'max |diff|':>11}")

    for kind, vi in (("hard", hard_value_iteration), ("soft", soft_value_iteration)):
        for res in (32, 64, 128):
            times, grids = {}, {}
            for backend in backends:
                t, grid = bench(
                    lambda: vi(target, cfg.cost, w, resolution=res, backend=backend),
                    args.repeats,
                )
                times[backend] = t
                grids[backend] = grid.values
            row = f"{kind:<6} {res:>5} " + " ".join(
                f"{times[b]:>12.4f}" for b in backends
            )
            if len(backends) == 2:
                diff = float(np.abs(grids["python"] - grids["native"]).max())
                row += f" {times['python'] / times['native']:>7.1f}x {diff:>11.2e}"
            print(row)


if __name__ == "__main__":
    main()
