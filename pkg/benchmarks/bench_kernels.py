"""Time the numba kernels against their numpy twins.

    python3 benchmarks/bench_kernels.py [--repeat 3] [--quick]

Each workload runs once per backend to compile / warm caches, then the best
of ``--repeat`` runs is reported.
"""
import argparse
import time

import numpy as np

from qstar import _accel
from qstar.graph import SplitObservable, ensemble_graph, make_graph
from qstar.scars import find_bunching
from qstar.special import faddeeva_w
from qstar.spectrum import eigenvalues
from qstar.wavefunction import indicator_elements


def workloads(quick: bool):
    n = 20_000 if quick else 100_000
    g = ensemble_graph(30, 3, count=n, seed=0)
    k = eigenvalues(g, n).k
    obs = SplitObservable(30, 3)
    rng = np.random.default_rng(0)
    z = rng.uniform(-8, 8, 200_000) + 1j * rng.uniform(-8, 8, 200_000)
    g5 = make_graph([1.0, 4 * 2**0.5, 3 * 3**0.5, 2.5 * 5**0.5, 1.7 * np.pi])
    budget = 10**6 if quick else 10**7
    return {
        f"roots ({n} eigenvalues, b=90)": lambda: eigenvalues(g, n),
        f"indicator elements ({n} states)": lambda: indicator_elements(k, g, obs),
        "faddeeva_w (2e5 points)": lambda: faddeeva_w(z),
        f"torus scan ({budget:.0e} steps)": lambda: find_bunching(g5, 1, 2, 0.02, budget),
    }


def best_of(fn, repeat: int) -> float:
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--quick", action="store_true", help="smaller workloads")
    args = ap.parse_args()
    if not _accel.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    rows = []
    for name, fn in workloads(args.quick).items():
        t = {}
        for backend in ("numba", "numpy"):
            _accel.set_backend(backend)
            t[backend] = best_of(fn, args.repeat)
        rows.append((name, t["numba"], t["numpy"]))
    _accel.set_backend("numba")

    width = max(len(r[0]) for r in rows)
    print(f"{'workload':<{width}}  {'numba s':>9}  {'numpy s':>9}  speedup")
    for name, a, b in rows:
        print(f"{name:<{width}}  {a:9.4f}  {b:9.4f}  {b / a:6.1f}x")


if __name__ == "__main__":
    main()
