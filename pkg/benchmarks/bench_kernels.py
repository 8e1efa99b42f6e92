"""Compare the jit and numpy kernel backends on the two hot paths.

Run as ``python3 benchmarks/bench_kernels.py``.  The drive benchmark pushes
a dense zigzag input through a large relay grid; the sweep benchmark
evaluates a transition surface on the same grid.  Without numba installed
(or with HYST2D_NO_NUMBA=1) only the numpy rows are printed.
"""

import time

import numpy as np

import hyst2d as h


def make_drive_case(n_samples: int = 20000, n_cells: int = 4000):
    t = np.linspace(0.0, 10.0, n_samples)
    x = 0.95 * np.sin(2.0 * np.pi * 1.7 * t) * np.cos(2.0 * np.pi * 0.31 * t)
    k0 = x
    k1 = -x
    rng = np.random.default_rng(12)
    c0 = rng.uniform(-0.95, 0.95, n_cells)
    c1 = np.maximum(rng.uniform(-0.95, 0.95, n_cells), -c0 + 0.05)
    xi = np.zeros(n_cells, dtype=np.int8)
    w = rng.uniform(0.5, 1.5, n_cells)
    return t, k0, k1, c0, c1, xi, w


def make_sweep_case(n_cells: int = 4_000_000, n_nodes: int = 41):
    rng = np.random.default_rng(34)
    c0 = rng.uniform(-1.0, 1.0, n_cells)
    c1 = np.maximum(rng.uniform(-1.0, 1.0, n_cells), -c0 + 0.01)
    wa = rng.uniform(0.0, 1.0, n_cells)
    K0 = np.linspace(-0.9, 0.9, n_nodes)
    K1 = K0[::-1].copy()
    return K0, K1, c0, c1, wa


def timed(fn, repeats: int = 5) -> float:
    fn()  # warm the jit cache before timing
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    backends = ["numpy"] + (["numba"] if h.HAVE_NUMBA else [])
    print(f"available backends: {', '.join(backends)}")

    drive = make_drive_case()
    sweep = make_sweep_case()
    results: dict[str, dict[str, float]] = {}
    for b in backends:
        results[b] = {
            "drive_grid": timed(lambda: h.drive_grid(*drive, backend=b)),
            "psi_sweep": timed(lambda: h.psi_sweep(*sweep, backend=b)),
        }

    for name in ("drive_grid", "psi_sweep"):
        row = "  ".join(f"{b}: {results[b][name] * 1e3:8.1f} ms" for b in backends)
        print(f"{name:<12} {row}")
        if "numba" in results:
            speedup = results["numpy"][name] / results["numba"][name]
            print(f"{'':<12} numba speedup: {speedup:.1f}x")

    if "numba" in results:
        a = h.drive_grid(*drive, backend="numpy")
        bout = h.drive_grid(*drive, backend="numba")
        assert np.array_equal(a[0], bout[0]), "backends disagree on final state"
        pa = h.psi_sweep(*sweep, backend="numpy")
        pb = h.psi_sweep(*sweep, backend="numba")
        assert np.allclose(pa, pb, atol=1e-9), "backends disagree on sweep"
        print("backend agreement checked on both cases")


if __name__ == "__main__":
    main()
