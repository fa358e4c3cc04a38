"""Timing comparison of the compiled and reference kernel backends.

Run directly:  python3 benchmarks/bench_kernels.py

The two hot paths are the all-pairs principal-value sums (quadratic in the
node counts) and the midpoint time sweep (a dense matvec per step).  Both
backends compute identical formulas; this script reports wall time and the
worst output disagreement.
"""

import time

import numpy as np

from sloshwaves._kernels import reference

try:
    from sloshwaves._kernels import _core as compiled
except ImportError:
    compiled = None


def _time(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_pv(p=64, q=8192, repeats=5):
    rng = np.random.default_rng(0)
    y = (np.arange(p) + 0.5) * np.pi / p
    z = (np.arange(q) + 0.5) * np.pi / q
    f = rng.standard_normal(q)
    fp = rng.standard_normal(p)
    fl = rng.standard_normal(p)
    h = np.pi / q
    args = (y, z, f, fp, fl, h, 0.0)
    rows = []
    t_ref, out_ref = _time(lambda: reference.pv_subtracted(*args), repeats)
    rows.append(("reference", t_ref, 0.0))
    if compiled is not None:
        t_c, out_c = _time(lambda: compiled.pv_subtracted(*args), repeats)
        rows.append(("compiled", t_c, float(np.max(np.abs(out_c - out_ref)))))
    return f"pv_subtracted p={p} q={q}", rows


def bench_sweep(n=24, nsteps=200, repeats=20):
    rng = np.random.default_rng(1)
    a = rng.standard_normal(n)
    z = rng.standard_normal(n)
    m = rng.standard_normal((n, n))
    sinv = m @ m.T / n + np.eye(n)
    dvec = np.abs(rng.standard_normal(n))
    loads = rng.standard_normal((nsteps, n))
    args = (a, z, sinv, dvec, loads, 0.01, nsteps, 1)
    rows = []
    t_ref, out_ref = _time(lambda: reference.midpoint_sweep(*args), repeats)
    rows.append(("reference", t_ref, 0.0))
    if compiled is not None:
        t_c, out_c = _time(lambda: compiled.midpoint_sweep(*args), repeats)
        gap = float(np.max(np.abs(out_c[2] - out_ref[2])))
        rows.append(("compiled", t_c, gap))
    return f"midpoint_sweep n={n} steps={nsteps}", rows


def main():
    if compiled is None:
        print("compiled backend not built; timing the reference path only")
    for label, rows in (bench_pv(), bench_sweep()):
        print(f"\n{label}")
        base = rows[0][1]
        for name, t, gap in rows:
            speedup = base / t
            print(f"  {name:10s} {1e3 * t:9.3f} ms   x{speedup:5.2f}"
                  + (f"   max |diff| = {gap:.2e}" if name != "reference" else ""))


if __name__ == "__main__":
    main()
