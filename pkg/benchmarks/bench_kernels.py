"""Time the pair-sum quadrature kernels against the numpy fallback.

The backend is fixed at import time by FNLSLAB_NO_NUMBA, so each backend
runs in its own subprocess; the parent collates a comparison table and
cross-checks that both backends agree on the computed values.

Usage: python benchmarks/bench_kernels.py [--m1 1024] [--m2 64] [--repeat 5]
"""

import argparse
import json
import os
import subprocess
import sys
import time


def _inputs(m1, m2):
    import numpy as np
    rng = np.random.default_rng(20260815)
    u1 = rng.standard_normal(m1)
    i1 = np.arange(m1, dtype=np.int64)
    u2 = rng.standard_normal(m2 * m2).ravel()
    i2 = np.arange(m2 * m2, dtype=np.int64)
    coords = np.stack([rng.uniform(-8.0, 8.0, m2 * m2) for _ in range(2)])
    x0 = np.zeros(2)
    h1, h2 = 16.0 / m1, 16.0 / m2
    return {
        "pair_sum_1d": (u1, i1, i1, m1, h1, 2.0),
        "pair_sum_2d": (u2, i2, i2, m2, h2, 16.0, 3.5),
        "weighted_tail_sum": (np.abs(u2), i2, coords, x0, 16.0, 3.5),
    }


def run_backend(args):
    from fnlslab import _kernels as K
    want_numba = not os.environ.get("FNLSLAB_NO_NUMBA")
    if K.USING_NUMBA != want_numba:
        raise SystemExit(f"backend mismatch: USING_NUMBA={K.USING_NUMBA}")
    funcs = {name: getattr(K, name) for name in
             ("pair_sum_1d", "pair_sum_2d", "weighted_tail_sum")}
    out = {"backend": "numba" if K.USING_NUMBA else "numpy", "times": {},
           "values": {}}
    for name, argv in _inputs(args.m1, args.m2).items():
        f = funcs[name]
        f(*argv)                      # warm: JIT compile / allocator
        best = float("inf")
        for _ in range(args.repeat):
            t0 = time.perf_counter()
            val = f(*argv)
            best = min(best, time.perf_counter() - t0)
        out["times"][name] = best
        out["values"][name] = float(val)
    json.dump(out, sys.stdout)
    print()


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--m1", type=int, default=1024,
                    help="1d lattice size (pairs scale as m1^2)")
    ap.add_argument("--m2", type=int, default=64,
                    help="2d lattice side (pairs scale as m2^4)")
    ap.add_argument("--repeat", type=int, default=5,
                    help="timing repetitions, best is kept")
    ap.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args()
    if args.worker:
        return run_backend(args)

    results = {}
    for label, extra in (("numba", {}), ("numpy", {"FNLSLAB_NO_NUMBA": "1"})):
        env = dict(os.environ)
        env.pop("FNLSLAB_NO_NUMBA", None)
        env.update(extra)
        cmd = [sys.executable, os.path.abspath(__file__), "--worker",
               "--m1", str(args.m1), "--m2", str(args.m2),
               "--repeat", str(args.repeat)]
        proc = subprocess.run(cmd, env=env, capture_output=True, text=True)
        if proc.returncode != 0:
            print(proc.stderr, file=sys.stderr)
            raise SystemExit(f"{label} worker failed")
        results[label] = json.loads(proc.stdout)

    print(f"pair-sum kernels, m1={args.m1} m2={args.m2} "
          f"(best of {args.repeat})")
    print(f"{'kernel':<20} {'numba [s]':>12} {'numpy [s]':>12} "
          f"{'speedup':>9}")
    for name in results["numba"]["times"]:
        tn = results["numba"]["times"][name]
        tp = results["numpy"]["times"][name]
        vn = results["numba"]["values"][name]
        vp = results["numpy"]["values"][name]
        rel = abs(vn - vp) / max(abs(vn), 1e-300)
        if rel > 1e-9:
            raise SystemExit(
                f"{name}: backends disagree, {vn!r} vs {vp!r}")
        print(f"{name:<20} {tn:12.6f} {tp:12.6f} {tp / tn:8.1f}x")


if __name__ == "__main__":
    main()
