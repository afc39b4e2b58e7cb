"""Compare the compiled and NumPy kernels on the synthesis hot loop.

    python3 benchmarks/bench_kernels.py [--repeat 200] [--full]

Times one ES generation's worth of work (a batch of orthogonal matrices
and their diagonality residuals) per backend, checks the two agree, and
with ``--full`` also times a complete default ``synthesize`` run under
each backend (in a subprocess, since the backend is fixed at import).
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from fwmcluster import kernels
from fwmcluster.cluster import canonical_cluster_unitary, preset_graph
from fwmcluster.eigenmodes import decompose
from fwmcluster.symplectic import build_cascade, covariance, tree
from fwmcluster.synthesis import build_R

FULL_RUN = (
    "import time, fwmcluster as f;"
    "t = time.perf_counter();"
    "f.synthesize(f.tree(1.5), f.preset_graph('linear4'), f.EsConfig(seed=0));"
    "print(f.BACKEND, time.perf_counter() - t)"
)


def setup(batch):
    basis = decompose(covariance(build_cascade(tree(1.5))))
    r = build_R(basis)
    uv = np.ascontiguousarray(canonical_cluster_unitary(preset_graph("linear4")).uv)
    rh = np.ascontiguousarray(r.conj().T)
    angles = np.random.default_rng(0).uniform(-np.pi, np.pi, size=(batch, 6))
    return angles, uv, rh


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--batch", type=int, default=64)
    ap.add_argument("--repeat", type=int, default=200)
    ap.add_argument("--full", action="store_true", help="also time full synthesize runs")
    args = ap.parse_args()

    angles, uv, rh = setup(args.batch)
    backends = {"python": kernels.get_backend("python")}
    try:
        backends["cython"] = kernels.get_backend("cython")
    except ImportError:
        print("compiled kernels not built; timing the NumPy backend only")

    results = {}
    for name, mod in backends.items():
        mod.residual_batch(angles, uv, rh)  # warm-up
        t = timeit.timeit(lambda: mod.residual_batch(angles, uv, rh), number=args.repeat) / args.repeat
        results[name] = mod.residual_batch(angles, uv, rh)
        print(f"{name:>7}: residual_batch, batch {args.batch}: {t * 1e6:9.1f} us")
        t = timeit.timeit(lambda: mod.orthogonal_batch(angles, 4), number=args.repeat) / args.repeat
        print(f"{name:>7}: orthogonal_batch, batch {args.batch}: {t * 1e6:9.1f} us")

    if len(results) == 2:
        diff = float(np.max(np.abs(results["cython"] - results["python"])))
        print(f"max |cython - python| residual: {diff:.2e}")

    if args.full:
        for pure in ("0", "1"):
            env = dict(os.environ, FWMCLUSTER_PURE_PYTHON=pure)
            out = subprocess.run([sys.executable, "-c", FULL_RUN], env=env, capture_output=True, text=True, check=True)
            backend, secs = out.stdout.split()
            print(f"{backend:>7}: full synthesize (tree3 G=1.5, linear4, defaults): {float(secs):6.2f} s")


if __name__ == "__main__":
    main()
