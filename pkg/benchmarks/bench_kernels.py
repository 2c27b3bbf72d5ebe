"""Compare the numba and pure-numpy simulation backends.

The backend is fixed at import, so each one runs in its own subprocess
with FILTERSIM_BACKEND set.  Both must produce identical outputs.

    python3 benchmarks/bench_kernels.py --size 96x128 -w 7 --repeat 3
"""

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import hashlib, json, sys, time
import numpy as np
from filtersim import _backend
from filtersim.core import BorderPolicy, FilterConfig, Kernel, PixelImage
from filtersim.pipeline import simulate

H, W, w, repeat, form, policy = json.loads(sys.argv[1])
rng = np.random.default_rng(0)
img = PixelImage(rng.integers(0, 256, size=(H, W)))
k = Kernel(rng.integers(-2000, 2001, size=(w, w)))
cfg = FilterConfig(form=form, border_policy=BorderPolicy(policy), w=w)
t0 = time.perf_counter()
simulate(cfg, img, k)  # includes JIT compile for numba
first = time.perf_counter() - t0
times = []
for _ in range(repeat):
    t0 = time.perf_counter()
    out, rep = simulate(cfg, img, k)
    times.append(time.perf_counter() - t0)
digest = hashlib.sha256(out.samples.tobytes()).hexdigest()
print(json.dumps({"backend": _backend.BACKEND, "first": first, "best": min(times),
                  "cycles": rep.total_cycles, "digest": digest}))
"""


def run_backend(backend, args):
    env = dict(os.environ, FILTERSIM_BACKEND=backend)
    payload = json.dumps([args.height, args.width, args.w, args.repeat, args.form, args.policy])
    proc = subprocess.run([sys.executable, "-c", WORKER, payload], env=env,
                          capture_output=True, text=True, check=True)
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", default="96x128", help="HxW frame")
    ap.add_argument("-w", type=int, default=7)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--form", default="direct", choices=["direct", "transposed"])
    ap.add_argument("--policy", default=None, help="border policy (default depends on form)")
    args = ap.parse_args(argv)
    args.height, args.width = (int(v) for v in args.size.lower().split("x"))
    if args.policy is None:
        args.policy = "neglect" if args.form == "transposed" else "mirror-nodup"

    results = [run_backend(b, args) for b in ("numba", "numpy")]
    print(f"{args.height}x{args.width} frame, w={args.w}, {args.form}/{args.policy}, "
          f"{results[0]['cycles']} cycles")
    print(f"{'backend':8s} {'first run':>10s} {'best':>10s} {'Mcycles/s':>10s}")
    for r in results:
        print(f"{r['backend']:8s} {r['first']:10.3f} {r['best']:10.4f} {r['cycles'] / r['best'] / 1e6:10.3f}")
    speedup = results[1]["best"] / results[0]["best"]
    same = results[0]["digest"] == results[1]["digest"]
    print(f"speedup numba/numpy: {speedup:.1f}x; outputs identical: {same}")
    return 0 if same else 1


if __name__ == "__main__":
    sys.exit(main())
