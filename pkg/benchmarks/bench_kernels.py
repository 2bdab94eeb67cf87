"""Benchmark the hot ODE kernels: numba-jitted vs pure-NumPy fallback.

The kernel path is selected at import time by the SGTORI_NUMBA environment
variable, so each configuration runs in a fresh subprocess.  Includes a JIT
warmup pass so the jitted timings measure steady-state throughput.
"""

import json
import os
import subprocess
import sys

_WORKER = r"""
import json
import sys
import time

import numpy as np

from sgtori import kernels
from sgtori.genus1 import Genus1Data, lattice_g1, lift_state
from sgtori.laxflows import Genus1State, frame_at, integrate_flow
from sgtori.potentials import Potential

kernels.warmup()

results = {"numba": kernels.USE_NUMBA}

# flow integration: commuting-flow trajectory, the conservation workload
p0 = Potential(0.0, 0.0, 2.0)
t0 = time.perf_counter()
reps = 5
for _ in range(reps):
    integrate_flow(p0, [(3.0, 4.0)], tol=1e-10)
results["flow_ms"] = (time.perf_counter() - t0) / reps * 1e3

# frame integration: potential + frames at 4 circle samples over one period
d = Genus1Data.from_rt(0.7, 0.3)
w1, _ = lattice_g1(d)
pl = lift_state(Genus1State(0.0, 1.0 / np.sqrt(0.7)), d.phi)
lams = np.exp(1j * np.arange(4))
t0 = time.perf_counter()
reps = 3
for _ in range(reps):
    frame_at(pl, w1.real, w1.imag, lams, tol=1e-11)
results["frame_ms"] = (time.perf_counter() - t0) / reps * 1e3

print(json.dumps(results))
"""


def run(use_numba):
    env = dict(os.environ, SGTORI_NUMBA="1" if use_numba else "0")
    out = subprocess.run([sys.executable, "-c", _WORKER], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main():
    print("kernel benchmark (lower is better)")
    print(f"{'path':10s} {'flow [ms]':>12s} {'frame [ms]':>12s}")
    rows = {}
    for use in (False, True):
        r = run(use)
        name = "numba" if r["numba"] else "numpy"
        rows[name] = r
        print(f"{name:10s} {r['flow_ms']:12.2f} {r['frame_ms']:12.2f}")
    if "numba" in rows and "numpy" in rows:
        for key, label in (("flow_ms", "flow"), ("frame_ms", "frame")):
            speedup = rows["numpy"][key] / rows["numba"][key]
            print(f"{label} speedup: {speedup:.1f}x")


if __name__ == "__main__":
    main()
