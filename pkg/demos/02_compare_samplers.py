"""Compare the grid sampler with the two kd-tree baselines.

All three draw from the same distribution: each join pair with
probability 1/|J|. They differ in where time goes. KDS counts every
window exactly up front. KDS-rejection uses cheap grid bounds and
rejects some draws. The grid sampler bounds each window from per-cell
trees and answers a draw in polylogarithmic time.

Run with ``python demos/02_compare_samplers.py [m]``.
"""

import sys

from srjsample import generate
from srjsample.harness import PHASES, run_algorithm

m = int(sys.argv[1]) if len(sys.argv) > 1 else 200_000
R = generate("uniform", 10_000, seed=3).points.sorted_by_x()
S = generate("uniform", m, seed=4).points.sorted_by_x()
t = 200_000

# warm up the compiled kernels so the first row is not a compile time
for algo in ("bbst", "kds", "kds-rejection"):
    run_algorithm(algo, R, R, 100, 100, 1000)

print(f"|R| = {len(R)}, |S| = {m}, t = {t}")
print(f"{'algo':15s}" + "".join(f"{p:>16s}" for p in PHASES) + f"{'attempts/t':>12s}{'ns/sample':>11s}")
for algo in ("bbst", "kds", "kds-rejection"):
    batch, rep = run_algorithm(algo, R, S, 100, 100, t, seed=0)
    row = "".join(f"{getattr(rep, p):16.4f}" for p in PHASES)
    print(f"{algo:15s}{row}{rep.attempts / len(batch):12.3f}{rep.per_sample * 1e9:11.0f}")
