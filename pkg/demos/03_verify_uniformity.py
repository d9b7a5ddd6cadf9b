"""Check uniformity two ways on a tiny instance.

1. Exact: enumerate every branch of one sampling iteration and read off
   the probability of each join pair. All of them equal 1 / sum_mu.
2. Statistical: draw many samples and compare the empirical distribution
   with uniform by total-variation distance and a chi-square test.

Run with ``python demos/03_verify_uniformity.py``.
"""

from srjsample import RandomSource, brute_force_join, build_counting_index, build_structures, sample_join
from srjsample.catalog import micro_catalog
from srjsample.oracle import null_tv_quantile, uniformity_test
from srjsample.sampler import enumerate_outcomes

inst = next(i for i in micro_catalog() if i.name == "duplicate_x")
st = build_structures(inst.R, inst.S, inst.hx, inst.hy, inst.capacity)
idx = build_counting_index(None, st)
truth = brute_force_join(inst.R, inst.S, inst.hx, inst.hy)

accepted, rejected = enumerate_outcomes(idx, st)
print(f"instance {inst.name}: |J| = {truth.size}, sum_mu = {idx.sum_mu}, capacity = {st.capacity}")
for (i, j), p in sorted(accepted.items()):
    print(f"  pair ({st.r_points.ids[i]}, {st.grid.points.ids[j]}): p = {p:.6f}  (1/sum_mu = {1 / idx.sum_mu:.6f})")
print(f"  rejection probability {rejected:.6f}, i.e. 1 - |J|/sum_mu = {1 - truth.size / idx.sum_mu:.6f}")

draws = 100_000
batch = sample_join(idx, st, draws, RandomSource(11))
rep = uniformity_test(batch, truth)
limit = max(0.02, null_tv_quantile(truth.size, draws, q=0.999, reps=2000))
print(f"{draws} draws: TV = {rep.tv_distance:.4f} (limit {limit:.4f}), chi-square p = {rep.p_value:.3f}")
