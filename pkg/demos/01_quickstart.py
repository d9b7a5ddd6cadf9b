"""Draw uniform join samples without computing the join.

Generates a uniform dataset, splits it into R and S, and samples pairs
(r, s) with s inside the square window of half-extent 100 around r.
The brute-force join is small enough here to confirm that every sample
is a real join pair.

Run with ``python demos/01_quickstart.py``.
"""

import numpy as np

from srjsample import (
    RandomSource,
    brute_force_join,
    build_counting_index,
    build_structures,
    generate,
    normalize_and_split,
    sample_join,
)

R, S = normalize_and_split(generate("uniform", 20_000, seed=1), ratio=0.5, seed=1)
h = 100.0

# grid over S plus the two trees of every cell
structures = build_structures(R, S, h, h)
# one upper bound per r and the alias tables over them
index = build_counting_index(None, structures)
print(f"|R| = {len(R)}, |S| = {len(S)}, capacity = {structures.capacity}")
print(f"sum of upper bounds: {index.sum_mu}")

batch = sample_join(index, structures, 10_000, RandomSource(7))
print(f"drew {len(batch)} pairs in {batch.attempts} iterations "
      f"(acceptance rate {batch.acceptance_rate:.3f})")
print("first five:", batch.pairs[:5])

truth = brute_force_join(R, S, h, h)
print(f"exact join size {truth.size}; sum_mu / |J| = {index.sum_mu / truth.size:.3f}")
member = np.array([p in truth for p in batch.pairs[:2000]])
print(f"first 2000 samples all in the join: {bool(member.all())}")
