"""Fixed catalog of micro instances (|J| <= 8) for exhaustive checks."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import Point, PointSet

__all__ = ["Instance", "micro_catalog", "random_instance"]


@dataclass
class Instance:
    name: str
    R: PointSet
    S: PointSet
    hx: float
    hy: float
    capacity: Optional[int] = None


def _ps(coords, start=0) -> PointSet:
    return PointSet.from_points([Point(start + i, float(x), float(y)) for i, (x, y) in enumerate(coords)])


def _hand_built() -> list[Instance]:
    out = [
        Instance("e1", _ps([(2, 2)]), _ps([(1, 1), (3, 4), (9, 9)]), 2, 2),
        Instance("e1_two_r", _ps([(2, 2), (8, 8)]), _ps([(1, 1), (3, 4), (9, 9)]), 2, 2),
        # equal x across buckets and inside one bucket
        Instance(
            "duplicate_x",
            _ps([(2.2, 1.1)]),
            _ps([(1.5, 0.2), (1.5, 0.9), (1.5, 1.4), (1.5, 0.5), (0.7, 0.7), (1.5, 1.9)]),
            1,
            1,
            capacity=2,
        ),
        # three points in one corner cell, capacity 4: one underfull bucket
        Instance("underfull_bucket", _ps([(2.5, 2.5)]), _ps([(1.2, 1.1), (1.6, 1.9), (1.9, 1.3)]), 1, 1, capacity=4),
        Instance(
            "underfull_many",
            _ps([(5.0, 5.0)]),
            _ps([(3.9, 3.9), (4.1, 3.2), (4.2, 4.5), (4.4, 3.1), (4.6, 4.9)]),
            1,
            1,
            capacity=3,
        ),
        # points exactly on window edges and on cell boundaries
        Instance("closed_boundaries", _ps([(4, 4)]), _ps([(2, 2), (6, 6), (2, 6), (6, 2), (4, 6), (7, 7)]), 2, 2),
        Instance("rectangular_window", _ps([(5, 1)]), _ps([(4, -2), (6, 4), (5.5, 0), (3.9, 1), (4.5, 3.5)]), 1, 3),
        # coincident points with distinct ids
        Instance("coincident", _ps([(1.0, 1.0)]), _ps([(0.5, 0.5), (0.5, 0.5), (0.5, 0.5), (1.8, 1.8)]), 1, 1, capacity=2),
        # one point in each corner cell plus centre
        Instance(
            "four_corners",
            _ps([(1.5, 1.5)]),
            _ps([(0.7, 0.6), (2.3, 0.8), (0.9, 2.2), (2.4, 2.1), (1.2, 1.7), (0.1, 0.1), (2.9, 2.9)]),
            1,
            1,
        ),
        Instance(
            "edges_only",
            _ps([(1.5, 1.5)]),
            _ps([(0.6, 1.5), (2.4, 1.2), (1.5, 0.7), (1.1, 2.3), (0.2, 1.5), (2.8, 1.2)]),
            1,
            1,
        ),
        Instance("capacity_one", _ps([(1.5, 1.5), (1.7, 1.2)]), _ps([(0.7, 0.6), (0.8, 0.9), (2.2, 2.4)]), 1, 1, capacity=1),
        Instance(
            "shared_key_buckets",
            _ps([(2.1, 2.1)]),
            _ps([(1.2, 1.0), (1.2, 1.3), (1.2, 1.6), (1.2, 1.9), (1.4, 1.4), (1.4, 1.1)]),
            1,
            1,
            capacity=2,
        ),
    ]
    return out


def random_instance(seed: int, n: int, m: int, extent: float = 8.0, h: float = 1.0, integer: bool = False) -> Instance:
    rng = np.random.default_rng(seed)
    if integer:
        r = rng.integers(0, int(extent), size=(n, 2)).astype(float) / 2
        s = rng.integers(0, int(extent), size=(m, 2)).astype(float) / 2
    else:
        r = rng.uniform(0, extent, size=(n, 2))
        s = rng.uniform(0, extent, size=(m, 2))
    cap = [None, 1, 2, 3][seed % 4]
    return Instance(f"random_{seed}", PointSet.from_xy(r), PointSet.from_xy(s), h, h, capacity=cap)


def micro_catalog(max_join: int = 8, n_random: int = 40) -> list[Instance]:
    """Hand-built edge cases plus seeded random instances with ``1 <= |J| <= max_join``."""
    from .oracle import brute_force_join

    out = [inst for inst in _hand_built() if 1 <= brute_force_join(inst.R, inst.S, inst.hx, inst.hy).size <= max_join]
    seed = 0
    while len(out) < len(_hand_built()) + n_random:
        inst = random_instance(seed, n=1 + seed % 3, m=4 + seed % 9, integer=seed % 2 == 0)
        size = brute_force_join(inst.R, inst.S, inst.hx, inst.hy).size
        if 1 <= size <= max_join:
            out.append(inst)
        seed += 1
    return out
