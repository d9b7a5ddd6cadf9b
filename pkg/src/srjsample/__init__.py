"""Uniform random sampling from spatial range joins without computing the join."""

from .core import AliasTable, JoinPair, Point, PointSet, RandomSource, Window, alias_build, alias_sample, window_of
from .errors import (
    AttemptLimitError,
    CorrectnessViolation,
    CSVFormatError,
    EmptyDistributionError,
    EmptyInputError,
    EmptyJoinError,
    InvalidParameterError,
    SRJError,
    TooLargeError,
)
from .grid import Grid, grid_map, neighborhood
from .bbst import build_bbst, build_index, canonical_decompose, count_corner, make_buckets, sample_corner
from .sampler import (
    SampleBatch,
    build_counting_index,
    build_structures,
    compute_upper_bound,
    enumerate_outcomes,
    iter_samples,
    sample_join,
)
from .baselines import kd_build, kd_range_count, kd_range_sample, kds_sample_join, kdsr_sample_join
from .oracle import brute_force_join, lag_independence_test, uniformity_test
from .harness import generate, load_csv, normalize_and_split, run_algorithm

__version__ = "0.1.0"
