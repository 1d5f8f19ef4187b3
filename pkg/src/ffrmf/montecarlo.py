"""Monte Carlo sampling of normalized partial sums of random +-1 functions.

A trial draws one sign assignment f(P) in {+1, -1} for every irreducible
P, evaluates S = sum over P_k(n) of the product of factor signs, and
records S / sqrt(|P_k(n)|).  Signs are counter-based: a fixed 64-bit mix
of (seed, trial, irreducible rank) yields one bit, so any trial can be
generated independently of the others, batches can run on any number of
threads, and identical inputs give bit-identical results everywhere.

Per-trial work is vectorized: the support P_k(n) is enumerated once and
stored as a matrix of factor ranks; a batch of trials then needs one sign
matrix, one gather per factor slot and one segmented reduction for the
decomposition of S by maximum factor degree.  All moment accumulation is
in exact integers; floats appear only in the final statistics.
"""

import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np
from scipy.special import erfc

from .counting import is_prime_power
from .errors import ResourceBudgetError
from .polyfield import cached_irreducible_table, enumerate_Pkn, make_field

__all__ = [
    "DEFAULT_SEED",
    "SignAssignment",
    "derive_signs",
    "evaluate_sums",
    "SampleStats",
    "run_experiment",
    "ks_normal",
    "HISTOGRAM_BINS",
    "HISTOGRAM_RANGE",
]

DEFAULT_SEED = 0xF1E1D5
HISTOGRAM_BINS = 101
HISTOGRAM_RANGE = (-5.0, 5.0)
MAX_SUPPORT = 1_000_000

_U = np.uint64
_M1 = _U(0xBF58476D1CE4E5B9)
_M2 = _U(0x94D049BB133111EB)
_GOLD = 0x9E3779B97F4A7C15


def _finalize(x):
    # splitmix64 finalizer, applied twice for margin on structured input
    for _ in range(2):
        x = (x ^ (x >> _U(30))) * _M1
        x = (x ^ (x >> _U(27))) * _M2
        x = x ^ (x >> _U(31))
    return x


def _mix_seed(seed):
    x = (int(seed) + _GOLD) % (1 << 64)
    for _ in range(2):
        x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) % (1 << 64)
        x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) % (1 << 64)
        x ^= x >> 31
    return _U(x)


def _sign_matrix(seed, trial_lo, trial_hi, n_ranks):
    """Signs (+-1 int8) for trials [trial_lo, trial_hi) x ranks [0, n_ranks)."""
    trials = np.arange(trial_lo, trial_hi, dtype=np.uint64)
    ranks = np.arange(n_ranks, dtype=np.uint64)
    x = (trials[:, None] << _U(32)) ^ ranks[None, :] ^ _mix_seed(seed)
    bits = (_finalize(x) >> _U(63)).astype(np.int8)
    return (bits << 1) - 1


class SignAssignment:
    """One realization of f on the irreducibles of a table.

    Values are +-1, a pure function of (seed, trial, irreducible rank).
    """

    __slots__ = ("table", "seed", "trial", "values")

    def __init__(self, table, seed, trial, values):
        self.table = table
        self.seed = seed
        self.trial = trial
        self.values = values

    def __getitem__(self, iid):
        return int(self.values[self.table.rank(iid)])

    def __len__(self):
        return len(self.values)


def derive_signs(seed, trial, table):
    """Deterministic sign assignment for every irreducible in the table."""
    n_ranks = table.count_up_to(table.max_degree)
    values = _sign_matrix(seed, trial, trial + 1, n_ranks)[0]
    values.flags.writeable = False
    return SignAssignment(table, seed, trial, values)


def evaluate_sums(assignment, elements):
    """Exact S = sum of factor-sign products, and its split by max degree.

    Returns (S, by_degree) where by_degree[d] sums the terms whose largest
    factor degree is d; the values add up to S exactly.
    """
    table = assignment.table
    values = assignment.values
    total = 0
    by_degree = {}
    for fs in elements:
        v = 1
        for iid in fs.factors:
            v *= int(values[table.rank(iid)])
        total += v
        by_degree[fs.pmax] = by_degree.get(fs.pmax, 0) + v
    return total, by_degree


@dataclass
class SampleStats:
    """Summary of one experiment; exact integer power sums plus float stats."""

    q: int
    k: int
    n: int
    trials: int
    count: int                      # |P_k(n)|
    mean: float
    variance: float
    skewness: float
    excess_kurtosis: float
    ks_distance: float
    histogram: np.ndarray           # underflow + 101 bins on [-5, 5] + overflow
    bin_edges: np.ndarray
    per_d_variance: dict            # d -> mean(S_d^2) / |P_k(n)|
    power_sums: tuple               # exact (sum S, sum S^2, sum S^3, sum S^4)
    per_d_square_sums: dict         # d -> exact sum over trials of S_d^2
    samples: Optional[np.ndarray] = None


def ks_normal(samples):
    """Kolmogorov-Smirnov distance to the standard normal CDF.

    The normal CDF is evaluated as erfc(-x/sqrt(2))/2, accurate to double
    precision.  Needs at least 100 samples.
    """
    samples = np.asarray(samples, dtype=np.float64)
    m = samples.size
    if m < 100:
        raise ValueError(f"need at least 100 samples, got {m}")
    xs = np.sort(samples)
    cdf = 0.5 * erfc(-xs / math.sqrt(2.0))
    grid = np.arange(1, m + 1, dtype=np.float64) / m
    d_plus = float(np.max(grid - cdf))
    d_minus = float(np.max(cdf - (grid - 1.0 / m)))
    return max(d_plus, d_minus)


def _batch_ranges(trials, batch_size):
    return [(lo, min(lo + batch_size, trials)) for lo in range(0, trials, batch_size)]


_TABLE_LOCK = threading.Lock()
_TABLE_CACHE = {}


def _shared_table(pm, depth, cache_dir=None):
    # tables are immutable; reuse across experiments in one process
    key = (pm, depth)
    with _TABLE_LOCK:
        table = _TABLE_CACHE.get(key)
        if table is None:
            table = cached_irreducible_table(make_field(*pm), depth, cache_dir)
            _TABLE_CACHE[key] = table
    return table


def run_experiment(
    q,
    k,
    n,
    trials,
    seed=DEFAULT_SEED,
    *,
    threads=1,
    batch_size=2048,
    keep_samples=False,
    max_support=MAX_SUPPORT,
    cache_dir=None,
):
    """Sample S / sqrt(|P_k(n)|) over the given number of trials.

    Results are a pure function of (q, k, n, trials, seed): the trial
    accumulators are exact integers merged in fixed batch order, so the
    thread count and batch size cannot change any output bit.
    """
    pm = is_prime_power(q)
    if pm is None:
        raise ValueError(f"q={q} is not a prime power")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    depth = n if k == 1 else n - k + 1
    table = _shared_table(pm, depth, cache_dir)
    elements = enumerate_Pkn(k, n, table)
    count = len(elements)
    if count == 0:
        raise ValueError(f"empty support: P_{k}({n}) over F_{q} has no elements")
    if count > max_support:
        raise ResourceBudgetError(f"support size {count} exceeds {max_support}")

    # sort the support by maximum factor degree for segmented reduction
    order = sorted(range(count), key=lambda i: elements[i].pmax)
    idx = np.empty((count, k), dtype=np.intp)
    pmax_sorted = np.empty(count, dtype=np.int64)
    for row, i in enumerate(order):
        fs = elements[i]
        pmax_sorted[row] = fs.pmax
        for j, iid in enumerate(fs.factors):
            idx[row, j] = table.rank(iid)
    d_values = sorted(set(int(d) for d in pmax_sorted))
    starts = np.searchsorted(pmax_sorted, np.array(d_values))
    n_ranks = table.count_up_to(depth)

    def one_batch(lo, hi):
        signs = _sign_matrix(seed, lo, hi, n_ranks)
        prod = signs[:, idx[:, 0]].copy()
        for j in range(1, k):
            prod *= signs[:, idx[:, j]]
        seg = np.add.reduceat(prod.astype(np.int32), starts, axis=1)
        s = seg.sum(axis=1, dtype=np.int64)
        direct = prod.sum(axis=1, dtype=np.int64)
        if not np.array_equal(s, direct):
            raise AssertionError("degree decomposition does not add up to S")
        s2 = s * s
        sums = (
            int(s.sum()),
            int(s2.sum()),
            int((s2 * s).sum()),
            int((s2 * s2).sum()),
        )
        seg64 = seg.astype(np.int64)
        per_d = [int(v) for v in (seg64 * seg64).sum(axis=0)]
        return s, sums, per_d

    ranges = _batch_ranges(trials, batch_size)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda r: one_batch(*r), ranges))
    else:
        results = [one_batch(lo, hi) for lo, hi in ranges]

    samples = np.empty(trials, dtype=np.float64)
    power_sums = [0, 0, 0, 0]
    per_d_sq = [0] * len(d_values)
    root = math.sqrt(count)
    for (lo, hi), (s, sums, per_d) in zip(ranges, results):
        samples[lo:hi] = s / root
        for i in range(4):
            power_sums[i] += sums[i]
        for i in range(len(d_values)):
            per_d_sq[i] += per_d[i]

    t = trials
    m1 = Fraction(power_sums[0], t)
    c2 = Fraction(power_sums[1], t) - m1 * m1
    c3 = Fraction(power_sums[2], t) - 3 * m1 * Fraction(power_sums[1], t) + 2 * m1 ** 3
    c4 = (
        Fraction(power_sums[3], t)
        - 4 * m1 * Fraction(power_sums[2], t)
        + 6 * m1 * m1 * Fraction(power_sums[1], t)
        - 3 * m1 ** 4
    )
    mean = float(m1) / root
    variance = float(c2) / count
    if c2 > 0:
        skewness = float(c3) / float(c2) ** 1.5
        excess_kurtosis = float(c4) / float(c2) ** 2 - 3.0
    else:
        skewness = math.nan
        excess_kurtosis = math.nan

    inner, edges = np.histogram(samples, bins=HISTOGRAM_BINS, range=HISTOGRAM_RANGE)
    under = int(np.count_nonzero(samples < HISTOGRAM_RANGE[0]))
    over = int(np.count_nonzero(samples > HISTOGRAM_RANGE[1]))
    histogram = np.concatenate(([under], inner, [over])).astype(np.int64)

    per_d_variance = {
        d: (per_d_sq[i] / t) / count for i, d in enumerate(d_values)
    }
    return SampleStats(
        q=q,
        k=k,
        n=n,
        trials=trials,
        count=count,
        mean=mean,
        variance=variance,
        skewness=skewness,
        excess_kurtosis=excess_kurtosis,
        ks_distance=ks_normal(samples),
        histogram=histogram,
        bin_edges=edges,
        per_d_variance=per_d_variance,
        power_sums=tuple(power_sums),
        per_d_square_sums={d: per_d_sq[i] for i, d in enumerate(d_values)},
        samples=samples if keep_samples else None,
    )
