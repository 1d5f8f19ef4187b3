"""Exact arbitrary-precision counting of squarefree monic polynomials.

Counts the sets P_k(n) (squarefree monics of degree n over F_q with
exactly k distinct irreducible factors) together with the refinements by
the maximum factor degree:

    P_{k,d}(n)   -- max factor degree exactly d,
    P_{k,<=d}(n) -- max factor degree at most d.

pi_irred gives the number of monic irreducibles of degree d via the
Moebius-inverted necklace formula (1/d) sum_{e|d} mu(e) q^{d/e}.  The main
counts come from a knapsack-style dynamic program over factor degrees:
processing degrees d = 1, 2, ... in ascending order, a step chooses j >= 0
distinct irreducibles of degree d in binomial(pi_q(d), j) ways.  Stopping
the program after degree d yields every capped count P_{k,<=d}(n'), so one
pass produces the whole by-max-degree refinement; counts with exact
maximum d follow by differencing consecutive caps.

All counts are Python ints (no overflow); only the Hardy-Ramanujan bound
is a float, with a log-domain fallback when q^n exceeds the float range.
"""

import math
import threading
from math import comb
from typing import NamedTuple

__all__ = [
    "LOG_SHIFT",
    "pi_irred",
    "CountTable",
    "count_Pk",
    "count_Pk_le",
    "count_Pk_by_maxdeg",
    "squarefree_total",
    "HRBound",
    "hardy_ramanujan_bound",
    "is_prime_power",
    "int_log",
]

# Additive constant in the uniform bound (q^n/n)(log n + LOG_SHIFT)^{k-1}/(k-1)!;
# stored once so the bound, the composition-sum envelope and the factorial
# tail check can never drift apart.  Natural logarithms throughout.
LOG_SHIFT = 2.0 - math.log(2.0)


def _mobius(n):
    mu = 1
    d = 2
    while d * d <= n:
        if n % d == 0:
            n //= d
            if n % d == 0:
                return 0
            mu = -mu
        d += 1
    if n > 1:
        mu = -mu
    return mu


def pi_irred(q, d):
    """Number of monic irreducible polynomials of degree d over F_q."""
    if q < 2:
        raise ValueError("q must be >= 2")
    if d < 1:
        raise ValueError("d must be >= 1")
    total = 0
    for e in range(1, d + 1):
        if d % e == 0:
            mu = _mobius(e)
            if mu:
                total += mu * q ** (d // e)
    count, rem = divmod(total, d)
    assert rem == 0, "necklace sum not divisible by d"
    return count


def is_prime_power(q):
    """Return (p, m) with q = p^m for prime p, or None if q is no prime power."""
    if q < 2:
        return None
    for p in range(2, q + 1):
        if p * p > q:
            return (q, 1)
        if q % p:
            continue
        m, rest = 0, q
        while rest % p == 0:
            rest //= p
            m += 1
        return (p, m) if rest == 1 else None
    return None


def _apply_degree(rows, d, pi_d, n_max, k_max):
    # extend the DP state by the choice of j distinct degree-d irreducibles;
    # descending k keeps the reads on pre-update rows
    for c in range(k_max, 0, -1):
        dst = rows[c]
        for j in range(1, min(c, n_max // d) + 1):
            b = comb(pi_d, j)
            if b == 0:
                break
            off = j * d
            if c == j:
                dst[off] += b
                continue
            src = rows[c - j]
            for s in range(off + c - j, n_max + 1):
                v = src[s - off]
                if v:
                    dst[s] += b * v


class CountTable:
    """Exact counts |P_k(n)| for one q, with optional by-max-degree slices.

    With track_by_degree the DP state is snapshotted after each degree,
    which makes every capped count |P_{k,<=d}(n)| available; rows of a
    snapshot share unchanged int objects, so the memory cost stays modest.
    """

    def __init__(self, q, n_max, k_max, track_by_degree=False):
        if q < 2 or n_max < 0 or k_max < 0:
            raise ValueError("need q >= 2, n_max >= 0, k_max >= 0")
        self.q = q
        self.n_max = n_max
        self.k_max = k_max
        self.pi = (0,) + tuple(pi_irred(q, d) for d in range(1, n_max + 1))
        rows = [[0] * (n_max + 1) for _ in range(k_max + 1)]
        rows[0][0] = 1
        snaps = [] if track_by_degree else None
        for d in range(1, n_max + 1):
            _apply_degree(rows, d, self.pi[d], n_max, k_max)
            if snaps is not None:
                snaps.append([row[:] for row in rows])
        self._rows = rows
        self._snaps = snaps

    @property
    def tracks_by_degree(self):
        return self._snaps is not None

    def _check(self, k, n):
        if not 0 <= k <= self.k_max:
            raise ValueError(f"k={k} outside table range 0..{self.k_max}")
        if not 0 <= n <= self.n_max:
            raise ValueError(f"n={n} outside table range 0..{self.n_max}")

    def count(self, k, n):
        """|P_k(n)|; degree-0 conventions: |P_0(0)| = 1, |P_0(n>0)| = 0."""
        self._check(k, n)
        return self._rows[k][n]

    def count_le(self, k, n, cap):
        """|P_{k,<=cap}(n)|: all factor degrees at most cap."""
        self._check(k, n)
        if cap >= min(n, self.n_max):
            return self._rows[k][n]
        if cap < 1:
            return 1 if (k == 0 and n == 0) else 0
        if self._snaps is None:
            raise ValueError("table built without track_by_degree")
        return self._snaps[cap - 1][k][n]

    def count_eq(self, k, n, d):
        """|P_{k,d}(n)|: maximum factor degree exactly d."""
        return self.count_le(k, n, d) - self.count_le(k, n, d - 1)

    def squarefree_total(self, n):
        """Number of squarefree monics of degree n (sum over all k <= n)."""
        if n > self.k_max:
            raise ValueError("k_max too small to sum all factor counts")
        return sum(self._rows[k][n] for k in range(0, n + 1))

    def __repr__(self):
        return (
            f"CountTable(q={self.q}, n_max={self.n_max}, k_max={self.k_max}, "
            f"by_degree={self.tracks_by_degree})"
        )


# Module-level caches; tables are immutable once built, so sharing is safe.
_CACHE_LOCK = threading.Lock()
_TABLES = {}


def _bucket(k):
    b = 2
    while b < k:
        b *= 2
    return b


def _get_table(q, k, n, need_by_degree):
    key = (q, _bucket(k), need_by_degree)
    with _CACHE_LOCK:
        table = _TABLES.get(key)
        if table is None or table.n_max < n:
            grown = max(n, 64, 2 * table.n_max if table else 0)
            table = CountTable(q, grown, key[1], track_by_degree=need_by_degree)
            _TABLES[key] = table
    return table


def count_Pk(q, k, n):
    """|P_k(n)| over F_q, exact."""
    if q < 2 or k < 0 or n < 0:
        raise ValueError("need q >= 2, k >= 0, n >= 0")
    if k == 0 or n == 0:
        return 1 if k == n else 0
    if k > n:
        return 0
    return _get_table(q, k, n, False).count(k, n)


def count_Pk_le(q, k, n, cap):
    """|P_{k,<=cap}(n)|, exact."""
    if q < 2 or k < 0 or n < 0:
        raise ValueError("need q >= 2, k >= 0, n >= 0")
    if k == 0 or n == 0:
        return 1 if k == n else 0
    if k > n or cap < 1:
        return 0
    if cap >= n:
        return count_Pk(q, k, n)
    return _get_table(q, k, n, True).count_le(k, n, cap)


def count_Pk_by_maxdeg(q, k, n, d):
    """|P_{k,d}(n)|: squarefree, k factors, maximum factor degree exactly d."""
    if not 1 <= d <= n:
        raise ValueError("need 1 <= d <= n")
    return count_Pk_le(q, k, n, d) - count_Pk_le(q, k, n, d - 1)


def squarefree_total(q, n):
    """Number of squarefree monics of degree n; equals q^n - q^{n-1} for n >= 2."""
    if n == 0:
        return 1
    return sum(count_Pk(q, k, n) for k in range(1, n + 1))


class HRBound(NamedTuple):
    """Uniform factor-count bound; value is inf when q^n overflows floats."""

    value: float
    log: float
    overflow: bool


def hardy_ramanujan_bound(q, k, n):
    """Upper bound (q^n/n) (log n + LOG_SHIFT)^{k-1} / (k-1)! on |P_k(n)|.

    Returns an HRBound; ``log`` is the natural log of the bound and is
    always finite, ``value`` is the bound itself or inf with the overflow
    flag set when q^n exceeds the float range.
    """
    if q < 2 or k < 1 or n < 1:
        raise ValueError("need q >= 2, k >= 1, n >= 1")
    base = math.log(n) + LOG_SHIFT
    log_value = (
        n * math.log(q) - math.log(n) + (k - 1) * math.log(base) - math.lgamma(k)
    )
    if n * math.log2(q) < 1020.0:
        value = float(q ** n) / n * base ** (k - 1) / math.factorial(k - 1)
        return HRBound(value, log_value, False)
    return HRBound(math.inf, log_value, True)


def int_log(x):
    """Natural log of a positive int, exact to double precision at any size."""
    if x <= 0:
        raise ValueError("int_log needs a positive integer")
    return math.log(x)
