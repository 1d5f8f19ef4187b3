"""Exact evaluation of the bound chains controlling the fourth-moment mass.

Everything here is driven by the squared counts a(k', n') = |P_{k'}(n')|^2.

``composition_sum`` is the exact r-fold convolution

    sum over k_1+...+k_r = k, n_1+...+n_r = n (all parts >= 1)
        of a(k_1, n_1) ... a(k_r, n_r),

and ``composition_sum_envelope`` its closed-form upper envelope
q^{2n} (log n + LOG_SHIFT)^{2k-2r} / (n^2 ((k-r)!)^2), kept in log form
since the linear value overflows floats long before desk scale ends.

``partial_overlap_chain`` and ``full_overlap_chain`` evaluate, exactly and
in integers, the chained upper bounds on the two overlap masses that
appear when two squared partial sums share the squarefree part of a
perfect-square product:

    partial: 8 sum_{t<k} sum_{l<n} a(t,l) a(k-t,n-l)
             + 4 sum_{t<k} sum_{l<n} sum_{j<t} sum_{g<l}
                   a(k-t,n-l) a(j,g) a(t-j,l-g)
    full:    2 sum_{d<n} a(1,d) a(k-1,n-d)
             + sum_{d<n} sum_{j<=k-2} sum_{g<n-d} a(1,d) a(j,g) a(k-1-j,n-d-g)

``bound_chain_report`` assembles the three-part total (diagonal by-max
mass plus both chains) and its ratio to |P_k(n)|^2; the martingale
normality argument needs exactly this ratio to vanish.
"""

import math
import threading
from dataclasses import dataclass
from typing import NamedTuple, Optional

from .counting import LOG_SHIFT, count_Pk, count_Pk_by_maxdeg, int_log

__all__ = [
    "LogValue",
    "composition_sum",
    "composition_sum_envelope",
    "partial_overlap_chain",
    "full_overlap_chain",
    "BoundReport",
    "bound_chain_report",
]


class LogValue(NamedTuple):
    """A positive quantity stored by its natural log; value None on overflow."""

    log: float
    value: Optional[float]


_MEMO_LOCK = threading.Lock()
_COMP_MEMO = {}


def _sq(q, k, n):
    c = count_Pk(q, k, n)
    return c * c


def composition_sum(q, r, k, n):
    """Exact sum over r-part compositions of k and n of squared-count products."""
    if r < 1:
        raise ValueError("r must be >= 1")
    if k < r or n < r:
        return 0
    if r == 1:
        return _sq(q, k, n)
    key = (q, r, k, n)
    with _MEMO_LOCK:
        hit = _COMP_MEMO.get(key)
    if hit is not None:
        return hit
    total = 0
    for k1 in range(1, k - r + 2):
        for n1 in range(1, n - r + 2):
            a = _sq(q, k1, n1)
            if a:
                rest = composition_sum(q, r - 1, k - k1, n - n1)
                if rest:
                    total += a * rest
    with _MEMO_LOCK:
        _COMP_MEMO[key] = total
    return total


def composition_sum_envelope(q, r, k, n):
    """Closed-form envelope for composition_sum, valid for r <= k, n >= 2."""
    if not 1 <= r <= k:
        raise ValueError("need 1 <= r <= k")
    if n < 2:
        raise ValueError("need n >= 2")
    base = math.log(n) + LOG_SHIFT
    log_value = (
        2 * n * math.log(q)
        + (2 * k - 2 * r) * math.log(base)
        - 2 * math.log(n)
        - 2 * math.lgamma(k - r + 1)
    )
    value = math.exp(log_value) if log_value < 700.0 else None
    return LogValue(log_value, value)


def partial_overlap_chain(q, k, n):
    """Exact integer value of the chained bound on the partial-overlap mass."""
    if k < 2:
        raise ValueError("k must be >= 2")
    pair_part = 0
    triple_part = 0
    for t in range(1, k):
        for l in range(1, n):
            outer = _sq(q, k - t, n - l)
            if not outer:
                continue
            pair_part += _sq(q, t, l) * outer
            inner = 0
            for j in range(1, t):
                for g in range(1, l):
                    a = _sq(q, j, g)
                    if a:
                        b = _sq(q, t - j, l - g)
                        if b:
                            inner += a * b
            triple_part += outer * inner
    return 8 * pair_part + 4 * triple_part


def full_overlap_chain(q, k, n):
    """Exact integer value of the chained bound on the full-overlap mass."""
    if k < 2:
        raise ValueError("k must be >= 2")
    total = 0
    for d in range(1, n):
        head = _sq(q, 1, d)
        tail = 2 * _sq(q, k - 1, n - d)
        for j in range(1, k - 1):
            for g in range(1, n - d):
                a = _sq(q, j, g)
                if a:
                    b = _sq(q, k - 1 - j, n - d - g)
                    if b:
                        tail += a * b
        total += head * tail
    return total


@dataclass(frozen=True)
class BoundReport:
    """Three-part fourth-moment budget relative to |P_k(n)|^2."""

    q: int
    k: int
    n: int
    by_max_square_sum: int
    partial_overlap: int
    full_overlap: int
    total: int
    count_square: int
    ratio: float

    @property
    def log_ratio(self):
        return int_log(self.total) - int_log(self.count_square)


def bound_chain_report(q, k, n):
    """Assemble the by-max diagonal mass and both overlap chains for (q, k, n).

    The ratio of the total to |P_k(n)|^2 is reported, not asserted; the
    normality argument expects it to decay as n grows with k fixed.
    """
    if k < 2 or n < 2:
        raise ValueError("need k >= 2 and n >= 2")
    by_max = sum(count_Pk_by_maxdeg(q, k, n, d) ** 2 for d in range(1, n))
    partial = partial_overlap_chain(q, k, n)
    full = full_overlap_chain(q, k, n)
    total = by_max + partial + full
    count_sq = _sq(q, k, n)
    if count_sq == 0:
        raise ValueError(f"|P_{k}({n})| is zero for q={q}")
    return BoundReport(
        q=q,
        k=k,
        n=n,
        by_max_square_sum=by_max,
        partial_overlap=partial,
        full_overlap=full,
        total=total,
        count_square=count_sq,
        ratio=total / count_sq,
    )
