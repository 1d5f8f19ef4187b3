"""Brute-force exact computation of the moment quantities, at desk scale.

For a random +-1 multiplicative function f, the partial sum over P_k(n)
decomposes by maximum factor degree into S_d, and every mixed moment
E[S_d^2 S_e^2] is a pure counting problem: expanding the product, a
quadruple (W, X, Y, Z) contributes 1 exactly when W*X*Y*Z is a perfect
square, i.e. when the XOR of the factor characteristic vectors vanishes.
``pair_parity_census`` turns that quadruple count into a meet-in-the-middle
pass over ordered pairs, and ``exact_mixed_moment`` contracts two censuses.

``partial_overlap_count`` and ``full_overlap_count`` are literal
transcriptions of the two structured sums that bound the non-diagonal
quadruples: pairs sharing a squarefree part M (with divisor sums running
over subsets of M's factors), and, in the equal-degree case, pairs of
degree-d irreducibles spliced onto a common remainder M'.  They exist to
be unarguably correct, not fast.

The verify_* helpers check the moment inequality

    E[S_d^2 S_e^2] <= |P_{k,d}(n)| |P_{k,e}(n)| + partial + full

for every (d, e), the gcd-decomposition divisor bound, and the three
martingale normality conditions; ``exhaustive_moments`` recomputes the
first moments over the full sign-assignment space as a cross-oracle.
"""

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import NamedTuple
from weakref import WeakKeyDictionary

from .counting import count_Pk
from .errors import ResourceBudgetError, VerificationError
from .polyfield import enumerate_Pkn

__all__ = [
    "parity_key",
    "pair_parity_census",
    "exact_mixed_moment",
    "partial_overlap_count",
    "full_overlap_count",
    "MomentReport",
    "verify_mixed_moment_bound",
    "verify_divisor_pair_bound",
    "McLeishReport",
    "mcleish_report",
    "ExhaustiveMoments",
    "exhaustive_moments",
]

MAX_CENSUS_SET = 200_000
MAX_ASSIGNMENTS = 1 << 24

_SET_CACHE = WeakKeyDictionary()


def _sets(table, k, n, cap=None):
    # memoized P_{k,<=cap}(n) enumerations per table
    per_table = _SET_CACHE.setdefault(table, {})
    key = (k, n, cap if cap is not None and cap < n else None)
    hit = per_table.get(key)
    if hit is None:
        if k < 1 or n < k:
            hit = ()
        else:
            hit = tuple(enumerate_Pkn(k, n, table, max_degree_cap=key[2]))
        per_table[key] = hit
    return hit


def _sets_eq(table, k, n, d):
    # P_{k,d}(n): capped enumeration filtered to maximum degree exactly d
    return tuple(fs for fs in _sets(table, k, n, d) if fs.pmax == d)


def parity_key(fs, table):
    """Characteristic bit vector of a FactorSet, indexed by global rank."""
    key = 0
    for iid in fs.factors:
        key |= 1 << table.rank(iid)
    return key


def pair_parity_census(table, elements, *, max_set_size=MAX_CENSUS_SET):
    """Map each XOR key to the number of ordered pairs producing it.

    For elements F, G of the given collection, the XOR of their parity
    keys is zero exactly when F*G is a perfect square (here: F == G, as
    the elements are distinct squarefree polynomials).
    """
    if len(elements) > max_set_size:
        raise ResourceBudgetError(
            f"census set size {len(elements)} exceeds budget {max_set_size}"
        )
    keys = [parity_key(fs, table) for fs in elements]
    census = {}
    for ka in keys:
        for kb in keys:
            x = ka ^ kb
            census[x] = census.get(x, 0) + 1
    return census


_CENSUS_CACHE = WeakKeyDictionary()


def _census_eq(table, k, n, d, max_set_size):
    per_table = _CENSUS_CACHE.setdefault(table, {})
    key = (k, n, d)
    hit = per_table.get(key)
    if hit is None:
        hit = pair_parity_census(
            table, _sets_eq(table, k, n, d), max_set_size=max_set_size
        )
        per_table[key] = hit
    return hit


def exact_mixed_moment(table, k, n, d, e, *, max_set_size=MAX_CENSUS_SET):
    """E[S_d^2 S_e^2]: quadruples over P_{k,d}(n) x P_{k,e}(n) forming squares."""
    cd = _census_eq(table, k, n, d, max_set_size)
    if not cd:
        return 0
    if d == e:
        return sum(c * c for c in cd.values())
    ce = _census_eq(table, k, n, e, max_set_size)
    if len(ce) < len(cd):
        cd, ce = ce, cd
    return sum(c * ce.get(x, 0) for x, c in cd.items())


def _divisor_subsets(m_set, size, degree):
    # divisors of the squarefree M with the given factor count and degree
    if size == 0:
        return [()] if degree == 0 else []
    return [
        sub
        for sub in combinations(m_set.factors, size)
        if sum(f.degree for f in sub) == degree
    ]


def partial_overlap_count(table, k, d, e, n):
    """Exact partial-overlap quadruple bound term, by literal enumeration.

    Sums over t < k, l < n, squarefree M with 2t factors of degree 2l all
    of degree <= min(d, e), divisors A, B of M with t factors of degree l,
    and cofactors U, V (capped at d resp. e) whose joined maximum factor
    degree with A resp. B is exactly d resp. e.
    """
    m_cap = min(d, e)
    total = 0
    for t in range(1, k):
        for l in range(1, n):
            m_list = _sets(table, 2 * t, 2 * l, m_cap)
            if not m_list:
                continue
            u_list = _sets(table, k - t, n - l, d)
            v_list = _sets(table, k - t, n - l, e)
            u_all = len(u_list)
            u_top = sum(1 for u in u_list if u.pmax == d)
            v_all = len(v_list)
            v_top = sum(1 for v in v_list if v.pmax == e)
            if (u_all == 0) or (v_all == 0):
                continue
            for m in m_list:
                halves = _divisor_subsets(m, t, l)
                if not halves:
                    continue
                cnt_au = 0
                cnt_bv = 0
                # A and B range over the same divisor list independently,
                # so the two sums can share one pass
                for sub in halves:
                    sub_pmax = max(f.degree for f in sub)
                    # P+(UA) = d needs A or U to reach d; A already has <= d
                    cnt_au += u_all if sub_pmax == d else u_top
                    cnt_bv += v_all if sub_pmax == e else v_top
                total += cnt_au * cnt_bv
    return total


def full_overlap_count(table, k, d, n, *, distinct_pairs=True):
    """Exact full-overlap quadruple bound term for equal maximum degree d.

    Ordered pairs (P, Q) of degree-d irreducibles times the number of
    (M', A', B') with M' squarefree of degree 2n-2d with 2k-2 factors and
    A', B' divisors of M' with k-1 factors of degree n-d.  The displayed
    sum leaves the (P, Q) range ambiguous, so both readings are offered:
    distinct ordered pairs (matching the derivation) or all ordered pairs.
    """
    pi_d = table.pi(d)
    pairs = pi_d * (pi_d - 1) if distinct_pairs else pi_d * pi_d
    if pairs == 0:
        return 0
    if k == 1:
        return pairs if d == n else 0
    if n - d < k - 1:
        return 0
    inner = 0
    for m2 in _sets(table, 2 * k - 2, 2 * n - 2 * d):
        c = len(_divisor_subsets(m2, k - 1, n - d))
        inner += c * c
    return pairs * inner


@dataclass(frozen=True)
class MomentReport:
    """One (d, e) instance of the mixed-moment inequality, all terms exact."""

    q: int
    k: int
    n: int
    d: int
    e: int
    mixed: int
    bound_main: int
    partial_overlap: int
    full_overlap_distinct: int
    full_overlap_all_pairs: int
    passed: bool

    @property
    def bound_total(self):
        return self.bound_main + self.partial_overlap + self.full_overlap_distinct


def verify_mixed_moment_bound(table, k, n, *, strict=True, max_set_size=MAX_CENSUS_SET):
    """Check E[S_d^2 S_e^2] <= main + partial + full for all 1 <= d, e <= n-1.

    The asserted bound uses the distinct-pairs reading of the full-overlap
    term; the all-pairs value is reported alongside.  With strict=True a
    violation raises VerificationError carrying the offending reports.
    """
    q = table.q
    reports = []
    for d in range(1, n):
        nd = len(_sets_eq(table, k, n, d))
        for e in range(1, n):
            ne = len(_sets_eq(table, k, n, e))
            mixed = exact_mixed_moment(table, k, n, d, e, max_set_size=max_set_size)
            partial = partial_overlap_count(table, k, d, e, n)
            if d == e:
                full_distinct = full_overlap_count(table, k, d, n, distinct_pairs=True)
                full_all = full_overlap_count(table, k, d, n, distinct_pairs=False)
            else:
                full_distinct = full_all = 0
            bound_main = nd * ne
            passed = mixed <= bound_main + partial + full_distinct
            reports.append(
                MomentReport(
                    q=q, k=k, n=n, d=d, e=e,
                    mixed=mixed,
                    bound_main=bound_main,
                    partial_overlap=partial,
                    full_overlap_distinct=full_distinct,
                    full_overlap_all_pairs=full_all,
                    passed=passed,
                )
            )
    bad = [r for r in reports if not r.passed]
    if strict and bad:
        worst = bad[0]
        raise VerificationError(
            f"mixed moment bound violated at (d={worst.d}, e={worst.e}): "
            f"{worst.mixed} > {worst.bound_total}",
            failures=bad,
        )
    return reports


def verify_divisor_pair_bound(table, t, l, *, strict=True):
    """Check the gcd-decomposition bound on divisor pairs of squarefree M.

    lhs counts, over squarefree M of degree 2l with 2t factors, ordered
    pairs of divisors with t factors of degree l each; rhs is
    2 |P_t(l)|^2 + sum_{j<t} sum_{g<l} |P_j(g)|^2 |P_{t-j}(l-g)|^2.
    Returns (lhs, rhs).
    """
    q = table.q
    lhs = 0
    for m in _sets(table, 2 * t, 2 * l):
        c = len(_divisor_subsets(m, t, l))
        lhs += c * c
    rhs = 2 * count_Pk(q, t, l) ** 2
    for j in range(1, t):
        for g in range(1, l):
            rhs += count_Pk(q, j, g) ** 2 * count_Pk(q, t - j, l - g) ** 2
    if strict and lhs > rhs:
        raise VerificationError(
            f"divisor pair bound violated at (t={t}, l={l}): {lhs} > {rhs}",
            failures=[(t, l, lhs, rhs)],
        )
    return lhs, rhs


class McLeishReport(NamedTuple):
    """Exact values of the three martingale normality conditions at (q, k, n)."""

    q: int
    k: int
    n: int
    variance_sum: Fraction        # sum_d |P_{k,d}|/|P_k|; must be exactly 1
    fourth_moment_sum: int        # sum_d E[S_d^4]
    fourth_moment_ratio: float    # ... / |P_k|^2; must decay in n
    cross_moment_sum: int         # sum_{d != e} E[S_d^2 S_e^2]
    cross_moment_ratio: float     # ... / |P_k|^2; bounded by 1 + o(1)


def mcleish_report(table, k, n, *, max_set_size=MAX_CENSUS_SET):
    """Evaluate the three martingale CLT conditions exactly at (q, k, n)."""
    q = table.q
    total = count_Pk(q, k, n)
    if total == 0:
        raise ValueError(f"|P_{k}({n})| is zero for q={q}")
    by_d = {d: len(_sets_eq(table, k, n, d)) for d in range(1, n)}
    variance_sum = Fraction(sum(by_d.values()), total)
    fourth = 0
    cross = 0
    for d in range(1, n):
        for e in range(1, n):
            if by_d[d] == 0 or by_d[e] == 0:
                continue
            m = exact_mixed_moment(table, k, n, d, e, max_set_size=max_set_size)
            if d == e:
                fourth += m
            else:
                cross += m
    total_sq = total * total
    return McLeishReport(
        q=q,
        k=k,
        n=n,
        variance_sum=variance_sum,
        fourth_moment_sum=fourth,
        fourth_moment_ratio=fourth / total_sq,
        cross_moment_sum=cross,
        cross_moment_ratio=cross / total_sq,
    )


class ExhaustiveMoments(NamedTuple):
    """Exact moments of S over the full sign-assignment space."""

    mean: Fraction
    second: Fraction
    fourth: Fraction


def exhaustive_moments(table, k, n, *, max_assignments=MAX_ASSIGNMENTS):
    """E[S], E[S^2], E[S^4] by enumerating every sign assignment.

    Only irreducibles that can divide an element of P_k(n) matter (degree
    at most n-k+1, or n when k = 1), so the assignment space is 2^R over
    those R irreducibles.  Exact rationals are returned.
    """
    top_degree = n if k == 1 else n - k + 1
    n_ranks = table.count_up_to(top_degree)
    if 1 << n_ranks > max_assignments:
        raise ResourceBudgetError(
            f"2**{n_ranks} sign assignments exceed budget {max_assignments}"
        )
    keys = [parity_key(fs, table) for fs in _sets(table, k, n)]
    s1 = s2 = s4 = 0
    for mask in range(1 << n_ranks):
        s = 0
        for key in keys:
            s += 1 - (((mask & key).bit_count() & 1) << 1)
        s1 += s
        ss = s * s
        s2 += ss
        s4 += ss * ss
    denom = 1 << n_ranks
    return ExhaustiveMoments(
        Fraction(s1, denom), Fraction(s2, denom), Fraction(s4, denom)
    )
