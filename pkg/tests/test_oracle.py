from fractions import Fraction
from itertools import product as iproduct

import pytest

from ffrmf.counting import count_Pk, count_Pk_by_maxdeg
from ffrmf.errors import ResourceBudgetError
from ffrmf.oracle import (
    exact_mixed_moment,
    exhaustive_moments,
    full_overlap_count,
    mcleish_report,
    pair_parity_census,
    parity_key,
    partial_overlap_count,
    verify_divisor_pair_bound,
    verify_mixed_moment_bound,
)
from ffrmf.polyfield import enumerate_Pkn


def _eq_set(table, k, n, d):
    return [fs for fs in enumerate_Pkn(k, n, table, max_degree_cap=d) if fs.pmax == d]


class TestParityCensus:
    def test_p23_census(self, table2):
        elements = enumerate_Pkn(2, 3, table2)
        census = pair_parity_census(table2, elements)
        a, b = (parity_key(fs, table2) for fs in elements)
        assert census == {0: 2, a ^ b: 2}

    def test_singleton(self, table2):
        elements = enumerate_Pkn(2, 3, table2)[:1]
        assert pair_parity_census(table2, elements) == {0: 1}

    def test_values_sum_to_square(self, table2):
        elements = enumerate_Pkn(2, 6, table2)
        census = pair_parity_census(table2, elements)
        assert sum(census.values()) == len(elements) ** 2

    def test_budget_guard(self, table2):
        elements = enumerate_Pkn(2, 6, table2)
        with pytest.raises(ResourceBudgetError):
            pair_parity_census(table2, elements, max_set_size=3)

    def test_xor_key_of_product(self, table2):
        # key(F) ^ key(G) clears exactly the shared factors
        f, g = enumerate_Pkn(2, 3, table2)
        shared = set(f.factors) & set(g.factors)
        combined = parity_key(f, table2) ^ parity_key(g, table2)
        assert combined.bit_count() == len(set(f.factors) ^ set(g.factors))
        assert shared  # the degree-2 irreducible is common to both


class TestExactMixedMoment:
    def test_worked_fourth_moment(self, table2):
        assert exact_mixed_moment(table2, 2, 3, 2, 2) == 8

    def test_empty_set_gives_zero(self, table2):
        assert exact_mixed_moment(table2, 2, 3, 1, 2) == 0

    def test_symmetry(self, table2):
        for d, e in iproduct(range(1, 6), repeat=2):
            assert exact_mixed_moment(table2, 2, 6, d, e) == exact_mixed_moment(
                table2, 2, 6, e, d
            )

    def test_diagonal_lower_bound(self, table2):
        # W = X, Y = Z quadruples alone give |P_{k,d}|^2
        for d in range(1, 8):
            nd = len(_eq_set(table2, 2, 8, d))
            assert exact_mixed_moment(table2, 2, 8, d, d) >= nd * nd

    def test_census_diagonal_equals_count(self, table2):
        for k, n in [(2, 6), (3, 7), (2, 8)]:
            elements = enumerate_Pkn(k, n, table2)
            census = pair_parity_census(table2, elements)
            assert census.get(0, 0) == len(elements) == count_Pk(2, k, n)

    def test_against_exhaustive_sign_enumeration(self, table2):
        # direct E[S_d^2 S_e^2] over all sign assignments, q=2, n <= 6
        k, n = 2, 6
        top = table2.count_up_to(n - 1)
        sets = {d: _eq_set(table2, k, n, d) for d in range(1, n)}
        keys = {
            d: [parity_key(fs, table2) for fs in sets[d]] for d in range(1, n)
        }
        for d, e in iproduct(range(1, n), repeat=2):
            total = 0
            for mask in range(1 << top):
                sd = sum(
                    1 - (((mask & key).bit_count() & 1) << 1) for key in keys[d]
                )
                se = sum(
                    1 - (((mask & key).bit_count() & 1) << 1) for key in keys[e]
                )
                total += sd * sd * se * se
            expected = Fraction(total, 1 << top)
            assert expected == exact_mixed_moment(table2, k, n, d, e), (d, e)


class TestOverlapCounts:
    def test_worked_partial_case(self, table2):
        assert partial_overlap_count(table2, 2, 2, 2, 3) == 4

    def test_partial_zero_when_sets_empty(self, table2):
        # d > n-1 leaves P_{k,d}(n) empty, and the overlap term vanishes too
        assert partial_overlap_count(table2, 2, 4, 4, 4) == 0

    def test_partial_symmetry(self, table2):
        for d, e in iproduct(range(1, 6), repeat=2):
            assert partial_overlap_count(table2, 2, d, e, 6) == partial_overlap_count(
                table2, 2, e, d, 6
            )

    def test_worked_full_case_both_readings(self, table2):
        assert full_overlap_count(table2, 2, 2, 3, distinct_pairs=True) == 0
        assert full_overlap_count(table2, 2, 2, 3, distinct_pairs=False) == 4

    def test_full_zero_at_top_degree(self, table2):
        for k in (2, 3):
            assert full_overlap_count(table2, k, 6, 6) == 0

    def test_all_pairs_dominates_distinct(self, table2):
        for k, n in [(2, 5), (2, 6), (3, 6)]:
            for d in range(1, n):
                allp = full_overlap_count(table2, k, d, n, distinct_pairs=False)
                dist = full_overlap_count(table2, k, d, n, distinct_pairs=True)
                assert allp >= dist


class TestMixedMomentBound:
    @pytest.mark.parametrize("k,n", [(2, 3), (2, 5), (3, 6)])
    def test_bound_holds(self, table2, k, n):
        reports = verify_mixed_moment_bound(table2, k, n)
        assert reports and all(r.passed for r in reports)

    def test_bound_holds_under_all_pairs_reading_too(self, table2):
        for k, n in [(2, 5), (3, 6)]:
            for r in verify_mixed_moment_bound(table2, k, n):
                assert r.mixed <= (
                    r.bound_main + r.partial_overlap + r.full_overlap_all_pairs
                )

    def test_worked_instance_is_tight(self, table2):
        reports = verify_mixed_moment_bound(table2, 2, 3)
        r = next(r for r in reports if (r.d, r.e) == (2, 2))
        assert (r.mixed, r.bound_main, r.partial_overlap, r.full_overlap_distinct) == (
            8, 4, 4, 0
        )
        assert r.full_overlap_all_pairs == 4

    def test_chains_dominate_brute_sums(self, table2):
        # the integer chain bounds are upper bounds for the summed exact terms
        from ffrmf.bounds import full_overlap_chain, partial_overlap_chain

        for k, n in [(2, 5), (2, 6), (3, 6)]:
            i_total = sum(
                partial_overlap_count(table2, k, d, e, n)
                for d in range(1, n)
                for e in range(1, n)
            )
            assert i_total <= partial_overlap_chain(2, k, n)
            for distinct in (True, False):
                j_total = sum(
                    full_overlap_count(table2, k, d, n, distinct_pairs=distinct)
                    for d in range(1, n)
                )
                assert j_total <= full_overlap_chain(2, k, n)


class TestDivisorPairBound:
    def test_worked_case(self, table2):
        assert verify_divisor_pair_bound(table2, 1, 1) == (4, 8)

    def test_t1_rhs_form(self, table2):
        for l in range(1, 5):
            lhs, rhs = verify_divisor_pair_bound(table2, 1, l)
            assert rhs == 2 * count_Pk(2, 1, l) ** 2
            assert lhs <= rhs

    @pytest.mark.parametrize("t", [1, 2, 3])
    def test_sweep(self, table2, t):
        for l in range(1, 7):
            lhs, rhs = verify_divisor_pair_bound(table2, t, l)
            assert lhs <= rhs


class TestMcLeish:
    def test_variance_sum_exact_one(self, table2):
        for k, n in [(2, 3), (2, 6), (2, 9), (3, 5), (3, 8)]:
            rep = mcleish_report(table2, k, n)
            assert rep.variance_sum == 1

    def test_worked_values(self, table2):
        rep = mcleish_report(table2, 2, 3)
        assert rep.fourth_moment_sum == 8
        assert rep.fourth_moment_ratio == 2.0
        assert rep.cross_moment_sum == 0

    def test_fourth_moment_ratio_decreases(self, table2):
        ratios = [mcleish_report(table2, 2, n).fourth_moment_ratio for n in (6, 8, 10)]
        assert ratios[0] > ratios[1] > ratios[2]

    def test_cross_moment_structure_at_k2(self, table2):
        # at k = 2 every cross moment factorizes: E[S_d^2 S_e^2] = N_d N_e,
        # so the cross ratio is exactly 1 - sum_d (N_d/N)^2 and climbs
        # toward its martingale limit 1 from below
        values = []
        for n in (6, 8, 10):
            rep = mcleish_report(table2, 2, n)
            total = count_Pk(2, 2, n)
            diag = sum(
                count_Pk_by_maxdeg(2, 2, n, d) ** 2 for d in range(1, n)
            )
            assert Fraction(rep.cross_moment_sum, total * total) == 1 - Fraction(
                diag, total * total
            )
            values.append(rep.cross_moment_ratio)
        assert values[0] < values[1] < values[2] < 1


class TestExhaustiveMoments:
    def test_mean_zero_and_variance_count(self, table2):
        mom = exhaustive_moments(table2, 2, 6)
        assert mom.mean == 0
        assert mom.second == 16 == count_Pk(2, 2, 6)

    def test_fourth_matches_census(self, table2):
        mom = exhaustive_moments(table2, 2, 3)
        assert mom.fourth == 8

    def test_full_fourth_moment_cross_oracle(self, table2):
        # census over the whole support vs the sign-space enumeration
        for k, n in [(2, 5), (2, 6), (3, 6)]:
            elements = enumerate_Pkn(k, n, table2)
            census = pair_parity_census(table2, elements)
            quadruples = sum(c * c for c in census.values())
            assert exhaustive_moments(table2, k, n).fourth == quadruples

    def test_budget_guard(self, table2):
        with pytest.raises(ResourceBudgetError):
            exhaustive_moments(table2, 2, 6, max_assignments=2 ** 10)

    def test_martingale_conditional_means_vanish(self, table2):
        # fixing the signs below degree d and averaging over the rest
        # kills S_d exactly, for every d: the filtration structure
        for k, n in [(2, 5), (2, 6), (3, 6)]:
            top = table2.count_up_to(n - 1)
            for d in range(1, n):
                keys = [
                    parity_key(fs, table2) for fs in _eq_set(table2, k, n, d)
                ]
                if not keys:
                    continue
                low = table2.count_up_to(d - 1)
                high = top - low
                for low_mask in range(1 << low):
                    total = 0
                    for high_mask in range(1 << high):
                        mask = (high_mask << low) | low_mask
                        total += sum(
                            1 - (((mask & key).bit_count() & 1) << 1)
                            for key in keys
                        )
                    assert total == 0, (k, n, d, low_mask)
