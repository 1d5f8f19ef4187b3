import math

import pytest

from oracles import composition_sum_oracle

from ffrmf.bounds import (
    bound_chain_report,
    composition_sum,
    composition_sum_envelope,
    full_overlap_chain,
    partial_overlap_chain,
)
from ffrmf.counting import LOG_SHIFT, count_Pk, count_Pk_by_maxdeg, int_log


def _sq(q, k, n):
    return count_Pk(q, k, n) ** 2


class TestCompositionSum:
    def test_single_part_is_squared_count(self):
        for q, k, n in [(2, 2, 4), (2, 3, 9), (3, 2, 5)]:
            assert composition_sum(q, 1, k, n) == count_Pk(q, k, n) ** 2

    def test_frozen_two_part_values(self):
        # sum over n1 of pi(n1)^2 pi(4-n1)^2 = 16 + 1 + 16
        assert composition_sum(2, 2, 2, 4) == 33
        assert composition_sum(2, 2, 2, 3) == 8

    def test_empty_when_parts_exceed_budget(self):
        assert composition_sum(2, 3, 2, 10) == 0
        assert composition_sum(2, 3, 5, 2) == 0

    @pytest.mark.parametrize("q", [2, 3])
    @pytest.mark.parametrize("r", [1, 2, 3])
    def test_matches_direct_composition_enumeration(self, q, r):
        for k in range(1, 6):
            for n in range(1, 21):
                expected = composition_sum_oracle(q, r, k, n, count_Pk)
                assert composition_sum(q, r, k, n) == expected, (q, r, k, n)

    def test_dominates_linear_by_max_subsum(self):
        # picking (k1, n1) = (1, d) shows the subsum structure directly
        for q, k, n in [(2, 2, 12), (2, 3, 14), (3, 2, 9)]:
            subsum = sum(
                _sq(q, 1, d) * _sq(q, k - 1, n - d) for d in range(1, n)
            )
            assert composition_sum(q, 2, k, n) >= subsum


class TestCompositionEnvelope:
    def test_r_equals_k_reduces_to_q2n_over_n2(self):
        env = composition_sum_envelope(2, 2, 2, 500)
        assert env.log == pytest.approx(1000 * math.log(2) - 2 * math.log(500),
                                        rel=1e-12)
        assert env.value is None  # far beyond float range

    def test_extra_factor_per_k(self):
        lo = composition_sum_envelope(2, 2, 2, 500)
        hi = composition_sum_envelope(2, 2, 3, 500)
        assert hi.log - lo.log == pytest.approx(
            2 * math.log(math.log(500) + LOG_SHIFT), rel=1e-12
        )

    def test_linear_value_when_representable(self):
        env = composition_sum_envelope(2, 2, 2, 20)
        assert env.value == pytest.approx(2.0 ** 40 / 400, rel=1e-12)

    def test_log_gap_bounded_on_acceptance_sweep(self):
        for n in (500, 1000, 2000):
            k_top = int(math.log(n) / 3)
            for k in range(2, k_top + 1):
                lhs = composition_sum(2, 2, k, n)
                env = composition_sum_envelope(2, 2, k, n)
                assert int_log(lhs) - env.log <= math.log(10), (k, n)


class TestOverlapChains:
    def test_frozen_partial_k2(self):
        assert partial_overlap_chain(2, 2, 3) == 64

    def test_frozen_full_k2(self):
        assert full_overlap_chain(2, 2, 3) == 16

    def test_triple_block_empty_at_k2(self):
        for n in (3, 5, 9):
            pair_only = 8 * sum(
                _sq(2, 1, l) * _sq(2, 1, n - l) for l in range(1, n)
            )
            assert partial_overlap_chain(2, 2, n) == pair_only

    @pytest.mark.parametrize("q,k,n", [(2, 3, 4), (2, 3, 5), (2, 4, 6), (3, 3, 5)])
    def test_partial_matches_nested_loop_oracle(self, q, k, n):
        expected = 8 * sum(
            _sq(q, t, l) * _sq(q, k - t, n - l)
            for t in range(1, k)
            for l in range(1, n)
        ) + 4 * sum(
            _sq(q, k - t, n - l) * _sq(q, j, g) * _sq(q, t - j, l - g)
            for t in range(1, k)
            for l in range(1, n)
            for j in range(1, t)
            for g in range(1, l)
        )
        assert partial_overlap_chain(q, k, n) == expected

    @pytest.mark.parametrize("q,k,n", [(2, 2, 3), (2, 3, 5), (2, 4, 7), (3, 3, 6)])
    def test_full_matches_nested_loop_oracle(self, q, k, n):
        expected = 2 * sum(
            _sq(q, 1, d) * _sq(q, k - 1, n - d) for d in range(1, n)
        ) + sum(
            _sq(q, 1, d) * _sq(q, j, g) * _sq(q, k - 1 - j, n - d - g)
            for d in range(1, n)
            for j in range(1, k - 1)
            for g in range(1, n - d)
        )
        assert full_overlap_chain(q, k, n) == expected


class TestBoundChainReport:
    def test_components_and_total(self):
        rep = bound_chain_report(2, 2, 12)
        assert rep.by_max_square_sum == sum(
            count_Pk_by_maxdeg(2, 2, 12, d) ** 2 for d in range(1, 12)
        )
        assert rep.total == (
            rep.by_max_square_sum + rep.partial_overlap + rep.full_overlap
        )
        assert rep.count_square == count_Pk(2, 2, 12) ** 2
        assert rep.ratio > 0

    def test_by_max_mass_cauchy(self):
        for q, k, n in [(2, 2, 15), (2, 3, 12), (3, 2, 10)]:
            by_max = sum(count_Pk_by_maxdeg(q, k, n, d) ** 2 for d in range(1, n))
            assert by_max <= count_Pk(q, k, n) ** 2

    def test_ratio_decreases_on_acceptance_sweep(self):
        ratios = [bound_chain_report(2, 2, n).ratio for n in (100, 200, 400)]
        assert ratios[0] > ratios[1] > ratios[2]

    def test_log_ratio_consistent(self):
        rep = bound_chain_report(2, 2, 40)
        assert rep.log_ratio == pytest.approx(math.log(rep.ratio), rel=1e-9)
