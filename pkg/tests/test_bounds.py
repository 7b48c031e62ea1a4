"""
Tests for non-residues, parameter selection and discriminant bounds
"""

from fractions import Fraction
from math import log

import pytest
from sympy import legendre_symbol, primerange

from src.core.bounds import (TABLE_BOUNDS, BoundParams, choose_C, corollary_bound,
                             derive_table_bound, explicit_bound, least_nonresidue, log_bounds,
                             rank_conditions, root_bounds, table_bound, trevino_check)
from src.core.errors import InvariantViolation, NotPositiveDefinite, NotPrime, OutOfRange


class TestLeastNonresidue:
    @pytest.mark.parametrize("p, gamma", [(3, 2), (5, 2), (7, 3), (23, 5), (71, 7), (2, 7)])
    def test_values(self, p, gamma):
        assert least_nonresidue(p) == gamma

    def test_variant_at_two(self):
        assert least_nonresidue(2, gamma2_mode=5) == 5
        with pytest.raises(OutOfRange):
            least_nonresidue(2, gamma2_mode=3)

    @pytest.mark.parametrize("n", [1, 9, 15, 100])
    def test_not_prime(self, n):
        with pytest.raises(NotPrime):
            least_nonresidue(n)

    def test_minimality(self):
        for p in primerange(3, 3000):
            g = least_nonresidue(p)
            assert legendre_symbol(g, p) == -1
            assert all(legendre_symbol(n, p) == 1 for n in range(2, g))


class TestCertifiedArithmetic:
    def test_log_two(self):
        lo, hi = log_bounds(2)
        assert lo <= Fraction(693147180559946, 10 ** 15)
        assert hi >= Fraction(693147180559945, 10 ** 15)
        assert hi - lo < Fraction(1, 10 ** 20)

    @pytest.mark.parametrize("x", [Fraction(1, 3), 1, 3, 10, Fraction(7, 2), 12345])
    def test_log_brackets_float(self, x):
        lo, hi = log_bounds(x)
        assert lo <= hi
        assert float(lo) - 1e-12 <= log(x) <= float(hi) + 1e-12

    def test_roots(self):
        lo, hi = root_bounds(16, 4)
        assert lo == hi == 2
        lo, hi = root_bounds(2, 2)
        assert lo * lo <= 2 <= hi * hi


class TestTrevino:
    @pytest.mark.parametrize("limit", [3, 4, 2000])
    def test_holds(self, limit):
        assert trevino_check(limit)

    @pytest.mark.slow
    def test_holds_to_one_hundred_thousand(self):
        assert trevino_check(10 ** 5)


class TestChooseC:
    @pytest.mark.parametrize("G2, p, C, case", [
        ([[1, 0], [0, 1]], 2, 3, "square"),
        ([[1, 0], [0, 2]], 2, 5, "two_odd"),
        ([[1, 0], [0, 3]], 3, 2, "odd_valuation"),
        ([[1, 0], [0, 6]], 3, 2, "odd_valuation"),
        ([[1, 0], [0, 18]], 2, 5, "two_odd"),
        ([[2, 1], [1, 2]], 3, 2, "odd_valuation"),
    ])
    def test_cases(self, G2, p, C, case):
        choice = choose_C(G2)
        assert (choice.p, choice.C, choice.case) == (p, C, case)

    def test_output_ranges(self):
        for a in range(1, 8):
            for c in range(1, 8):
                for b in range(0, 4):
                    if a * c - b * b <= 0:
                        continue
                    choice = choose_C([[a, b], [b, c]])
                    det = a * c - b * b
                    assert 2 <= choice.C <= least_nonresidue(choice.p)
                    assert choice.p == 2 or det % choice.p == 0

    def test_degenerate(self):
        with pytest.raises(NotPositiveDefinite):
            choose_C([[1, 1], [1, 1]])


class TestTableBounds:
    def test_examples(self):
        assert table_bound(1, 3) == 625
        assert table_bound(2, 7) == 63_234_304_000_000
        assert table_bound(1, 7) == 441_000_000

    @pytest.mark.parametrize("m, rank", [(3, 3), (1, 2), (1, 8)])
    def test_out_of_range(self, m, rank):
        with pytest.raises(OutOfRange):
            table_bound(m, rank)

    @pytest.mark.parametrize("m, rank", [(m, r) for m in (1, 2) for r in range(3, 8)])
    def test_derivation_reproduces_table(self, m, rank):
        assert derive_table_bound(m, rank) == TABLE_BOUNDS[m][rank]

    def test_rank_six_square(self):
        assert TABLE_BOUNDS[1][6] == (3 * 5 ** 2 * 7) ** 2


class TestExplicitBounds:
    def test_rank_three_at_three(self):
        b = explicit_bound(3, 3)
        exact = 5 ** 4 * 3 ** 5 * log(3) ** 2
        assert Fraction(183305) < b < Fraction(183306)
        assert float(b) >= exact * (1 - 1e-12)
        assert (float(b) - exact) / exact < 1e-6

    @pytest.mark.parametrize("m, rank, formula", [
        (3, 5, lambda m: 3 ** 4 * 5 ** 4 * m ** 7 * log(m) ** 2),
        (4, 3, lambda m: 5 ** 4 * m ** 5 * log(m) ** 2),
        (5, 4, lambda m: 3 ** 4 * 5 ** 2 * m ** 5 * log(m) ** 2),
    ])
    def test_within_slack(self, m, rank, formula):
        exact = formula(m)
        b = float(explicit_bound(m, rank))
        assert exact * (1 - 1e-12) <= b <= exact * (1 + 1e-6)

    @pytest.mark.parametrize("rank", range(3, 8))
    def test_monotone_in_m(self, rank):
        values = [explicit_bound(m, rank) for m in range(3, 9)]
        assert values == sorted(values)

    def test_small_m_rejected(self):
        with pytest.raises(OutOfRange):
            explicit_bound(2, 3)


class TestCorollary:
    def test_rank_three(self):
        cb = corollary_bound(BoundParams(m=1, rank=3, C1=5))
        assert (cb.sqrt_bound, cb.delta_bound) == (25, 625)

    def test_rank_four(self):
        assert corollary_bound(BoundParams(m=1, rank=4, C1=2)).sqrt_bound == 18

    def test_rank_five(self):
        cb = corollary_bound(BoundParams(m=1, rank=5, C2=3))
        assert cb.sqrt_bound == 135
        assert cb.delta_bound < table_bound(1, 5)

    @pytest.mark.parametrize("kwargs", [
        {"p1": 3},
        {"C1": 8},
        {"q1": 13, "C1": 5},
        {"D2": 15},
    ])
    def test_validation(self, kwargs):
        with pytest.raises(InvariantViolation):
            corollary_bound(BoundParams(m=1, rank=3, **kwargs))


class TestRankConditions:
    def test_small_field_holds(self):
        checks = rank_conditions(5, 1, 2, 2, 1, 1)
        assert checks[3][0].holds

    def test_thirteen(self):
        assert rank_conditions(13, 1, 2, 2, 1, 1)[3][0].holds

    def test_large_field_fails(self):
        checks = rank_conditions(10001, 1, 2, 2, 1, 1)
        assert not checks[3][0].holds
        assert not checks[4][0].holds

    def test_every_rank_reported(self):
        checks = rank_conditions(7, 1, 2, 2, 1, 1)
        assert sorted(checks) == [3, 4, 5, 6, 7]
        assert all(c.to_dict()["label"] for cs in checks.values() for c in cs)
