"""
Tests for Hilbert symbols, square classes and ternary anisotropy
"""

from itertools import product

import pytest
from hypothesis import given
from hypothesis import strategies as st
from sympy import Matrix, multiplicity, primefactors

from src.core.bounds import least_nonresidue
from src.core.errors import IsotropicAtQ
from src.core.localqf import (SquareClass, all_square_classes, choose_D_param, hilbert,
                              hilbert_infinity, is_anisotropic_at, missed_square_class,
                              represents_class, square_class_of, ternary_anisotropic_primes)

nonzero = st.integers(min_value=-60, max_value=60).filter(bool)
small_primes = st.sampled_from([2, 3, 5, 7, 11, 13])


def diag(a, b, c):
    return [[a, 0, 0], [0, b, 0], [0, 0, c]]


def classes_by_residue_lifting(G, q, max_exponent=40):
    """Square classes of Q on primitive vectors, read off Q(x) mod q^e

    A residue vector is settled once its value mod q^e fixes the valuation
    and the unit part (mod q, or mod 8 at 2); otherwise it is lifted to q^(e+1).
    """
    unit_digits = 3 if q == 2 else 1
    found = set()
    level = [x for x in product(range(q), repeat=3) if any(x)]
    e = 1
    while level:
        assert e <= max_exponent, "no anisotropic bound on the valuation"
        modulus = q ** e
        pending = []
        for x in level:
            y = sum(G[i][j] * x[i] * x[j] for i in range(3) for j in range(3)) % modulus
            v = multiplicity(q, y) if y else e
            if v + unit_digits <= e:
                found.add(square_class_of(y, q))
            else:
                pending.append(x)
        level = [tuple(xi + modulus * ti for xi, ti in zip(x, t))
                 for x in pending for t in product(range(q), repeat=3)]
        e += 1
    return found


class TestHilbert:
    @pytest.mark.parametrize("a, b, p, expected", [
        (-1, -1, 2, -1),
        (2, 5, 5, -1),
        (3, 7, 11, 1),
        (2, 3, 3, -1),
        (-1, 3, 3, -1),
        (5, 5, 2, 1),
    ])
    def test_values(self, a, b, p, expected):
        assert hilbert(a, b, p) == expected

    @given(nonzero, nonzero, nonzero, small_primes)
    def test_bilinear(self, a, b, c, p):
        assert hilbert(a, b * c, p) == hilbert(a, b, p) * hilbert(a, c, p)

    @given(nonzero, nonzero, small_primes)
    def test_symmetric(self, a, b, p):
        assert hilbert(a, b, p) == hilbert(b, a, p)

    @given(nonzero, nonzero)
    def test_product_formula(self, a, b):
        total = hilbert_infinity(a, b)
        for p in primefactors(2 * a * b):
            total *= hilbert(a, b, p)
        assert total == 1


class TestSquareClasses:
    @pytest.mark.parametrize("x, p, expected", [
        (12, 3, SquareClass(3, 1, 1)),
        (7, 2, SquareClass(2, 0, 7)),
        (9, 5, SquareClass(5, 0, 1)),
        (-7, 7, SquareClass(7, 1, 3)),
        (-1, 2, SquareClass(2, 0, 7)),
    ])
    def test_classes(self, x, p, expected):
        assert square_class_of(x, p) == expected

    def test_class_counts(self):
        assert len(all_square_classes(2)) == 8
        assert len(all_square_classes(7)) == 4


class TestAnisotropy:
    @pytest.mark.parametrize("G, primes", [
        (diag(1, 1, 1), [2]),
        (diag(1, 1, 7), [7]),
        (diag(1, 1, 2), [2]),
    ])
    def test_anisotropic_primes(self, G, primes):
        assert ternary_anisotropic_primes(G) == primes

    def test_primes_divide_twice_the_determinant(self, rng):
        for _ in range(30):
            G = rng.ternary_integer_gram()
            d = (G[0][0] * (G[1][1] * G[2][2] - G[1][2] ** 2)
                 - G[0][1] * (G[0][1] * G[2][2] - G[1][2] * G[0][2])
                 + G[0][2] * (G[0][1] * G[1][2] - G[1][1] * G[0][2]))
            for q in ternary_anisotropic_primes(G):
                assert (2 * d) % q == 0

    def test_missed_class_examples(self):
        assert missed_square_class(diag(1, 1, 1), 2) == SquareClass(2, 0, 7)
        assert missed_square_class(diag(1, 1, 7), 7) == SquareClass(7, 1, 3)

    def test_missed_class_only_unrepresented(self, rng):
        for _ in range(20):
            G = rng.ternary_integer_gram()
            for q in ternary_anisotropic_primes(G):
                missed = missed_square_class(G, q)
                for c in all_square_classes(q):
                    assert represents_class(G, c) == (c != missed)

    @pytest.mark.slow
    def test_missed_class_matches_residue_lifting(self, rng):
        tested = 0
        for _ in range(5000):
            if tested == 50:
                break
            G = rng.ternary_integer_gram(bound=3)
            det = int(Matrix(G).det())
            primes = [q for q in ternary_anisotropic_primes(G)
                      if q ** multiplicity(q, det) <= 16]
            for q in primes:
                seen = classes_by_residue_lifting(G, q)
                assert seen == set(all_square_classes(q)) - {missed_square_class(G, q)}
            tested += bool(primes)
        assert tested == 50

    def test_isotropic_prime_rejected(self):
        assert not is_anisotropic_at(diag(1, 1, 1), 3)
        with pytest.raises(IsotropicAtQ):
            missed_square_class(diag(1, 1, 1), 3)

    def test_sum_of_three_squares_never_hits_missed_class(self):
        missed = missed_square_class(diag(1, 1, 1), 2)
        values = {x * x + y * y + z * z for x, y, z in product(range(12), repeat=3)}
        values.discard(0)
        assert all(square_class_of(n, 2) != missed for n in values)
        # every other class shows up among small values
        seen = {square_class_of(n, 2) for n in values}
        assert seen == set(all_square_classes(2)) - {missed}


class TestChooseD:
    def test_three_squares(self):
        assert choose_D_param(diag(1, 1, 1)) == (2, 7)

    @pytest.mark.parametrize("G", [diag(1, 2, 2), diag(1, 2, 3), [[2, 1, 0], [1, 4, 1], [0, 1, 6]]])
    def test_small_representative(self, G):
        q, value = choose_D_param(G)
        assert 1 <= value <= q * least_nonresidue(q)
        assert q in ternary_anisotropic_primes(G)
