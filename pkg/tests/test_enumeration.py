"""
Tests for Fincke-Pohst enumeration and integer row reduction
"""

from fractions import Fraction
from itertools import product

import pytest
from sympy import Matrix

from src.core.enumeration import (MIN_SLACK, FinckePohst, hermite_rows, outer_range,
                                  solve_rational)
from src.core.errors import NotTotallyPD

TRIDIAGONAL = [[Fraction(2), Fraction(1, 2), Fraction(0)],
               [Fraction(1, 2), Fraction(2), Fraction(1, 2)],
               [Fraction(0), Fraction(1, 2), Fraction(2)]]


def value(T, x):
    return sum(T[i][j] * x[i] * x[j] for i in range(len(x)) for j in range(len(x)))


def unimodular_gram(U):
    """U^T U as Fractions"""
    k = len(U)
    return [[Fraction(sum(U[r][i] * U[r][j] for r in range(k))) for j in range(k)]
            for i in range(k)]


def shear(k, s):
    """Upper unitriangular with s on the superdiagonal"""
    return [[1 if i == j else (s if j == i + 1 else 0) for j in range(k)] for i in range(k)]


def short_vectors_through(U, bound):
    """x with |Ux|^2 <= bound, found by scanning y = Ux over a small box"""
    inverse = Matrix(U).inv()
    r = int(bound ** 0.5) + 1
    out = set()
    for y in product(range(-r, r + 1), repeat=len(U)):
        if sum(c * c for c in y) <= bound:
            out.add(tuple(int(c) for c in inverse * Matrix(y)))
    return out


class TestFinckePohst:
    @pytest.mark.parametrize("bound", [0, 2, Fraction(7, 2), 6])
    def test_matches_box(self, bound):
        fp = FinckePohst(TRIDIAGONAL)
        expected = {x for x in product(range(-3, 4), repeat=3) if value(TRIDIAGONAL, x) <= bound}
        found = list(fp.vectors(bound))
        assert len(found) == len(set(found))
        assert set(found) == expected

    def test_lower_bound(self):
        fp = FinckePohst(TRIDIAGONAL)
        for x in fp.vectors(6, lower=4):
            assert 4 <= value(TRIDIAGONAL, x) <= 6
            assert fp.exact_value(x) == value(TRIDIAGONAL, x)

    def test_chunks_cover_the_walk(self):
        fp = FinckePohst(TRIDIAGONAL)
        whole = set(fp.vectors(6))
        chunks = set()
        for c in outer_range(fp, 6):
            chunks.update(fp.vectors(6, first_coord=c))
        assert chunks == whole

    def test_indefinite(self):
        with pytest.raises(NotTotallyPD):
            FinckePohst([[Fraction(1), Fraction(2)], [Fraction(2), Fraction(1)]])

    def test_slack_tracks_conditioning(self):
        assert FinckePohst(TRIDIAGONAL).slack == MIN_SLACK
        assert FinckePohst(unimodular_gram(shear(3, 60))).slack > MIN_SLACK

    @pytest.mark.parametrize("k, s", [(2, 1000), (3, 60), (4, 12)])
    @pytest.mark.parametrize("bound", [1, 3, 6])
    def test_ill_conditioned_gram(self, k, s, bound):
        U = shear(k, s)
        T = unimodular_gram(U)
        fp = FinckePohst(T)
        assert set(fp.vectors(bound)) == short_vectors_through(U, bound)
        outer = set(outer_range(fp, bound))
        assert all(x[-1] in outer for x in short_vectors_through(U, bound))


class TestRowReduction:
    def test_hermite_form(self):
        assert hermite_rows([[2, 4], [3, 5]]) == [[1, 1], [0, 2]]
        assert hermite_rows([[2, 0], [4, 0]]) == [[2, 0]]
        assert hermite_rows([]) == []

    def test_same_lattice(self):
        rows = [[3, 1, 4], [1, 5, 9], [2, 6, 5], [3, 5, 8]]
        H = hermite_rows(rows)
        assert len(H) == 3
        assert all(H[p][p] > 0 for p in range(3))
        assert hermite_rows(rows + H) == H
        assert hermite_rows(H + [[0, 0, H[2][2]]]) == H

    def test_solve(self):
        A = [[Fraction(2), Fraction(1)], [Fraction(1), Fraction(3)]]
        assert solve_rational(A, [Fraction(3), Fraction(4)]) == [1, 1]
