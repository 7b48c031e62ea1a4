"""
Short-vector enumeration and integer row reduction

Fincke-Pohst runs on a floating Cholesky factor with a widened search box;
every reported vector is re-checked exactly against the rational form.
"""

from __future__ import annotations

import logging
from fractions import Fraction
from functools import reduce
from math import ceil, floor, lcm
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from src.core.errors import NotTotallyPD

logger = logging.getLogger(__name__)

# the float walk enumerates a superset of the exact solutions as long as
# cond(T) * eps stays well below 1; rounding in the Cholesky factor and in the
# coordinate centres is bounded by SLACK_FACTOR * n * eps * cond(T), relative
SLACK_FACTOR = 64.0
# floor on the relative slack for well conditioned forms
MIN_SLACK = 1e-9
# past this the float bounds stop meaning much; the walk still runs but may be slow
LOOSE_SLACK = 1e-2


class FinckePohst:
    """All integer x with x^T T x <= bound for a positive definite rational T"""

    def __init__(self, T: Sequence[Sequence[Fraction]]):
        self.n = len(T)
        self.den = reduce(lcm, (Fraction(x).denominator for row in T for x in row), 1)
        self.T_int = [[int(Fraction(x) * self.den) for x in row] for row in T]
        Tf = np.array(self.T_int, dtype=float) / self.den
        try:
            L = np.linalg.cholesky(Tf)
        except np.linalg.LinAlgError:
            raise NotTotallyPD("trace form is not positive definite")
        R = L.T
        n = self.n
        self.qdiag = [R[i, i] ** 2 for i in range(n)]
        self.qmu = [[R[i, j] / R[i, i] if j > i else 0.0 for j in range(n)] for i in range(n)]
        self.slack = max(MIN_SLACK, SLACK_FACTOR * n * np.finfo(float).eps * np.linalg.cond(Tf))
        if self.slack > LOOSE_SLACK:
            logger.warning(f"trace form condition number {np.linalg.cond(Tf):.3g}; "
                           f"enumeration box widened by {self.slack:.3g}")

    def widened_budget(self, bound: Fraction) -> float:
        return float(bound) * (1 + self.slack) + self.slack

    def exact_value(self, x: Sequence[int]) -> Fraction:
        total = 0
        for i, row in enumerate(self.T_int):
            xi = x[i]
            if xi:
                total += xi * sum(r * xj for r, xj in zip(row, x))
        return Fraction(total, self.den)

    def vectors(self, bound, lower=None, first_coord: Optional[int] = None) -> Iterator[Tuple[int, ...]]:
        """Yield every x with lower <= x^T T x <= bound (exact), zero vector included

        first_coord pins the outermost coordinate (the last one), which lets
        callers split the enumeration into independent chunks.
        """
        bound = Fraction(bound)
        lower = Fraction(lower) if lower is not None else None
        n = self.n
        budget = self.widened_budget(bound)
        # absolute rounding allowance on budget-sized quantities
        tol = self.slack * budget
        slack = self.slack
        x = [0] * n
        qd, mu = self.qdiag, self.qmu
        exact_bound = bound * self.den
        exact_lower = lower * self.den if lower is not None else None

        def interval(i: int, remaining: float) -> Tuple[int, int, float]:
            terms = [mu[i][j] * x[j] for j in range(i + 1, n)]
            c = -sum(terms)
            r = (max(remaining, 0.0) + tol) / qd[i]
            half = r ** 0.5 + slack * (sum(abs(t) for t in terms) + 1)
            return ceil(c - half), floor(c + half), c

        # iterative depth-first walk from coordinate n-1 down to 0
        stack: List[Tuple[int, float, float]] = []
        i = n - 1
        remaining = budget
        lo, hi, c = interval(i, remaining)
        if first_coord is not None:
            if first_coord < lo or first_coord > hi:
                return
            lo = hi = first_coord
        x[i] = lo - 1
        stack.append((hi, c, remaining))
        while stack:
            hi, c, remaining = stack[-1]
            x[i] += 1
            if x[i] > hi:
                stack.pop()
                i += 1
                continue
            used = qd[i] * (x[i] - c) ** 2
            rest = remaining - used
            if rest < -tol:
                continue
            if i == 0:
                value = 0
                for a, row in enumerate(self.T_int):
                    if x[a]:
                        value += x[a] * sum(r * xb for r, xb in zip(row, x))
                if value <= exact_bound and (exact_lower is None or value >= exact_lower):
                    yield tuple(x)
                continue
            i -= 1
            lo2, hi2, c2 = interval(i, rest)
            x[i] = lo2 - 1
            stack.append((hi2, c2, rest))


def outer_range(fp: FinckePohst, bound) -> range:
    """Candidate values of the outermost coordinate for a given budget"""
    budget = fp.widened_budget(Fraction(bound))
    half = (budget * (1 + fp.slack) / fp.qdiag[-1]) ** 0.5 + fp.slack
    return range(-floor(half), floor(half) + 1)


# Hermite normal form over Z


def _xgcd(a: int, b: int) -> Tuple[int, int, int]:
    x, next_x = 1, 0
    y, next_y = 0, 1
    g, next_g = a, b
    while next_g:
        q = g // next_g
        x, next_x = next_x, x - q * next_x
        y, next_y = next_y, y - q * next_y
        g, next_g = next_g, g - q * next_g
    if g < 0:
        x, y, g = -x, -y, -g
    return x, y, g


def hermite_rows(vectors: Sequence[Sequence[int]]) -> List[List[int]]:
    """Row-style Hermite normal form of the Z-span of the given integer rows

    Nonzero rows only, pivots strictly increasing, pivots positive and entries
    above each pivot reduced into [0, pivot).
    """
    if not vectors:
        return []
    N = len(vectors[0])
    basis: List[List[int]] = []
    pivots: List[int] = []
    for vec0 in vectors:
        vec = list(vec0)
        for col in range(N):
            if not vec[col]:
                continue
            if col in pivots:
                p = pivots.index(col)
                row = basis[p]
                a, b = row[col], vec[col]
                if b % a == 0:
                    q = b // a
                    vec = [v - q * r for v, r in zip(vec, row)]
                    continue
                x, y, g = _xgcd(a, b)
                new_row = [x * r + y * v for r, v in zip(row, vec)]
                vec = [(a // g) * v - (b // g) * r for r, v in zip(row, vec)]
                basis[p] = new_row
                continue
            where = sum(1 for pc in pivots if pc < col)
            basis.insert(where, vec)
            pivots.insert(where, col)
            break
    for p, col in enumerate(pivots):
        if basis[p][col] < 0:
            basis[p] = [-v for v in basis[p]]
    for p in range(len(pivots)):
        col = pivots[p]
        piv = basis[p][col]
        for above in range(p):
            q = basis[above][col] // piv
            if q:
                basis[above] = [u - q * v for u, v in zip(basis[above], basis[p])]
    return basis


def solve_rational(A: Sequence[Sequence[Fraction]], b: Sequence[Fraction]) -> List[Fraction]:
    """x with A x = b for square nonsingular rational A"""
    n = len(A)
    m = [[Fraction(v) for v in A[i]] + [Fraction(b[i])] for i in range(n)]
    for col in range(n):
        piv = next(i for i in range(col, n) if m[i][col] != 0)
        m[col], m[piv] = m[piv], m[col]
        for i in range(n):
            if i != col and m[i][col] != 0:
                f = m[i][col] / m[col][col]
                m[i] = [u - f * v for u, v in zip(m[i], m[col])]
    return [m[i][n] / m[i][i] for i in range(n)]
