"""
Exact symmetric matrices over Q(sqrt D)

Determinants go through a fraction-free (Bareiss) elimination on integer
pairs (x, y) standing for x + y*sqrt(D); everything else is plain elimination
over QuadRat.
"""

from __future__ import annotations

from functools import reduce
from itertools import combinations
from math import lcm
from typing import List, Sequence, Tuple

from src.core.errors import DimensionMismatch, ParseError
from src.core.qfield import QuadRat

Pair = Tuple[int, int]

# exhaustive principal-minor test up to this size, LDL^T above it
ALL_MINORS_MAX_K = 8


# integer-pair kernel over Z[sqrt D]


def pair_mul(x: Pair, y: Pair, D: int) -> Pair:
    return (x[0] * y[0] + x[1] * y[1] * D, x[0] * y[1] + x[1] * y[0])


def pair_exact_div(x: Pair, y: Pair, D: int) -> Pair:
    n = y[0] * y[0] - y[1] * y[1] * D
    u = x[0] * y[0] - x[1] * y[1] * D
    v = x[1] * y[0] - x[0] * y[1]
    qu, ru = divmod(u, n)
    qv, rv = divmod(v, n)
    if ru or rv:
        raise ArithmeticError("inexact division in Z[sqrt D]")
    return (qu, qv)


def pair_sign(x: Pair, D: int, emb: int = 1) -> int:
    a, b = x
    if emb == 2:
        b = -b
    if b == 0:
        return (a > 0) - (a < 0)
    if a == 0:
        return 1 if b > 0 else -1
    if (a > 0) == (b > 0):
        return 1 if a > 0 else -1
    dominant_a = a * a > b * b * D
    if a > 0:
        return 1 if dominant_a else -1
    return -1 if dominant_a else 1


def pair_det(rows: Sequence[Sequence[Pair]], D: int) -> Pair:
    """Bareiss determinant of a square matrix with entries in Z[sqrt D]"""
    n = len(rows)
    if n == 0:
        return (1, 0)
    if n == 1:
        return rows[0][0]
    if n == 2:
        p = pair_mul(rows[0][0], rows[1][1], D)
        r = pair_mul(rows[0][1], rows[1][0], D)
        return (p[0] - r[0], p[1] - r[1])
    m = [list(r) for r in rows]
    sign = 1
    prev = (1, 0)
    for k in range(n - 1):
        if m[k][k] == (0, 0):
            for i in range(k + 1, n):
                if m[i][k] != (0, 0):
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return (0, 0)
        pivot = m[k][k]
        for i in range(k + 1, n):
            mik = m[i][k]
            for j in range(k + 1, n):
                p = pair_mul(pivot, m[i][j], D)
                r = pair_mul(mik, m[k][j], D)
                num = (p[0] - r[0], p[1] - r[1])
                m[i][j] = num if prev == (1, 0) else pair_exact_div(num, prev, D)
        prev = pivot
    d = m[n - 1][n - 1]
    return d if sign == 1 else (-d[0], -d[1])


def _scale_to_pairs(rows: Sequence[Sequence[QuadRat]]) -> Tuple[List[List[Pair]], int]:
    """Multiply by the lcm of denominators; returns the pair matrix and the lcm"""
    L = reduce(lcm, (x.q for row in rows for x in row), 1)
    return [[(x.a * (L // x.q), x.b * (L // x.q)) for x in row] for row in rows], L


def det_of_rows(rows: Sequence[Sequence[QuadRat]], D: int) -> QuadRat:
    """Determinant of a (not necessarily symmetric) square matrix"""
    k = len(rows)
    if k == 0:
        return QuadRat(1, 0, 1, D)
    pairs, L = _scale_to_pairs(rows)
    a, b = pair_det(pairs, D)
    return QuadRat(a, b, L ** k, D)


def cofactor_det(rows: Sequence[Sequence[QuadRat]], D: int) -> QuadRat:
    """Laplace expansion along the first row; a reference for small k"""
    k = len(rows)
    if k == 0:
        return QuadRat(1, 0, 1, D)
    if k == 1:
        return rows[0][0]
    total = QuadRat(0, 0, 1, D)
    for j in range(k):
        if rows[0][j].is_zero():
            continue
        minor = [row[:j] + row[j + 1:] for row in rows[1:]]
        term = rows[0][j] * cofactor_det(minor, D)
        total = total + term if j % 2 == 0 else total - term
    return total


class ExactSymMat:
    """k x k symmetric matrix of QuadRat entries"""

    __slots__ = ("k", "entries", "D")

    def __init__(self, entries: Sequence[Sequence[QuadRat]], D: int):
        k = len(entries)
        rows = tuple(tuple(QuadRat.from_scalar(x, D) if not isinstance(x, QuadRat) else x
                           for x in row) for row in entries)
        for i, row in enumerate(rows):
            if len(row) != k:
                raise DimensionMismatch(f"row {i} has {len(row)} entries, expected {k}")
            for j in range(i):
                if row[j] != rows[j][i]:
                    raise DimensionMismatch(f"entries ({i},{j}) and ({j},{i}) differ")
        self.k = k
        self.entries = rows
        self.D = D

    @classmethod
    def diagonal(cls, diag: Sequence[QuadRat], D: int) -> ExactSymMat:
        zero = QuadRat(0, 0, 1, D)
        k = len(diag)
        return cls([[diag[i] if i == j else zero for j in range(k)] for i in range(k)], D)

    @classmethod
    def parse(cls, triples: Sequence[Sequence[str]], D: int) -> ExactSymMat:
        """Row-major list of "a,b,q" strings"""
        try:
            return cls([[QuadRat.parse(t, D) for t in row] for row in triples], D)
        except DimensionMismatch as e:
            raise ParseError(str(e))

    def to_json(self) -> List[List[str]]:
        return [[x.format() for x in row] for row in self.entries]

    def __getitem__(self, ij: Tuple[int, int]) -> QuadRat:
        return self.entries[ij[0]][ij[1]]

    def __eq__(self, other) -> bool:
        return isinstance(other, ExactSymMat) and self.D == other.D and \
            self.entries == other.entries

    def __hash__(self) -> int:
        return hash((self.D, self.entries))

    def __repr__(self) -> str:
        body = "; ".join(" ".join(str(x) for x in row) for row in self.entries)
        return f"ExactSymMat([{body}], D={self.D})"

    def __add__(self, other: ExactSymMat) -> ExactSymMat:
        if self.k != other.k:
            raise DimensionMismatch(f"{self.k}x{self.k} + {other.k}x{other.k}")
        return ExactSymMat([[self.entries[i][j] + other.entries[i][j] for j in range(self.k)]
                            for i in range(self.k)], self.D)

    def scale(self, c: QuadRat) -> ExactSymMat:
        return ExactSymMat([[c * x for x in row] for row in self.entries], self.D)

    def conj(self) -> ExactSymMat:
        return ExactSymMat([[x.conj() for x in row] for row in self.entries], self.D)

    def diag(self) -> List[QuadRat]:
        return [self.entries[i][i] for i in range(self.k)]

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> List[List[QuadRat]]:
        return [[self.entries[i][j] for j in cols] for i in rows]

    def principal(self, idx: Sequence[int]) -> ExactSymMat:
        return ExactSymMat(self.submatrix(idx, idx), self.D)

    def minor(self, idx: Sequence[int]) -> QuadRat:
        return det_of_rows(self.submatrix(idx, idx), self.D)


def det(M: ExactSymMat) -> QuadRat:
    return det_of_rows(M.entries, M.D)


def rank(M: ExactSymMat) -> int:
    """Rank over Q(sqrt D) by Gaussian elimination"""
    m = [list(row) for row in M.entries]
    r = 0
    for col in range(M.k):
        pivot = next((i for i in range(r, M.k) if not m[i][col].is_zero()), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        for i in range(r + 1, M.k):
            if m[i][col].is_zero():
                continue
            f = m[i][col] / m[r][col]
            m[i] = [m[i][j] - f * m[r][j] for j in range(M.k)]
        r += 1
    return r


def is_totally_pd(M: ExactSymMat) -> bool:
    """Sylvester: every leading principal minor totally positive"""
    return all(M.minor(range(i + 1)).is_totally_positive() for i in range(M.k))


def _ldlt_totally_psd(M: ExactSymMat) -> bool:
    m = [list(row) for row in M.entries]
    remaining = list(range(M.k))
    while remaining:
        p = next((i for i in remaining if not m[i][i].is_zero()), None)
        if p is None:
            return all(m[i][j].is_zero() for i in remaining for j in remaining)
        if not m[p][p].is_totally_positive():
            return False
        remaining.remove(p)
        for i in remaining:
            f = m[i][p] / m[p][p]
            for j in remaining:
                m[i][j] = m[i][j] - f * m[p][j]
    return True


def is_totally_psd(M: ExactSymMat) -> bool:
    if M.k > ALL_MINORS_MAX_K:
        return _ldlt_totally_psd(M)
    for size in range(1, M.k + 1):
        for idx in combinations(range(M.k), size):
            if not M.minor(idx).is_totally_nonnegative():
                return False
    return True


def bordered(A: ExactSymMat, v: Sequence[QuadRat], a: QuadRat) -> ExactSymMat:
    k = A.k
    rows = [list(A.entries[i]) + [v[i]] for i in range(k)]
    rows.append(list(v) + [a])
    return ExactSymMat(rows, A.D)


def psd_extend_check(A: ExactSymMat, v: Sequence[QuadRat], a: QuadRat) -> bool:
    """With A totally PD, [[A, v], [v^T, a]] is totally PSD iff its det is totally >= 0"""
    if len(v) != A.k:
        raise DimensionMismatch(f"border of length {len(v)} for {A.k}x{A.k} matrix")
    return det(bordered(A, v, a)).is_totally_nonnegative()


def det_sum_expansion(M: ExactSymMat, N: ExactSymMat) -> QuadRat:
    """det(M + N) as the double sum over index subsets of complementary minors"""
    if M.k != N.k:
        raise DimensionMismatch(f"{M.k}x{M.k} and {N.k}x{N.k}")
    k = M.k
    full = range(k)
    total = QuadRat(0, 0, 1, M.D)
    for r in range(k + 1):
        for alpha in combinations(full, r):
            alpha_c = [i for i in full if i not in alpha]
            for beta in combinations(full, r):
                beta_c = [j for j in full if j not in beta]
                dm = det_of_rows(M.submatrix(alpha, beta), M.D)
                if dm.is_zero():
                    continue
                dn = det_of_rows(N.submatrix(alpha_c, beta_c), M.D)
                term = dm * dn
                if (sum(alpha) + sum(beta)) % 2:
                    term = -term
                total = total + term
    return total


def hadamard_bound(M: ExactSymMat) -> QuadRat:
    """Product of the diagonal; totally dominates det(M) for totally PSD M"""
    out = QuadRat(1, 0, 1, M.D)
    for x in M.diag():
        out = out * x
    return out
