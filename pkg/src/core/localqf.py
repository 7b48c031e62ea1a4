"""
p-adic square classes, Hilbert symbols and ternary anisotropy
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Sequence, Tuple, Union

from sympy import factorint, legendre_symbol

from src.core.bounds import least_nonresidue
from src.core.errors import InvariantViolation, IsotropicAtQ, NotPositiveDefinite

logger = logging.getLogger(__name__)

Rational = Union[int, Fraction]


def _as_integer_class(x: Rational) -> int:
    """An integer in the same square class as x"""
    x = Fraction(x)
    if x == 0:
        raise ValueError("zero has no square class")
    return x.numerator * x.denominator


def _split(n: int, p: int) -> Tuple[int, int]:
    """n = p^v * u with p not dividing u"""
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v, n


def hilbert(a: Rational, b: Rational, p: int) -> int:
    """Hilbert symbol (a, b)_p"""
    a, b = _as_integer_class(a), _as_integer_class(b)
    alpha, u = _split(a, p)
    beta, v = _split(b, p)
    if p == 2:
        eps_u = ((u - 1) // 2) % 2
        eps_v = ((v - 1) // 2) % 2
        om_u = ((u * u - 1) // 8) % 2
        om_v = ((v * v - 1) // 8) % 2
        e = (eps_u * eps_v + alpha * om_v + beta * om_u) % 2
        return -1 if e else 1
    sign = -1 if (alpha * beta * ((p - 1) // 2)) % 2 else 1
    if beta % 2:
        sign *= legendre_symbol(u % p, p)
    if alpha % 2:
        sign *= legendre_symbol(v % p, p)
    return sign


def hilbert_infinity(a: Rational, b: Rational) -> int:
    return -1 if a < 0 and b < 0 else 1


@dataclass(frozen=True)
class SquareClass:
    """Coset p^d * eta * (Q_p^x)^2"""
    p: int
    d: int
    eta: int

    @property
    def representative(self) -> int:
        return self.p ** self.d * self.eta

    def to_dict(self) -> dict:
        return {"p": self.p, "d": self.d, "eta": self.eta,
                "representative": self.representative}


def square_class_of(x: Rational, p: int) -> SquareClass:
    v, u = _split(_as_integer_class(x), p)
    if p == 2:
        return SquareClass(2, v % 2, u % 8)
    if legendre_symbol(u % p, p) == 1:
        return SquareClass(p, v % 2, 1)
    return SquareClass(p, v % 2, least_nonresidue(p))


def all_square_classes(p: int) -> List[SquareClass]:
    units = [1, 3, 5, 7] if p == 2 else [1, least_nonresidue(p)]
    return [SquareClass(p, d, eta) for d in (0, 1) for eta in units]


def is_padic_square(x: Rational, p: int) -> bool:
    c = square_class_of(x, p)
    return c.d == 0 and c.eta == 1


def rational_diagonal(G: Sequence[Sequence[Rational]]) -> List[Fraction]:
    """Diagonal of an LDL^T of a positive definite Gram, from leading minors"""
    n = len(G)
    minors = [Fraction(1)]
    m = [[Fraction(x) for x in row] for row in G]
    for k in range(n):
        pivot = m[k][k]
        if pivot <= 0:
            raise NotPositiveDefinite(f"leading minor {k + 1} is not positive")
        minors.append(minors[-1] * pivot)
        for i in range(k + 1, n):
            f = m[i][k] / pivot
            for j in range(k + 1, n):
                m[i][j] -= f * m[k][j]
    return [minors[i + 1] / minors[i] for i in range(n)]


def hasse_invariant(diag: Sequence[Rational], p: int) -> int:
    eps = 1
    for i in range(len(diag)):
        for j in range(i + 1, len(diag)):
            eps *= hilbert(diag[i], diag[j], p)
    return eps


def _gram_det(G: Sequence[Sequence[Rational]]) -> Fraction:
    out = Fraction(1)
    for a in rational_diagonal(G):
        out *= a
    return out


def is_anisotropic_at(G: Sequence[Sequence[Rational]], p: int) -> bool:
    diag = rational_diagonal(G)
    d = diag[0] * diag[1] * diag[2]
    return hasse_invariant(diag, p) != hilbert(-1, -d, p)


def ternary_anisotropic_primes(G: Sequence[Sequence[Rational]]) -> List[int]:
    """Primes at which the positive definite ternary space is anisotropic"""
    if len(G) != 3:
        raise NotPositiveDefinite("ternary Gram must be 3x3")
    diag = rational_diagonal(G)
    candidates = {2}
    for a in diag:
        candidates.update(factorint(_as_integer_class(a)).keys())
    primes = sorted(p for p in candidates if is_anisotropic_at(G, p))
    if not primes:
        raise InvariantViolation("positive definite ternary space isotropic everywhere")
    return primes


def represents_class(G: Sequence[Sequence[Rational]], c: SquareClass) -> bool:
    """Whether the ternary space over Q_p represents the class c

    V represents c iff V + <-c> is isotropic; a quaternary space is anisotropic
    iff its discriminant is a square and its Hasse invariant is -(-1,-1)_p.
    """
    p = c.p
    diag = rational_diagonal(G)
    d = diag[0] * diag[1] * diag[2]
    minus_c = -c.representative
    d4 = d * minus_c
    eps4 = hasse_invariant(diag, p) * hilbert(d, minus_c, p)
    anisotropic = is_padic_square(d4, p) and eps4 == -hilbert(-1, -1, p)
    return not anisotropic


def missed_square_class(G: Sequence[Sequence[Rational]], q: int) -> SquareClass:
    """The one square class an anisotropic ternary space fails to represent"""
    if not is_anisotropic_at(G, q):
        raise IsotropicAtQ(f"space is isotropic at {q}")
    missed = square_class_of(-_gram_det(G), q)
    if __debug__:
        for c in all_square_classes(q):
            if represents_class(G, c) == (c == missed):
                raise InvariantViolation(
                    f"class {c} representability disagrees with missed class {missed}")
    return missed


def choose_D_param(G: Sequence[Sequence[Rational]]) -> Tuple[int, int]:
    """(q, D) with D = q^d * eta the small representative of the missed class"""
    best = None
    for q in ternary_anisotropic_primes(G):
        c = missed_square_class(G, q)
        key = (c.representative, q)
        if best is None or key < best:
            best = key
    value, q = best
    logger.debug(f"choose_D_param: q={q} D={value}")
    return q, value
