"""
Least non-residues, the C/D parameter selectors and the discriminant bounds
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Sequence, Tuple

from sympy import factorint, integer_nthroot, isprime, legendre_symbol, primerange

from src.core.errors import InvariantViolation, NotPositiveDefinite, NotPrime, OutOfRange
from src.core.qfield import QuadRat, make_field

logger = logging.getLogger(__name__)

GAMMA2_DEFAULT = 7
LOG_TERMS = 64
PREC_BITS = 96  # fixed-point precision of certified logs and roots

# Delta_D bounds for m = 1, 2 and ranks 3..7
TABLE_BOUNDS = {
    1: {3: 625, 4: 2025, 5: 50625, 6: 275625, 7: 441000000},
    2: {3: 10000, 4: 32400, 5: 3240000, 6: 2470090000, 7: 63234304000000},
}

# (constant, exponent of m, exponent of log m) of the unconditional bounds, m >= 3
EXPLICIT_FORMULAS = {
    3: (5 ** 4, Fraction(5), Fraction(2)),
    4: (3 ** 4 * 5 ** 2, Fraction(5), Fraction(2)),
    5: (3 ** 4 * 5 ** 4, Fraction(7), Fraction(2)),
    6: (2 ** 6 * 5 ** 8, Fraction(55, 4), Fraction(13, 2)),
    7: (2 ** 12 * 5 ** 10, Fraction(43, 2), Fraction(9)),
}


@lru_cache(maxsize=None)
def least_nonresidue(p: int, gamma2_mode: int = GAMMA2_DEFAULT) -> int:
    """gamma_p: least positive quadratic non-residue mod p (conventionally 7 or 5 at 2)"""
    if not isprime(p):
        raise NotPrime(f"{p} is not prime")
    if p == 2:
        if gamma2_mode not in (5, 7):
            raise OutOfRange(f"gamma2_mode must be 5 or 7, got {gamma2_mode}")
        return gamma2_mode
    n = 2
    while legendre_symbol(n, p) == 1:
        n += 1
    return n


# certified rational bounds


def _atanh_bounds(n: int, d: int, terms: int = LOG_TERMS) -> Tuple[int, int]:
    """Fixed-point bounds (scaled by 2^PREC_BITS) of atanh(n/d), 0 <= n/d < 1"""
    scale = 1 << PREC_BITS
    lo = hi = 0
    num, den = n, d
    n2, d2 = n * n, d * d
    for i in range(terms):
        k = 2 * i + 1
        lo += (scale * num) // (den * k)
        hi += -((-scale * num) // (den * k))
        num *= n2
        den *= d2
    # tail: sum_{i >= terms} z^(2i+1)/(2i+1) <= z^(2N+1) / ((2N+1)(1 - z^2))
    k = 2 * terms + 1
    tail_den = den * k * (d2 - n2)
    hi += -((-scale * num * d2) // tail_den)
    return lo, hi


@lru_cache(maxsize=1)
def _log2_bounds() -> Tuple[Fraction, Fraction]:
    lo, hi = _atanh_bounds(1, 3)
    scale = 1 << PREC_BITS
    return Fraction(2 * lo, scale), Fraction(2 * hi, scale)


def log_bounds(x, terms: int = LOG_TERMS) -> Tuple[Fraction, Fraction]:
    """Rational (lo, hi) with lo <= log x <= hi, for rational x > 0"""
    x = Fraction(x)
    if x <= 0:
        raise OutOfRange(f"log of non-positive {x}")
    k = x.numerator.bit_length() - x.denominator.bit_length()
    r = x / Fraction(2) ** k
    while r >= 2:
        r /= 2
        k += 1
    while r < 1:
        r *= 2
        k -= 1
    # log r = 2 atanh((r - 1)/(r + 1)), with (r - 1)/(r + 1) in [0, 1/3)
    z = (r - 1) / (r + 1)
    lo, hi = _atanh_bounds(z.numerator, z.denominator, terms)
    scale = 1 << PREC_BITS
    l2lo, l2hi = _log2_bounds()
    lo_total = Fraction(2 * lo, scale) + (k * l2lo if k >= 0 else k * l2hi)
    hi_total = Fraction(2 * hi, scale) + (k * l2hi if k >= 0 else k * l2lo)
    return lo_total, hi_total


def root_bounds(x, k: int) -> Tuple[Fraction, Fraction]:
    """Rational (lo, hi) bracketing the positive k-th root of rational x >= 0"""
    x = Fraction(x)
    if x < 0:
        raise OutOfRange(f"root of negative {x}")
    n, d = x.numerator, x.denominator
    # x^(1/k) = (n d^(k-1))^(1/k) / d
    scaled = n * d ** (k - 1) << (k * PREC_BITS)
    root, exact = integer_nthroot(scaled, k)
    denom = d << PREC_BITS
    lo = Fraction(root, denom)
    hi = lo if exact else Fraction(root + 1, denom)
    return lo, hi


def _power_bounds(lo: Fraction, hi: Fraction, e: Fraction) -> Tuple[Fraction, Fraction]:
    """Bounds of t^e for t in [lo, hi], lo >= 0, rational e >= 0"""
    whole, frac = divmod(e, 1)
    lo_out, hi_out = lo ** int(whole), hi ** int(whole)
    if frac:
        k = frac.denominator
        lo_out *= root_bounds(lo ** frac.numerator, k)[0]
        hi_out *= root_bounds(hi ** frac.numerator, k)[1]
    return lo_out, hi_out


def trevino_check(limit: int) -> bool:
    """gamma_p < 1.4 p^(1/4) log p for all odd primes p <= limit"""
    factor = Fraction(7, 5)
    for p in primerange(3, limit + 1):
        gamma = least_nonresidue(p)
        root_lo, _ = root_bounds(p, 4)
        log_lo, _ = log_bounds(p)
        if not gamma < factor * root_lo * log_lo:
            logger.warning(f"non-residue bound not certified at p={p} (gamma={gamma})")
            return False
    return True


# parameter selectors


@dataclass(frozen=True)
class CChoice:
    p: int
    C: int
    case: str  # "square", "odd_valuation", "two_odd"


def choose_C(G2: Sequence[Sequence[int]], gamma2_mode: int = GAMMA2_DEFAULT) -> CChoice:
    """Pick (p, C) for the binary Gram of two independent vectors

    det square -> C = 3 at p = 2; an odd prime with odd valuation -> C = gamma_p;
    odd 2-valuation -> C = 5 at p = 2. The smallest C wins, ties in that order.
    """
    a, b, c = Fraction(G2[0][0]), Fraction(G2[0][1]), Fraction(G2[1][1])
    det = a * c - b * b
    if a <= 0 or det <= 0:
        raise NotPositiveDefinite(f"binary Gram with det {det} is not positive definite")
    n = det.numerator * det.denominator
    factors = factorint(n)
    options: List[Tuple[int, int, int]] = []
    for p, e in factors.items():
        if p != 2 and e % 2:
            options.append((least_nonresidue(p), 1, p))
    if factors.get(2, 0) % 2:
        options.append((5, 2, 2))
    if not options:
        options.append((3, 0, 2))
    C, rank, p = min(options)
    case = {0: "square", 1: "odd_valuation", 2: "two_odd"}[rank]
    if not 2 <= C <= least_nonresidue(p, gamma2_mode):
        raise InvariantViolation(f"C={C} outside [2, gamma_{p}]")
    return CChoice(p=p, C=C, case=case)


# bounds


def table_bound(m: int, rank: int) -> int:
    if m not in TABLE_BOUNDS or rank not in TABLE_BOUNDS[m]:
        raise OutOfRange(f"no tabulated bound for m={m}, rank={rank}")
    return TABLE_BOUNDS[m][rank]


def max_C(m: int, gamma2_mode: int = 5) -> int:
    return max(least_nonresidue(p, gamma2_mode) for p in primerange(2, 2 * m * m + 1))


def max_D(C: int, m: int) -> int:
    """max q*gamma_q over primes q <= 2 C m^3, with gamma_2 = 7"""
    return max(q * least_nonresidue(q, 7) for q in primerange(2, 2 * C * m ** 3 + 1))


def derive_table_bound(m: int, rank: int) -> int:
    """Square of the corollary bound at the largest admissible parameters"""
    C = max_C(m)
    D = max_D(C, m)
    params = BoundParams(m=m, rank=rank, C1=C, C2=C, D1=D, D2=D)
    return corollary_bound(params, validate=False).delta_bound


def explicit_bound(m: int, rank: int) -> Fraction:
    """Certified rational upper bound of the unconditional bound for m >= 3"""
    if m < 3:
        raise OutOfRange(f"explicit bound needs m >= 3, got {m}")
    if rank not in EXPLICIT_FORMULAS:
        raise OutOfRange(f"rank must be 3..7, got {rank}")
    const, em, el = EXPLICIT_FORMULAS[rank]
    _, m_hi = _power_bounds(Fraction(m), Fraction(m), em)
    log_lo, log_hi = log_bounds(m)
    _, l_hi = _power_bounds(log_lo, log_hi, el)
    return const * m_hi * l_hi


@dataclass(frozen=True)
class BoundParams:
    m: int
    rank: int
    p1: int = 2
    p2: int = 2
    q1: int = 2
    q2: int = 2
    C1: int = 2
    C2: int = 2
    D1: int = 1
    D2: int = 1
    gamma2_mode: int = GAMMA2_DEFAULT

    def validate(self):
        """Hypothesis ranges: p_i <= 2m^2, 2 <= C_i <= gamma_p_i, q_i <= 2 C_i m^3, D_i <= q_i gamma_q_i"""
        m = self.m
        if m < 1 or self.rank not in range(3, 8):
            raise InvariantViolation(f"m={m}, rank={self.rank} out of range")
        for p, C, q, D in ((self.p1, self.C1, self.q1, self.D1),
                           (self.p2, self.C2, self.q2, self.D2)):
            if not isprime(p) or p > 2 * m * m:
                raise InvariantViolation(f"p={p} must be a prime <= {2 * m * m}")
            if not 2 <= C <= least_nonresidue(p, self.gamma2_mode):
                raise InvariantViolation(f"C={C} must lie in [2, gamma_{p}]")
            if not isprime(q) or q > 2 * C * m ** 3:
                raise InvariantViolation(f"q={q} must be a prime <= {2 * C * m ** 3}")
            if not 1 <= D <= q * least_nonresidue(q, 7):
                raise InvariantViolation(f"D={D} must lie in [1, {q}*gamma_{q}]")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class CorollaryBound:
    sqrt_bound: int  # sqrt(Delta_D) is strictly below this
    delta_bound: int


def corollary_bound(params: BoundParams, validate: bool = True) -> CorollaryBound:
    if validate:
        params.validate()
    m, C1, C2, D1, D2 = params.m, params.C1, params.C2, params.D1, params.D2
    by_rank = {
        3: lambda: 5 * C1 * m ** 2,
        4: lambda: 9 * C1 * m ** 2,
        5: lambda: 45 * C2 * m ** 3,
        6: lambda: max(45 * C2 * m ** 3, 5 * D1 * max(C1, C2) * m ** 2),
        7: lambda: max(5 * max(C1, D1) * max(C2, D2) * m ** 2, 200 * C2 * D2 * m ** 4),
    }
    if params.rank not in by_rank:
        raise InvariantViolation(f"rank must be 3..7, got {params.rank}")
    s = by_rank[params.rank]()
    return CorollaryBound(sqrt_bound=s, delta_bound=s * s)


# exact evaluation of the rank conditions


@dataclass(frozen=True)
class ConditionCheck:
    label: str
    holds: bool

    def to_dict(self) -> dict:
        return {"label": self.label, "holds": self.holds}


def _shifted(ctx, t: int) -> QuadRat:
    """t*omega - floor(t*omega')"""
    tw = ctx.omega() * t
    return tw - tw.floor(2)


def _ge(x: QuadRat, y) -> bool:
    return (x - y).sign(1) >= 0


def _max1(x: QuadRat, y: QuadRat) -> QuadRat:
    """Max in the first embedding"""
    return x if (x - y).sign(1) >= 0 else y


def rank_conditions(D: int, m: int, C1: int, C2: int, D1: int, D2: int
                     ) -> Dict[int, List[ConditionCheck]]:
    """Which displayed alternatives of the rank conditions hold for Q(sqrt D)

    Every alternative of the shape Delta <= 4 C m^2 (t omega - floor(t omega'))
    that holds is cross-checked against sqrt(Delta) < 4 C m^2 t + 1.
    """
    ctx = make_field(D)
    disc = ctx.disc
    s = ctx.sqrt_disc()
    w1, w2, wC2, wD2 = _shifted(ctx, 1), _shifted(ctx, 2), _shifted(ctx, C2), _shifted(ctx, D2)

    def shaped(C: int, t: int, shift: QuadRat) -> bool:
        holds = _ge(shift * (4 * C * m * m), disc)
        if holds and not disc < (4 * C * m * m * t + 1) ** 2:
            raise InvariantViolation(
                f"sqrt({disc}) >= 4*{C}*{m}^2*{t} + 1 although the inequality holds")
        return holds

    cubic_rhs = s * s * (36 * C2 * m ** 3) + s * (18 * C2 * m ** 3) + m ** 3
    cubic = _ge(cubic_rhs, s * s * s)
    quartic_rhs = (s * s * s * (192 * C2 * D2 * m ** 4) + s * s * (144 * C2 * D2 * m ** 4)
                   + s * (96 * max(C2, D2) * m ** 4) + m ** 4)
    quartic = _ge(quartic_rhs, s * s * s * s)
    c1_or_shift = _max1(QuadRat.from_scalar(C1, D), wC2)
    pair_max = _max1(wC2, wD2)

    r3 = shaped(C1, 1, w1)
    r4 = shaped(C1, 2, w2)
    r5a = shaped(C1, C2, wC2)
    r6c = _ge(c1_or_shift * (4 * D1 * m * m), disc)
    r7b = _ge(pair_max * (4 * max(C1, D1) * m * m), disc)
    if r7b:
        t = C2 if pair_max == wC2 else D2
        if not disc < (4 * max(C1, D1) * m * m * t + 1) ** 2:
            raise InvariantViolation("rank-7 shaped alternative breaks the square-root bound")
    return {
        3: [ConditionCheck("omega-floor", r3)],
        4: [ConditionCheck("2omega-floor", r4)],
        5: [ConditionCheck("C2omega-floor", r5a), ConditionCheck("cubic", cubic)],
        6: [ConditionCheck("C2omega-floor", r5a), ConditionCheck("cubic", cubic),
            ConditionCheck("D1-max", r6c)],
        7: [ConditionCheck("C1D1", disc <= 4 * C1 * D1 * m * m),
            ConditionCheck("max-max", r7b), ConditionCheck("cubic", cubic),
            ConditionCheck("quartic", quartic)],
    }
