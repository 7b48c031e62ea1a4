"""
Exact arithmetic in real quadratic fields Q(sqrt D)
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt
from typing import List, Optional, Tuple, Union

from sympy import factorint

from src.core.errors import NotSquarefree, OutOfRange, ParseError, VariantMismatch

Scalar = Union[int, Fraction]


@dataclass(frozen=True)
class FieldCtx:
    """Q(sqrt D) with its ring of integers Z[omega]"""
    D: int
    disc: int
    omega_kind: str  # "half": omega = (1 + sqrt D)/2, "whole": omega = sqrt D
    c0: int  # omega^2 = c1*omega + c0
    c1: int

    @property
    def is_one_mod_four(self) -> bool:
        return self.omega_kind == "half"

    def omega(self) -> QuadRat:
        if self.is_one_mod_four:
            return QuadRat(1, 1, 2, self.D)
        return QuadRat(0, 1, 1, self.D)

    def sqrt_d(self) -> QuadRat:
        return QuadRat(0, 1, 1, self.D)

    def sqrt_disc(self) -> QuadRat:
        """omega - omega' as an element of F"""
        w = self.omega()
        return w - w.conj()

    def element(self, a: int, b: int = 0, q: int = 1) -> QuadRat:
        return QuadRat(a, b, q, self.D)

    def from_omega(self, x: Scalar, y: Scalar) -> QuadRat:
        """x + y*omega"""
        return QuadRat.from_scalar(x, self.D) + self.omega() * y

    def parse(self, text: str, line: int = 0) -> QuadRat:
        return QuadRat.parse(text, self.D, line)


@lru_cache(maxsize=None)
def make_field(D: int) -> FieldCtx:
    """Build the field context, rejecting non-squarefree radicands"""
    if not isinstance(D, int) or D <= 1:
        raise OutOfRange(f"D must be an integer > 1, got {D!r}")
    square_factors = [p for p, e in factorint(D).items() if e > 1]
    if square_factors:
        raise NotSquarefree(f"D={D} is divisible by {square_factors[0]}^2")

    if D % 4 == 1:
        ctx = FieldCtx(D=D, disc=D, omega_kind="half", c0=(D - 1) // 4, c1=1)
    else:
        ctx = FieldCtx(D=D, disc=4 * D, omega_kind="whole", c0=D, c1=0)

    diff = ctx.sqrt_disc()
    if diff * diff != ctx.disc:
        raise AssertionError(f"(omega - omega')^2 != disc for D={D}")
    return ctx


class QuadRat:
    """The element (a + b*sqrt(D)) / q, kept in lowest terms with q > 0"""

    __slots__ = ("a", "b", "q", "D")

    def __init__(self, a: int, b: int, q: int, D: int):
        if q == 0:
            raise ZeroDivisionError("QuadRat with zero denominator")
        if q < 0:
            a, b, q = -a, -b, -q
        g = gcd(gcd(a, b), q)
        if g > 1:
            a, b, q = a // g, b // g, q // g
        self.a = a
        self.b = b
        self.q = q
        self.D = D

    # construction helpers

    @classmethod
    def from_scalar(cls, x: Scalar, D: int) -> QuadRat:
        x = Fraction(x)
        return cls(x.numerator, 0, x.denominator, D)

    @classmethod
    def parse(cls, text: str, D: int, line: int = 0) -> QuadRat:
        """Parse the textual syntax "a,b,q" (q optional, defaults to 1)"""
        parts = [p.strip() for p in text.strip().split(",")]
        if len(parts) == 2:
            parts.append("1")
        if len(parts) != 3:
            raise ParseError(f"expected 'a,b,q', got {text.strip()!r}", line)
        try:
            a, b, q = (int(p) for p in parts)
        except ValueError:
            raise ParseError(f"non-integer component in {text.strip()!r}", line)
        if q <= 0:
            raise ParseError(f"denominator must be positive in {text.strip()!r}", line)
        return cls(a, b, q, D)

    def format(self) -> str:
        return f"{self.a},{self.b},{self.q}"

    # arithmetic

    def _coerce(self, other) -> QuadRat:
        if isinstance(other, QuadRat):
            if other.D != self.D:
                raise ValueError(f"mixing Q(sqrt {self.D}) and Q(sqrt {other.D})")
            return other
        if isinstance(other, (int, Fraction)):
            return QuadRat.from_scalar(other, self.D)
        return NotImplemented

    def __add__(self, other) -> QuadRat:
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if self.q == o.q:
            return QuadRat(self.a + o.a, self.b + o.b, self.q, self.D)
        return QuadRat(self.a * o.q + o.a * self.q, self.b * o.q + o.b * self.q,
                       self.q * o.q, self.D)

    __radd__ = __add__

    def __neg__(self) -> QuadRat:
        return QuadRat(-self.a, -self.b, self.q, self.D)

    def __sub__(self, other) -> QuadRat:
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other) -> QuadRat:
        return (-self) + other

    def __mul__(self, other) -> QuadRat:
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadRat(self.a * o.a + self.b * o.b * self.D,
                       self.a * o.b + self.b * o.a,
                       self.q * o.q, self.D)

    __rmul__ = __mul__

    def __truediv__(self, other) -> QuadRat:
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        n = o.a * o.a - o.b * o.b * self.D
        if n == 0:
            raise ZeroDivisionError("division by zero in Q(sqrt D)")
        # x / y = x * conj(y) * q_y / (a_y^2 - b_y^2 D)
        num = self * QuadRat(o.a, -o.b, 1, self.D)
        return QuadRat(num.a * o.q, num.b * o.q, num.q * n, self.D)

    def __rtruediv__(self, other) -> QuadRat:
        return QuadRat.from_scalar(other, self.D) / self

    def __pow__(self, e: int) -> QuadRat:
        result = QuadRat(1, 0, 1, self.D)
        base = self
        while e > 0:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, QuadRat):
            return (self.a, self.b, self.q, self.D) == (other.a, other.b, other.q, other.D)
        if isinstance(other, (int, Fraction)):
            return self.b == 0 and Fraction(self.a, self.q) == other
        return NotImplemented

    def __hash__(self) -> int:
        if self.b == 0:
            return hash(Fraction(self.a, self.q))
        return hash((self.a, self.b, self.q, self.D))

    def __repr__(self) -> str:
        return f"QuadRat({self.a}, {self.b}, {self.q}, D={self.D})"

    def __str__(self) -> str:
        if self.b == 0:
            body = str(self.a)
        else:
            sign = "+" if self.b > 0 else "-"
            coef = "" if abs(self.b) == 1 else str(abs(self.b))
            body = f"{self.a}{sign}{coef}sqrt{self.D}" if self.a else \
                f"{'-' if self.b < 0 else ''}{coef}sqrt{self.D}"
        return body if self.q == 1 else f"({body})/{self.q}"

    # field structure

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def is_rational(self) -> bool:
        return self.b == 0

    def conj(self) -> QuadRat:
        return QuadRat(self.a, -self.b, self.q, self.D)

    def norm(self) -> Fraction:
        return Fraction(self.a * self.a - self.b * self.b * self.D, self.q * self.q)

    def trace(self) -> Fraction:
        return Fraction(2 * self.a, self.q)

    def to_omega_basis(self) -> Tuple[Fraction, Fraction]:
        """Coordinates (x, y) with self = x + y*omega"""
        if self.D % 4 == 1:
            y = Fraction(2 * self.b, self.q)
            return Fraction(self.a - self.b, self.q), y
        return Fraction(self.a, self.q), Fraction(self.b, self.q)

    def in_OF(self) -> bool:
        if self.q == 1:
            return True
        return self.D % 4 == 1 and self.q == 2 and (self.a - self.b) % 2 == 0

    def in_half_OF(self) -> bool:
        return (self * 2).in_OF()

    # order structure

    def sign(self, emb: int = 1) -> int:
        """Exact sign of the embedding sigma_emb, no floating point"""
        a = self.a
        b = self.b if emb == 1 else -self.b
        if b == 0:
            return (a > 0) - (a < 0)
        if a == 0:
            return 1 if b > 0 else -1
        if a > 0 and b > 0:
            return 1
        if a < 0 and b < 0:
            return -1
        # opposite signs: compare a^2 with b^2 D, never equal for squarefree D > 1
        dominant_a = a * a > b * b * self.D
        if a > 0:
            return 1 if dominant_a else -1
        return -1 if dominant_a else 1

    def is_totally_positive(self) -> bool:
        return self.sign(1) > 0 and self.sign(2) > 0

    def is_totally_nonnegative(self) -> bool:
        return self.sign(1) >= 0 and self.sign(2) >= 0

    def floor(self, emb: int = 1) -> int:
        """n with n <= sigma_emb(self) < n + 1, by integer square roots"""
        c = self.b if emb == 1 else -self.b
        if c == 0:
            return self.a // self.q
        root = isqrt(c * c * self.D)
        whole = self.a + root if c > 0 else self.a - root - 1
        return whole // self.q

    def to_float(self, emb: int = 1) -> float:
        """Display and pre-filtering only"""
        s = self.D ** 0.5
        b = self.b if emb == 1 else -self.b
        return (self.a + b * s) / self.q


# module-level API


def norm(x: QuadRat) -> Fraction:
    return x.norm()


def trace(x: QuadRat) -> Fraction:
    return x.trace()


def conj(x: QuadRat) -> QuadRat:
    return x.conj()


def sign_embed(x: QuadRat, emb: int) -> int:
    return x.sign(emb)


def is_totally_positive(x: QuadRat) -> bool:
    return x.is_totally_positive()


def floor_embed(x: QuadRat, emb: int) -> int:
    return x.floor(emb)


def totally_le(x: QuadRat, y: QuadRat) -> bool:
    """x is totally less than or equal to y"""
    return (y - x).is_totally_nonnegative()


def totally_lt(x: QuadRat, y: QuadRat) -> bool:
    return (y - x).is_totally_positive()


def ceil_multiple_sqrt(ctx: FieldCtx, j: int) -> int:
    """ceil(j*sqrt D); j*sqrt D is irrational for j >= 1"""
    return isqrt(j * j * ctx.D) + 1


def odd_ceil_sqrt(ctx: FieldCtx, j: int) -> int:
    """Smallest odd integer above j*sqrt D"""
    if j < 1:
        raise OutOfRange(f"j must be positive, got {j}")
    n = ceil_multiple_sqrt(ctx, j)
    return n if n % 2 else n + 1


def make_alpha(ctx: FieldCtx, j: int, variant: str = "whole") -> QuadRat:
    """alpha_j = ceil(j sqrt D) + j sqrt D, or (ceil_odd(j sqrt D) + j sqrt D)/2"""
    if j < 1:
        raise OutOfRange(f"j must be positive, got {j}")
    if variant == "whole":
        return ctx.element(ceil_multiple_sqrt(ctx, j), j)
    if variant == "half":
        if not ctx.is_one_mod_four:
            raise VariantMismatch(f"half variant needs D = 1 mod 4, got D={ctx.D}")
        return ctx.element(odd_ceil_sqrt(ctx, j), j, 2)
    raise VariantMismatch(f"unknown variant {variant!r}")


def enumerate_tp_by_trace(ctx: FieldCtx, T: int,
                          norm_bound: Optional[int] = None) -> List[QuadRat]:
    """All totally positive alpha in O_F with trace <= T (and norm <= norm_bound)

    alpha = (t + y sqrt(disc))/2 with t its trace, so alpha >> 0 iff t^2 > y^2 disc.
    Sorted by (trace, norm, sqrt D coefficient).
    """
    out = []
    for t in range(1, T + 1):
        ymax = isqrt((t * t - 1) // ctx.disc) if t * t > ctx.disc else 0
        for y in range(-ymax, ymax + 1):
            if y * y * ctx.disc >= t * t:
                continue
            if (t - ctx.c1 * y) % 2:
                continue
            alpha = ctx.from_omega((t - ctx.c1 * y) // 2, y)
            if norm_bound is not None and alpha.norm() > norm_bound:
                continue
            out.append(alpha)
    out.sort(key=lambda x: (x.trace(), x.norm(), Fraction(x.b, x.q)))
    return out
