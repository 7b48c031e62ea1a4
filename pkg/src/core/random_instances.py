"""
Seeded random instances for development and testing
"""

import logging
import random
from fractions import Fraction
from typing import List, Optional

from src.core.exactmat import ExactSymMat
from src.core.qfield import FieldCtx, QuadRat

logger = logging.getLogger(__name__)


class RandomInstanceGenerator:
    """Generates field elements, matrices and Gram matrices from one seed"""

    def __init__(self, seed: Optional[int] = None):
        self.seed = seed if seed is not None else random.randrange(2 ** 32)
        self.rng = random.Random(self.seed)
        logger.info(f"RandomInstanceGenerator seed={self.seed}")

    def integer(self, bound: int = 20) -> int:
        return self.rng.randint(-bound, bound)

    def element(self, ctx: FieldCtx, bound: int = 20, max_den: int = 6) -> QuadRat:
        """Random (a + b sqrt D)/q"""
        return ctx.element(self.integer(bound), self.integer(bound), self.rng.randint(1, max_den))

    def integral_element(self, ctx: FieldCtx, bound: int = 10) -> QuadRat:
        return ctx.from_omega(self.integer(bound), self.integer(bound))

    def symmetric(self, ctx: FieldCtx, k: int, bound: int = 10, max_den: int = 1) -> ExactSymMat:
        rows = [[ctx.element(0)] * k for _ in range(k)]
        for i in range(k):
            for j in range(i, k):
                x = self.element(ctx, bound, max_den)
                rows[i][j] = rows[j][i] = x
        return ExactSymMat(rows, ctx.D)

    def gram(self, ctx: FieldCtx, k: int, dim: int, bound: int = 4) -> ExactSymMat:
        """X^T X for a random dim x k integral X: totally PSD of rank <= dim"""
        X = [[self.integral_element(ctx, bound) for _ in range(k)] for _ in range(dim)]
        zero = ctx.element(0)
        rows = [[zero] * k for _ in range(k)]
        for i in range(k):
            for j in range(i, k):
                total = zero
                for r in range(dim):
                    total = total + X[r][i] * X[r][j]
                rows[i][j] = rows[j][i] = total
        return ExactSymMat(rows, ctx.D)

    def ternary_integer_gram(self, bound: int = 6) -> List[List[int]]:
        """Positive definite 3x3 integer Gram matrix"""
        while True:
            M = [[self.rng.randint(-bound, bound) for _ in range(3)] for _ in range(3)]
            G = [[sum(M[r][i] * M[r][j] for r in range(3)) for j in range(3)] for i in range(3)]
            det = (G[0][0] * (G[1][1] * G[2][2] - G[1][2] * G[2][1])
                   - G[0][1] * (G[1][0] * G[2][2] - G[1][2] * G[2][0])
                   + G[0][2] * (G[1][0] * G[2][1] - G[1][1] * G[2][0]))
            if det > 0:
                return G

    def rational(self, bound: int = 50, max_den: int = 12) -> Fraction:
        num = self.integer(bound) or 1
        return Fraction(num, self.rng.randint(1, max_den))
