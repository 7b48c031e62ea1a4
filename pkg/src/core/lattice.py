"""
O_F-lattices stored as rank-2n Z-modules with the multiplication-by-omega action
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from itertools import combinations
from math import lcm
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from src.core.enumeration import FinckePohst, outer_range, solve_rational
from src.core.errors import InvariantViolation, NotIntegral, NotTotallyPD, OutOfRange
from src.core.exactmat import ExactSymMat
from src.core.qfield import FieldCtx, QuadRat, enumerate_tp_by_trace
from src.core.search_manager import SearchManager

logger = logging.getLogger(__name__)

FormCoeffs = Dict[Tuple[int, int], QuadRat]


def p2_inverse_basis(ctx: FieldCtx) -> Tuple[QuadRat, QuadRat]:
    """Z-basis (1, theta) of the inverse of the prime above 2 for D = 10, 65"""
    if ctx.D == 10:
        return ctx.element(1), ctx.element(0, 1, 2)
    if ctx.D == 65:
        return ctx.element(1), (ctx.omega() + 1) / 2
    raise OutOfRange(f"p2inv_last shape is only defined for D = 10, 65, got D={ctx.D}")


def _flatten(ctx: FieldCtx, vec: Sequence[QuadRat]) -> List[Fraction]:
    out = []
    for x in vec:
        out.extend(x.to_omega_basis())
    return out


class OFLattice:
    """Totally positive definite O_F-lattice of O_F-rank n

    gram[i][j] = B(g_i, g_j) for the 2n Z-generators g_i, and
    omega * g_i = sum_j W[j][i] g_j.
    """

    __slots__ = ("ctx", "n", "gram", "W", "label", "_pairs", "_trace_form")

    def __init__(self, ctx: FieldCtx, gram: ExactSymMat, W: Sequence[Sequence[int]],
                 label: Optional[str] = None, validate: bool = True):
        if gram.k % 2:
            raise InvariantViolation(f"Z-rank {gram.k} is odd")
        self.ctx = ctx
        self.n = gram.k // 2
        self.gram = gram
        self.W = tuple(tuple(int(w) for w in row) for row in W)
        self.label = label
        L = reduce(lcm, (x.q for row in gram.entries for x in row), 1)
        A = [[x.a * (L // x.q) for x in row] for row in gram.entries]
        B = [[x.b * (L // x.q) for x in row] for row in gram.entries]
        self._pairs = (A, B, L)
        self._trace_form = None
        if validate:
            self.check_structure()
            self.check_integral()
            self.check_totally_pd()

    # construction

    @classmethod
    def from_module_basis(cls, ctx: FieldCtx, basis: Sequence[Sequence[QuadRat]],
                          form: ExactSymMat, label: Optional[str] = None,
                          validate: bool = True) -> OFLattice:
        """Lattice with Z-basis `basis` (vectors in F^n) inside the space with F-Gram `form`"""
        k = len(basis)
        n = form.k

        def bil(u, v):
            total = ctx.element(0)
            for i in range(n):
                if u[i].is_zero():
                    continue
                for j in range(n):
                    if not v[j].is_zero():
                        total = total + u[i] * form.entries[i][j] * v[j]
            return total

        gram = ExactSymMat([[bil(basis[a], basis[b]) for b in range(k)] for a in range(k)], ctx.D)
        flat = [_flatten(ctx, u) for u in basis]
        columns = [[flat[c][r] for c in range(k)] for r in range(2 * n)]
        omega = ctx.omega()
        W = [[0] * k for _ in range(k)]
        for i, u in enumerate(basis):
            coords = solve_rational(columns, _flatten(ctx, [omega * x for x in u]))
            for j, c in enumerate(coords):
                if c.denominator != 1:
                    raise InvariantViolation("Z-module is not closed under omega")
                W[j][i] = int(c)
        return cls(ctx, gram, W, label=label, validate=validate)

    # structure

    @property
    def rank2n(self) -> int:
        return 2 * self.n

    def check_structure(self):
        """W^2 = c1 W + c0 I and W^T G = omega G"""
        k, W, c = self.rank2n, self.W, self.ctx
        for i in range(k):
            for j in range(k):
                sq = sum(W[i][t] * W[t][j] for t in range(k))
                if sq != c.c1 * W[i][j] + (c.c0 if i == j else 0):
                    raise InvariantViolation("omega action violates its minimal polynomial")
        omega = c.omega()
        G = self.gram.entries
        for i in range(k):
            for j in range(k):
                lhs = c.element(0)
                for t in range(k):
                    if W[t][i]:
                        lhs = lhs + G[t][j] * W[t][i]
                if lhs != omega * G[i][j]:
                    raise InvariantViolation("omega action is not F-bilinear")

    def check_integral(self):
        G = self.gram.entries
        for i in range(self.rank2n):
            if not G[i][i].in_OF():
                raise NotIntegral(f"Q(g_{i}) = {G[i][i]} is not in O_F")
            for j in range(i):
                if not (G[i][j] * 2).in_OF():
                    raise NotIntegral(f"2B(g_{i}, g_{j}) = {G[i][j] * 2} is not in O_F")

    def trace_form(self) -> List[List[Fraction]]:
        if self._trace_form is None:
            self._trace_form = [[x.trace() for x in row] for row in self.gram.entries]
        return self._trace_form

    def coefficient_form(self) -> ExactSymMat:
        """n x n F-Gram on the first n generators that are independent over F

        The 2n x 2n gram has F-rank n, so it is never itself definite.
        """
        for idx in combinations(range(self.rank2n), self.n):
            if not self.gram.minor(idx).is_zero():
                return self.gram.principal(idx)
        raise InvariantViolation("generators do not span an F-space of rank n")

    def check_totally_pd(self):
        m = [row[:] for row in self.trace_form()]
        k = self.rank2n
        for c in range(k):
            if m[c][c] <= 0:
                raise NotTotallyPD(f"trace form fails at leading minor {c + 1}")
            for i in range(c + 1, k):
                f = m[i][c] / m[c][c]
                for j in range(c + 1, k):
                    m[i][j] -= f * m[c][j]

    # evaluation

    def q_value(self, coords: Sequence[int]) -> QuadRat:
        A, B, L = self._pairs
        a = b = 0
        for i, ci in enumerate(coords):
            if ci:
                a += ci * sum(r * cj for r, cj in zip(A[i], coords))
                b += ci * sum(r * cj for r, cj in zip(B[i], coords))
        return QuadRat(a, b, L, self.ctx.D)

    def bilinear(self, u: Sequence[int], v: Sequence[int]) -> QuadRat:
        G = self.gram.entries
        total = self.ctx.element(0)
        for i, ui in enumerate(u):
            if ui:
                for j, vj in enumerate(v):
                    if vj:
                        total = total + G[i][j] * (ui * vj)
        return total

    def omega_image(self, coords: Sequence[int]) -> Tuple[int, ...]:
        k = self.rank2n
        return tuple(sum(self.W[j][i] * coords[i] for i in range(k)) for j in range(k))

    def diagonal(self) -> List[QuadRat]:
        """Q of the generators b_i * 1"""
        return [self.gram.entries[2 * i][2 * i] for i in range(self.n)]

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "D": self.ctx.D,
            "n": self.n,
            "gram": self.gram.to_json(),
            "omega_action": [list(row) for row in self.W],
        }

    def __repr__(self) -> str:
        return f"OFLattice({self.label or 'unnamed'}, D={self.ctx.D}, n={self.n})"


def lattice_from_form(ctx: FieldCtx, coeffs: FormCoeffs, n: int = 3,
                      module_shape: str = "free", label: Optional[str] = None) -> OFLattice:
    """Lattice of the form sum_{i<=j} c_ij x_i x_j with x_i in O_F

    For module_shape "p2inv_last" the last variable runs over the inverse of
    the prime above 2 instead of O_F.
    """
    zero = ctx.element(0)
    rows = [[zero] * n for _ in range(n)]
    for (i, j), c in coeffs.items():
        if i > j:
            i, j = j, i
        if i == j:
            if not c.in_OF():
                raise NotIntegral(f"diagonal coefficient {c} is not in O_F")
            rows[i][i] = c
        else:
            rows[i][j] = rows[j][i] = c / 2
    form = ExactSymMat(rows, ctx.D)

    coefficient_bases = [(ctx.element(1), ctx.omega())] * n
    if module_shape == "p2inv_last":
        coefficient_bases[-1] = p2_inverse_basis(ctx)
    elif module_shape != "free":
        raise OutOfRange(f"unknown module shape {module_shape!r}")

    basis = []
    for i, (beta0, beta1) in enumerate(coefficient_bases):
        for beta in (beta0, beta1):
            basis.append([beta if j == i else zero for j in range(n)])
    return OFLattice.from_module_basis(ctx, basis, form, label=label)


# representation search


@dataclass(frozen=True)
class RepWitness:
    coords: Tuple[int, ...]
    value: QuadRat

    def to_dict(self) -> dict:
        return {"coords": list(self.coords), "value": self.value.format()}


def canonical_sign(v: Sequence[int]) -> Tuple[int, ...]:
    for x in v:
        if x:
            return tuple(v) if x > 0 else tuple(-y for y in v)
    return tuple(v)


def represents(L: OFLattice, alpha: QuadRat) -> Optional[RepWitness]:
    """Exhaustive search for Q(v) = alpha among vectors of trace-form value Tr(alpha)"""
    if not alpha.is_totally_positive():
        return None
    t = alpha.trace()
    fp = FinckePohst(L.trace_form())
    best = None
    for v in fp.vectors(t, lower=t):
        if L.q_value(v) != alpha:
            continue
        cand = canonical_sign(v)
        if best is None or cand < best:
            best = cand
    if best is None:
        return None
    witness = RepWitness(coords=best, value=L.q_value(best))
    if witness.value != alpha:
        raise InvariantViolation(f"witness {best} evaluates to {witness.value}, not {alpha}")
    return witness


def values_up_to_trace(L: OFLattice, T: int, outer: Optional[Iterable[int]] = None
                       ) -> Set[Tuple[int, int, int]]:
    """Keys (a, b, q) of Q(v) over nonzero v with Tr Q(v) <= T

    `outer` restricts the outermost coordinate; v and -v share a value, so the
    nonnegative outer values already give the full set.
    """
    fp = FinckePohst(L.trace_form())
    if outer is None:
        outer = [c for c in outer_range(fp, T) if c >= 0]
    values = set()
    for c in outer:
        for v in fp.vectors(T, first_coord=c):
            if any(v):
                x = L.q_value(v)
                values.add((x.a, x.b, x.q))
    return values


_box_lattice: Optional[OFLattice] = None
_box_bound = 0


def _init_values_worker(L: OFLattice, T: int):
    global _box_lattice, _box_bound
    _box_lattice, _box_bound = L, T


def _values_task(outer: List[int]) -> Set[Tuple[int, int, int]]:
    return values_up_to_trace(_box_lattice, _box_bound, outer)


@dataclass
class BoxReport:
    lattice: str
    trace_bound: int
    norm_bound: Optional[int]
    count_checked: int
    count_in_trace_box: int
    failures: List[QuadRat] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "lattice": self.lattice,
            "trace_bound": self.trace_bound,
            "norm_bound": self.norm_bound,
            "count_checked": self.count_checked,
            "count_in_trace_box": self.count_in_trace_box,
            "failures": [x.format() for x in self.failures],
        }


def check_box_universal(L: OFLattice, T: int, jobs: int = 1, norm_bound: Optional[int] = None,
                        manager: Optional[SearchManager] = None, chunk_size: int = 1) -> BoxReport:
    """Every totally positive alpha with Tr(alpha) <= T (and N(alpha) <= norm_bound) is represented

    Equivalent to calling represents on each target: the vectors of trace-form
    value <= T are enumerated once and their Q-values collected.
    """
    all_targets = enumerate_tp_by_trace(L.ctx, T)
    targets = all_targets if norm_bound is None else \
        [x for x in all_targets if x.norm() <= norm_bound]
    fp = FinckePohst(L.trace_form())
    outer = [c for c in outer_range(fp, T) if c >= 0]
    manager = manager or SearchManager(jobs)
    chunks = [outer[i:i + chunk_size] for i in range(0, len(outer), chunk_size)]
    values = set()
    for part in manager.map_ordered(_values_task, chunks, initializer=_init_values_worker,
                                    initargs=(L, T)):
        values.update(part)
    failures = [x for x in targets if (x.a, x.b, x.q) not in values]
    logger.info(f"{L.label or 'lattice'}: {len(targets)} targets up to trace {T}, "
                f"{len(failures)} not represented")
    return BoxReport(lattice=L.label or "unnamed", trace_bound=T, norm_bound=norm_bound,
                     count_checked=len(targets), count_in_trace_box=len(all_targets),
                     failures=failures)
