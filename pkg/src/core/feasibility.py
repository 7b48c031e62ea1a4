"""
Gram-matrix feasibility search

Decides whether some ternary O_F-lattice can represent every element of a
finite set S at once, by an exhaustive depth-first search over totally
positive semidefinite Gram matrices of rank at most 3 with diagonal S.

Entries are carried as integer pairs (x, y) = scale * (off-diagonal value),
standing for x + y*sqrt(D), so every minor is a fraction-free Bareiss
determinant over Z[sqrt D].
"""

from __future__ import annotations

import logging
import time
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import ceil, floor, lcm, sqrt
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import pandas as pd
from sympy import Matrix

from src.core.catalog import (ADMISSIBLE_D, EXCEPTIONS_ONE_MOD_FOUR, EXCEPTIONS_OTHER,
                              PROVEN_RANGE_ONE_MOD_FOUR, PROVEN_RANGE_OTHER, catalog_list,
                              suite_elements)
from src.core.checkpoint import CheckpointManager
from src.core.config import SearchConfig
from src.core.enumeration import FinckePohst, hermite_rows
from src.core.errors import AdmissibleD, NotIntegral, NotSquarefree, NotTotallyPD, RankNot3
from src.core.exactmat import ExactSymMat, is_totally_psd, pair_det, pair_sign, rank
from src.core.lattice import OFLattice, canonical_sign
from src.core.qfield import FieldCtx, QuadRat, make_field
from src.core.search_manager import NO_HIT, SearchManager

logger = logging.getLogger(__name__)

Pair = Tuple[int, int]
ZERO: Pair = (0, 0)

# work units are the search-tree prefixes of this depth
UNIT_DEPTH = 2
# how often (in nodes) a walker looks at its deadline and the shared hit flag
POLL_MASK = 1023

FEASIBLE = "Feasible"
INFEASIBLE = "Infeasible"
INCONCLUSIVE = "Inconclusive"


# candidate off-diagonal values


def entry_scale(ctx: FieldCtx, classical: bool) -> int:
    """Smallest s with s * (allowed off-diagonal ring) and s * O_F inside Z[sqrt D]"""
    if ctx.is_one_mod_four:
        return 2 if classical else 4
    return 1 if classical else 2


def offdiag_candidates(ctx: FieldCtx, ai: QuadRat, aj: QuadRat, classical: bool) -> List[QuadRat]:
    """All beta in O_F (classical) or 1/2 O_F with beta^2 <= ai*aj in both embeddings

    gamma = s*beta is enumerated as x + y*omega; the float windows are widened
    by 2 and every candidate is confirmed exactly.
    """
    s = 1 if classical else 2
    P = ai * aj
    P1, P2 = max(P.to_float(1), 0.0), max(P.to_float(2), 0.0)
    w1, w2 = ctx.omega().to_float(1), ctx.omega().to_float(2)
    limit = s * s * P

    # rational integers only when the window is narrower than sqrt(disc)/2
    window = ctx.element(ctx.disc, 0, 4 if classical else 16)
    if (window - P).is_totally_positive():
        y_max = 0
    else:
        y_max = floor(s * (sqrt(P1) + sqrt(P2)) / sqrt(ctx.disc)) + 2

    out = []
    for y in range(-y_max, y_max + 1):
        lo = max(-s * sqrt(P1) - y * w1, -s * sqrt(P2) - y * w2)
        hi = min(s * sqrt(P1) - y * w1, s * sqrt(P2) - y * w2)
        for x in range(ceil(lo) - 2, floor(hi) + 3):
            gamma = ctx.from_omega(x, y)
            if (limit - gamma * gamma).is_totally_nonnegative():
                out.append((x, y, gamma / s))
    out.sort(key=lambda t: (t[0], t[1]))
    return [beta for _, _, beta in out]


# problem and outcome types


@dataclass
class FeasibilityProblem:
    ctx: FieldCtx
    S: List[QuadRat]
    classical: bool = False
    node_budget: int = 10 ** 9
    time_budget_s: float = 3600.0

    def __post_init__(self):
        if not self.S:
            raise NotTotallyPD("the element set is empty")
        for x in self.S:
            if x.D != self.ctx.D:
                raise NotIntegral(f"{x} does not live in Q(sqrt {self.ctx.D})")
            if not x.in_OF():
                raise NotIntegral(f"{x} is not in O_F")
            if not x.is_totally_positive():
                raise NotTotallyPD(f"{x} is not totally positive")

    @property
    def k(self) -> int:
        return len(self.S)

    def describe(self) -> dict:
        return {
            "D": self.ctx.D,
            "S": [x.format() for x in self.S],
            "classical": self.classical,
            "node_budget": self.node_budget,
        }


@dataclass
class SearchStats:
    nodes: int = 0
    prunes: Dict[str, int] = field(default_factory=dict)
    units_total: int = 0
    units_done: int = 0

    def to_dict(self) -> dict:
        return {
            "nodes": self.nodes,
            "prunes": dict(sorted(self.prunes.items())),
            "units_total": self.units_total,
            "units_done": self.units_done,
        }


@dataclass
class FeasibilityOutcome:
    status: str
    stats: SearchStats
    witness: Optional[ExactSymMat] = None
    witnesses: List[ExactSymMat] = field(default_factory=list)
    reason: Optional[str] = None
    saturated: bool = False

    @property
    def is_feasible(self) -> bool:
        return self.status == FEASIBLE

    def to_dict(self) -> dict:
        out = {"status": self.status}
        if self.witness is not None:
            out["witness"] = self.witness.to_json()
        if self.reason:
            out["reason"] = self.reason
        out["stats"] = self.stats.to_dict()
        return out


# search plan: everything a worker needs, as plain picklable data


@dataclass(frozen=True)
class SearchPlan:
    D: int
    scale: int
    classical: bool
    order: Tuple[int, ...]  # search position -> index into S
    diag: Tuple[Pair, ...]
    entries: Tuple[Tuple[int, int], ...]
    candidates: Tuple[Tuple[Pair, ...], ...]
    nonneg: Tuple[Tuple[Pair, ...], ...]
    psd_sets: Tuple[Tuple[Tuple[int, ...], ...], ...]
    zero_sets: Tuple[Tuple[Tuple[int, ...], ...], ...]
    symmetry: bool

    @property
    def k(self) -> int:
        return len(self.diag)


def _to_pair(x: QuadRat, scale: int) -> Pair:
    y = x * scale
    if y.q != 1:
        raise NotIntegral(f"{x} scaled by {scale} is not in Z[sqrt D]")
    return (y.a, y.b)


def column_order(S: Sequence[QuadRat], how: str) -> List[int]:
    idx = list(range(len(S)))
    if how == "descending":
        return sorted(idx, key=lambda i: (-S[i].norm(), i))
    if how == "ascending":
        return sorted(idx, key=lambda i: (S[i].norm(), i))
    return idx


def build_plan(problem: FeasibilityProblem, how: str = "descending",
               symmetry: bool = True) -> SearchPlan:
    ctx = problem.ctx
    scale = entry_scale(ctx, problem.classical)
    order = column_order(problem.S, how)
    S = [problem.S[i] for i in order]
    k = len(S)
    entries, candidates, nonneg, psd_sets, zero_sets = [], [], [], [], []
    for j in range(1, k):
        for i in range(j):
            entries.append((i, j))
            pairs = tuple(_to_pair(b, scale) for b in
                          offdiag_candidates(ctx, S[i], S[j], problem.classical))
            candidates.append(pairs)
            nonneg.append(tuple(p for p in pairs if pair_sign(p, ctx.D, 1) >= 0))
            sets = {(l, i, j) for l in range(i)}
            if i >= 1:
                sets.add(tuple(range(i + 1)) + (j,))
            psd_sets.append(tuple(sorted(sets, key=lambda t: (len(t), t))))
            zero_sets.append(tuple((a, b, i, j) for a, b in combinations(range(i), 2)))
    return SearchPlan(D=ctx.D, scale=scale, classical=problem.classical, order=tuple(order),
                      diag=tuple(_to_pair(x, scale) for x in S), entries=tuple(entries),
                      candidates=tuple(candidates), nonneg=tuple(nonneg),
                      psd_sets=tuple(psd_sets), zero_sets=tuple(zero_sets), symmetry=symmetry)


def plan_matrix(plan: SearchPlan, values: Sequence[Pair]) -> ExactSymMat:
    """Gram matrix in the problem's own element order"""
    k = plan.k
    M = [[ZERO] * k for _ in range(k)]
    for p, d in enumerate(plan.diag):
        M[p][p] = d
    for (i, j), v in zip(plan.entries, values):
        M[i][j] = M[j][i] = tuple(v)
    pos = {orig: p for p, orig in enumerate(plan.order)}
    rows = [[QuadRat(*M[pos[r]][pos[c]], plan.scale, plan.D) for c in range(k)] for r in range(k)]
    return ExactSymMat(rows, plan.D)


def audit_witness(G: ExactSymMat, S: Sequence[QuadRat], classical: bool) -> bool:
    """Totally PSD, rank <= 3, diagonal S, off-diagonals in the allowed ring"""
    if G.diag() != list(S):
        return False
    for i in range(G.k):
        for j in range(i + 1, G.k):
            x = G.entries[i][j]
            if not (x.in_OF() if classical else x.in_half_OF()):
                return False
    return rank(G) <= 3 and is_totally_psd(G)


# depth-first walker


class _Stop(Exception):
    def __init__(self, status: str):
        super().__init__(status)
        self.status = status


class _Walker:
    """Assigns entries in plan order; one node per tried value"""

    def __init__(self, plan: SearchPlan, cap: int, deadline: Optional[float] = None,
                 halt: Optional[Callable[[], bool]] = None):
        self.plan = plan
        self.M = [[ZERO] * plan.k for _ in range(plan.k)]
        for p, d in enumerate(plan.diag):
            self.M[p][p] = d
        self.cap = cap
        self.deadline = deadline
        self.halt = halt
        self.nodes = 0
        self.prunes: Counter = Counter()

    def place(self, depth: int, value: Pair):
        i, j = self.plan.entries[depth]
        self.M[i][j] = self.M[j][i] = value

    def values(self, depth: int) -> Tuple[Pair, ...]:
        return tuple(self.M[i][j] for i, j in self.plan.entries[:depth])

    def _tick(self):
        self.nodes += 1
        if self.nodes > self.cap:
            raise _Stop("capped")
        if not self.nodes & POLL_MASK:
            if self.deadline is not None and time.time() > self.deadline:
                raise _Stop("timeout")
            if self.halt is not None and self.halt():
                raise _Stop("skipped")

    def _minor(self, idx: Sequence[int]) -> Pair:
        M = self.M
        return pair_det([[M[r][c] for c in idx] for r in idx], self.plan.D)

    def _violation(self, depth: int) -> Optional[str]:
        D = self.plan.D
        for idx in self.plan.zero_sets[depth]:
            if self._minor(idx) != ZERO:
                return "rank"
        for idx in self.plan.psd_sets[depth]:
            d = self._minor(idx)
            if pair_sign(d, D, 1) < 0 or pair_sign(d, D, 2) < 0:
                return "psd"
        return None

    def walk(self, depth: int, stop: int, emit: Callable[[], bool]) -> bool:
        if depth == stop:
            return emit()
        plan = self.plan
        i, j = plan.entries[depth]
        # first nonzero entry of each column is positive in the first embedding
        if plan.symmetry and all(self.M[l][j] == ZERO for l in range(i)):
            options = plan.nonneg[depth]
            self.prunes["symmetry"] += len(plan.candidates[depth]) - len(options)
        else:
            options = plan.candidates[depth]
        for value in options:
            self._tick()
            self.place(depth, value)
            reason = self._violation(depth)
            if reason:
                self.prunes[reason] += 1
                continue
            if self.walk(depth + 1, stop, emit):
                return True
        self.place(depth, ZERO)
        return False


@dataclass
class UnitResult:
    index: int
    status: str  # exhausted, found, saturated, capped, timeout, skipped
    nodes: int
    prunes: Dict[str, int]
    witnesses: List[List[List[int]]]

    @property
    def complete(self) -> bool:
        return self.status in ("exhausted", "found", "saturated")

    def to_dict(self) -> dict:
        return {"index": self.index, "status": self.status, "nodes": self.nodes,
                "prunes": self.prunes, "witnesses": self.witnesses}

    @classmethod
    def from_dict(cls, data: dict) -> UnitResult:
        return cls(index=data["index"], status=data["status"], nodes=data["nodes"],
                   prunes=dict(data["prunes"]), witnesses=data["witnesses"])


def run_unit(plan: SearchPlan, index: int, prefix: Sequence[Pair], first_hit: bool,
             cap: int, witness_cap: int, deadline: Optional[float] = None,
             hit=None) -> UnitResult:
    """Exhaust the subtree below one prefix"""

    def halt() -> bool:
        return hit is not None and hit.value < index

    if first_hit and halt():
        return UnitResult(index, "skipped", 0, {}, [])
    walker = _Walker(plan, cap, deadline, halt if first_hit else None)
    for depth, value in enumerate(prefix):
        walker.place(depth, tuple(value))
    witnesses: List[List[List[int]]] = []
    stop = len(plan.entries)

    def emit() -> bool:
        values = walker.values(stop)
        G = plan_matrix(plan, values)
        if not audit_witness(G, G.diag(), plan.classical):
            walker.prunes["audit"] += 1
            return False
        witnesses.append([list(v) for v in values])
        if first_hit:
            return True
        if len(witnesses) >= witness_cap:
            raise _Stop("saturated")
        return False

    status = "exhausted"
    try:
        if walker.walk(len(prefix), stop, emit):
            status = "found"
            if hit is not None:
                with hit.get_lock():
                    if index < hit.value:
                        hit.value = index
    except _Stop as e:
        status = e.status
    return UnitResult(index, status, walker.nodes, dict(walker.prunes), witnesses)


def work_units(plan: SearchPlan, cap: int) -> Tuple[List[Tuple[Pair, ...]], _Walker, bool]:
    """Prefixes of depth <= UNIT_DEPTH surviving pruning, the walker that counted them,
    and whether the prefix level finished inside the cap"""
    depth = min(UNIT_DEPTH, len(plan.entries))
    walker = _Walker(plan, cap)
    prefixes: List[Tuple[Pair, ...]] = []

    def collect() -> bool:
        prefixes.append(walker.values(depth))
        return False

    try:
        walker.walk(0, depth, collect)
    except _Stop:
        return prefixes, walker, False
    return prefixes, walker, True


# worker-process state for the pool

_worker_plan: Optional[SearchPlan] = None
_worker_hit = None


def _init_worker(plan: SearchPlan, hit):
    global _worker_plan, _worker_hit
    _worker_plan = plan
    _worker_hit = hit


def _run_task(task) -> UnitResult:
    index, prefix, first_hit, cap, witness_cap, deadline = task
    return run_unit(_worker_plan, index, prefix, first_hit, cap, witness_cap, deadline, _worker_hit)


def _search(problem: FeasibilityProblem, config: SearchConfig, jobs: int, first_hit: bool,
            checkpoint_path: Optional[str] = None,
            manager: Optional[SearchManager] = None) -> FeasibilityOutcome:
    plan = build_plan(problem, config.column_order, config.symmetry_reduction)
    budget = problem.node_budget
    deadline = time.time() + problem.time_budget_s
    prefixes, prefix_walker, complete = work_units(plan, budget)
    stats = SearchStats(nodes=prefix_walker.nodes, prunes=Counter(prefix_walker.prunes),
                        units_total=len(prefixes))
    if not complete:
        stats.prunes = dict(stats.prunes)
        logger.info(f"D={problem.ctx.D}: node budget spent before the work units were laid out")
        return FeasibilityOutcome(status=INCONCLUSIVE, stats=stats, reason="node_budget")
    cap = max(budget - prefix_walker.nodes, 0)

    checkpoint = None
    done: Dict[int, dict] = {}
    if checkpoint_path:
        description = dict(problem.describe(), mode="first" if first_hit else "all",
                           column_order=config.column_order, symmetry=config.symmetry_reduction,
                           witness_cap=config.classify_cap)
        checkpoint = CheckpointManager(checkpoint_path, description, config.checkpoint_interval_s)
        done = checkpoint.load()

    own_manager = manager is None
    manager = manager or SearchManager(jobs, progress_interval_s=config.progress_interval_s)
    hit = manager.new_flag(NO_HIT)
    for index, record in done.items():
        if record["status"] == "found" and index < hit.value:
            hit.value = index
    tasks = [(u, prefixes[u], first_hit, cap, config.classify_cap, deadline)
             for u in range(len(prefixes)) if u not in done]
    fresh = manager.map_ordered(_run_task, tasks, initializer=_init_worker, initargs=(plan, hit))

    status, reason = INFEASIBLE, None
    found: List[List[List[int]]] = []
    saturated = False
    label = f"D={problem.ctx.D} k={problem.k}"
    try:
        for u in range(len(prefixes)):
            result = UnitResult.from_dict(done[u]) if u in done else next(fresh)
            if result.status == "skipped":
                break
            stats.nodes += result.nodes
            stats.prunes.update(result.prunes)
            if result.status in ("capped", "timeout"):
                status, reason = INCONCLUSIVE, \
                    "node_budget" if result.status == "capped" else "time_budget"
                break
            if checkpoint is not None and u not in done:
                checkpoint.record(result.to_dict())
            stats.units_done += 1
            manager.report(label, stats.units_done, stats.units_total, stats.nodes)
            if stats.nodes > budget:
                status, reason = INCONCLUSIVE, "node_budget"
                break
            if time.time() > deadline:
                status, reason = INCONCLUSIVE, "time_budget"
                break
            found.extend(result.witnesses)
            if first_hit and result.status == "found":
                status = FEASIBLE
                break
            if len(found) >= config.classify_cap:
                saturated = True
                found = found[:config.classify_cap]
                break
    finally:
        fresh.close()
        if own_manager:
            manager.stop()
        if checkpoint is not None:
            checkpoint.close()

    stats.prunes = dict(stats.prunes)
    if found and status != INCONCLUSIVE:
        status = FEASIBLE
    witnesses = [plan_matrix(plan, w) for w in found]
    outcome = FeasibilityOutcome(status=status, stats=stats,
                                 witness=witnesses[0] if witnesses else None,
                                 witnesses=witnesses, reason=reason, saturated=saturated)
    if outcome.witness is not None and not audit_witness(outcome.witness, problem.S,
                                                         problem.classical):
        raise NotTotallyPD("reported witness fails the final audit")
    logger.info(f"{label}: {status} after {stats.nodes} nodes")
    return outcome


def search_rank_le3(problem: FeasibilityProblem, config: Optional[SearchConfig] = None,
                    jobs: int = 1, checkpoint_path: Optional[str] = None,
                    manager: Optional[SearchManager] = None) -> FeasibilityOutcome:
    """First witness in canonical order, or Infeasible once the tree is exhausted"""
    return _search(problem, config or SearchConfig(), jobs, True, checkpoint_path, manager)


# nonexistence suite


@dataclass
class SuiteVerdict:
    D: int
    tier: str
    elements: List[QuadRat]
    classical: bool
    outcome: FeasibilityOutcome
    in_proven_range: bool

    def to_dict(self) -> dict:
        out = {"D": self.D, "tier": self.tier, "classical": self.classical,
               "elements": [x.format() for x in self.elements],
               "in_proven_range": self.in_proven_range}
        out.update(self.outcome.to_dict())
        return out


def in_proven_range(D: int) -> bool:
    if D % 4 == 1:
        return 1 < D < PROVEN_RANGE_ONE_MOD_FOUR
    return 1 < D < PROVEN_RANGE_OTHER


def nonexistence_suite(D: int, tier: str = "prescribed", classical: bool = False,
                       config: Optional[SearchConfig] = None, jobs: int = 1,
                       checkpoint_path: Optional[str] = None,
                       elements: Optional[List[QuadRat]] = None,
                       manager: Optional[SearchManager] = None) -> SuiteVerdict:
    """Run the feasibility search on the element set the nonexistence results assign D"""
    ctx = make_field(D)
    if D in ADMISSIBLE_D:
        raise AdmissibleD(f"D={D} admits a universal ternary lattice")
    config = config or SearchConfig()
    in_range = in_proven_range(D)
    if not in_range:
        logger.warning(f"D={D} lies outside the range the nonexistence results cover")
    if elements is not None:
        tier, S = "file", elements
    else:
        tier, S = suite_elements(D, tier)
    problem = FeasibilityProblem(ctx, S, classical=classical, node_budget=config.node_budget,
                                 time_budget_s=config.time_budget_s)
    outcome = search_rank_le3(problem, config, jobs, checkpoint_path, manager)
    if outcome.status == FEASIBLE:
        logger.warning(f"D={D}: {tier} set is feasible, it does not rule out a universal lattice")
    return SuiteVerdict(D=D, tier=tier, elements=S, classical=classical, outcome=outcome,
                        in_proven_range=in_range)


def sweep(start: int, stop: int, tier: str = "prescribed", classical: bool = False,
          config: Optional[SearchConfig] = None, jobs: int = 1) -> pd.DataFrame:
    """nonexistence_suite over every squarefree non-admissible D in [start, stop]"""
    rows = []
    with SearchManager(jobs) as manager:
        for D in range(max(start, 2), stop + 1):
            if D in ADMISSIBLE_D:
                continue
            try:
                verdict = nonexistence_suite(D, tier, classical, config, jobs, manager=manager)
            except NotSquarefree:
                continue
            stats = verdict.outcome.stats
            rows.append({"D": D, "tier": verdict.tier, "k": len(verdict.elements),
                         "status": verdict.outcome.status, "nodes": stats.nodes,
                         "units": stats.units_total,
                         "exception": D in EXCEPTIONS_ONE_MOD_FOUR or D in EXCEPTIONS_OTHER})
    return pd.DataFrame(rows, columns=["D", "tier", "k", "status", "nodes", "units", "exception"])


# lattices from witnesses


def span_module(ctx: FieldCtx, G: ExactSymMat, label: Optional[str] = None) -> OFLattice:
    """The O_F-lattice generated by vectors with Gram matrix G"""
    if rank(G) != 3:
        raise RankNot3(f"Gram matrix has rank {rank(G)}")
    basis_idx = next(idx for idx in combinations(range(G.k), 3) if not G.minor(idx).is_zero())
    form = G.principal(basis_idx)
    # coordinates of every vector in the frame of the chosen three
    coords = []
    for r in range(G.k):
        rhs = [G.entries[a][r] for a in basis_idx]
        coords.append(_solve_field(form, rhs))
    omega = ctx.omega()
    flat = []
    for c in coords:
        for v in (c, [omega * x for x in c]):
            flat.append([q for x in v for q in x.to_omega_basis()])
    den = 1
    for row in flat:
        for q in row:
            den = lcm(den, q.denominator)
    hnf = hermite_rows([[int(q * den) for q in row] for row in flat])
    basis = []
    for row in hnf:
        vec = [ctx.from_omega(Fraction(row[2 * t], den), Fraction(row[2 * t + 1], den))
               for t in range(3)]
        basis.append(vec)
    return OFLattice.from_module_basis(ctx, basis, form, label=label)


def _solve_field(A: ExactSymMat, b: Sequence[QuadRat]) -> List[QuadRat]:
    n = A.k
    m = [list(A.entries[i]) + [b[i]] for i in range(n)]
    for col in range(n):
        piv = next(i for i in range(col, n) if not m[i][col].is_zero())
        m[col], m[piv] = m[piv], m[col]
        for i in range(n):
            if i != col and not m[i][col].is_zero():
                f = m[i][col] / m[col][col]
                m[i] = [u - f * v for u, v in zip(m[i], m[col])]
    return [m[i][n] / m[i][i] for i in range(n)]


def _independent(rows: List[List[Fraction]], v: Sequence[int]) -> bool:
    """Append v to the echelon rows if it is independent of them"""
    w = [Fraction(x) for x in v]
    for row in rows:
        p = next(i for i, x in enumerate(row) if x)
        if w[p]:
            f = w[p] / row[p]
            w = [a - f * b for a, b in zip(w, row)]
    if any(w):
        rows.append(w)
        return True
    return False


def canonical_key(L: OFLattice) -> Tuple:
    """Greedy short-vector frame, its Gram matrix and L relative to the frame

    Equal keys imply isometric lattices; isometric lattices may get different
    keys when short vectors tie.
    """
    fp = FinckePohst(L.trace_form())
    bound = max(fp.exact_value([int(i == j) for i in range(L.rank2n)]) for j in range(L.rank2n))
    vectors = {canonical_sign(v) for v in fp.vectors(bound) if any(v)}
    ranked = sorted(vectors, key=lambda v: (fp.exact_value(v),
                                            tuple(L.q_value(v).to_omega_basis()), v))
    echelon: List[List[Fraction]] = []
    frame = []
    for v in ranked:
        if _independent(echelon, v):
            frame.append(v)
            if len(frame) == L.rank2n:
                break
    gram = tuple(tuple(L.bilinear(u, w).format() for w in frame) for u in frame)
    S = Matrix(frame)
    d = S.det()
    adj = S.adjugate() * (1 if d > 0 else -1)
    rel = hermite_rows([[int(adj[i, j]) for j in range(L.rank2n)] for i in range(L.rank2n)])
    return gram, abs(int(d)), tuple(tuple(r) for r in rel)


@dataclass
class ClassifyResult:
    D: int
    lattices: List[OFLattice]
    matches: List[Optional[str]]
    witness_count: int
    degenerate: int
    saturated: bool
    outcome: FeasibilityOutcome

    def records(self) -> List[dict]:
        out = []
        for L, name in zip(self.lattices, self.matches):
            rec = L.to_dict()
            rec["catalog_match"] = name
            out.append(rec)
        return out

    def summary(self) -> dict:
        return {"D": self.D, "candidates": len(self.lattices), "witnesses": self.witness_count,
                "degenerate": self.degenerate, "saturated": self.saturated,
                "status": self.outcome.status, "stats": self.outcome.stats.to_dict()}


def classify_search(ctx: FieldCtx, S: List[QuadRat], config: Optional[SearchConfig] = None,
                    classical: bool = False, jobs: int = 1,
                    manager: Optional[SearchManager] = None) -> ClassifyResult:
    """Every lattice spanned by a witness for S, up to the canonical key"""
    config = config or SearchConfig()
    problem = FeasibilityProblem(ctx, S, classical=classical, node_budget=config.node_budget,
                                 time_budget_s=config.time_budget_s)
    outcome = _search(problem, config, jobs, False, None, manager)
    saturated = outcome.saturated
    seen: Dict[Tuple, OFLattice] = {}
    degenerate = 0
    for G in outcome.witnesses:
        if rank(G) < 3:
            degenerate += 1
            continue
        L = span_module(ctx, G)
        key = canonical_key(L)
        if key not in seen:
            seen[key] = L
    if degenerate:
        # lower-rank witnesses extend to infinitely many lattices
        saturated = True
        logger.warning(f"{degenerate} witnesses have rank below 3")
    if saturated:
        logger.warning(f"classify output for D={ctx.D} is saturated")

    catalog_keys = {canonical_key(M): M.label for M in catalog_list(ctx.D)} \
        if ctx.D in ADMISSIBLE_D else {}
    lattices, matches = [], []
    for n, (key, L) in enumerate(seen.items(), 1):
        lattices.append(OFLattice(ctx, L.gram, L.W, label=f"candidate_{n}", validate=False))
        matches.append(catalog_keys.get(key))
    return ClassifyResult(D=ctx.D, lattices=lattices, matches=matches,
                          witness_count=len(outcome.witnesses), degenerate=degenerate,
                          saturated=saturated, outcome=outcome)
