"""
Tests for the Gram-matrix feasibility search and the lattices built from its witnesses
"""

from dataclasses import replace

import pytest

from src.core.catalog import catalog_get, generic_set, suite_elements
from src.core.config import SearchConfig
from src.core.errors import (AdmissibleD, ChecksumMismatch, NotIntegral, NotSquarefree,
                             NotTotallyPD, RankNot3)
from src.core.exactmat import ExactSymMat, rank
from src.core.feasibility import (FEASIBLE, INCONCLUSIVE, INFEASIBLE, FeasibilityProblem,
                                  UnitResult, audit_witness, build_plan, canonical_key,
                                  classify_search, column_order, entry_scale,
                                  nonexistence_suite, offdiag_candidates, search_rank_le3,
                                  span_module, sweep)
from src.core.lattice import lattice_from_form, represents, values_up_to_trace
from src.core.qfield import make_field


def control_set(ctx):
    return [ctx.element(1), ctx.element(2), ctx.omega() + 2]


def three_squares(ctx):
    one = ctx.element(1)
    return lattice_from_form(ctx, {(0, 0): one, (1, 1): one, (2, 2): one})


class TestCandidates:
    def test_unit_diagonal(self, f13):
        half = f13.element(1, 0, 2)
        assert offdiag_candidates(f13, f13.element(1), f13.element(1), False) == \
            [-1, -half, 0, half, 1]
        assert offdiag_candidates(f13, f13.element(1), f13.element(1), True) == [-1, 0, 1]

    @pytest.mark.parametrize("D", [13, 10, 5, 43])
    @pytest.mark.parametrize("classical", [False, True])
    def test_complete_against_box(self, D, classical):
        ctx = make_field(D)
        s = 1 if classical else 2
        pairs = [(ctx.element(1), ctx.element(2)), (ctx.element(2), ctx.omega() + 4),
                 (ctx.element(3), ctx.element(5))]
        for ai, aj in pairs:
            P = ai * aj
            expected = set()
            for x in range(-25, 26):
                for y in range(-8, 9):
                    gamma = ctx.from_omega(x, y)
                    if (P * (s * s) - gamma * gamma).is_totally_nonnegative():
                        expected.add(gamma / s)
            got = offdiag_candidates(ctx, ai, aj, classical)
            assert len(got) == len(set(got))
            assert set(got) == expected

    def test_entry_scale(self, f13):
        assert entry_scale(f13, False) == 4
        assert entry_scale(f13, True) == 2
        assert entry_scale(make_field(10), False) == 2
        assert entry_scale(make_field(10), True) == 1


class TestProblem:
    def test_rejects_bad_sets(self, f13):
        with pytest.raises(NotTotallyPD):
            FeasibilityProblem(f13, [])
        with pytest.raises(NotTotallyPD):
            FeasibilityProblem(f13, [f13.element(1), f13.omega()])
        with pytest.raises(NotIntegral):
            FeasibilityProblem(f13, [f13.element(1, 0, 2)])
        with pytest.raises(NotIntegral):
            FeasibilityProblem(f13, [make_field(5).element(1)])

    def test_column_orders(self, f13):
        S = [f13.element(1), f13.omega() + 4, f13.element(2)]
        assert column_order(S, "descending") == [1, 2, 0]
        assert column_order(S, "ascending") == [0, 2, 1]
        assert column_order(S, "given") == [0, 1, 2]

    def test_plan_shapes(self, f13):
        S = control_set(f13) + [f13.element(3)]
        plan = build_plan(FeasibilityProblem(f13, S))
        assert plan.k == 4
        assert len(plan.entries) == 6
        assert plan.entries[:3] == ((0, 1), (0, 2), (1, 2))
        # rank pruning starts once a 4x4 minor is complete
        assert [len(z) for z in plan.zero_sets] == [0, 0, 0, 0, 0, 1]
        for cands, nonneg in zip(plan.candidates, plan.nonneg):
            assert set(nonneg) <= set(cands)
            assert (0, 0) in nonneg


class TestFirstHit:
    def test_positive_control(self, f13, small_search):
        S = control_set(f13)
        problem = FeasibilityProblem(f13, S)
        outcome = search_rank_le3(problem, small_search)
        assert outcome.status == FEASIBLE
        G = outcome.witness
        assert G.diag() == S
        assert audit_witness(G, S, False)
        assert rank(G) <= 3
        data = outcome.to_dict()
        assert data["status"] == "Feasible"
        assert data["stats"]["nodes"] > 0

    def test_known_witness_passes_audit(self, f13):
        w = f13.omega()
        zero, one, two = f13.element(0), f13.element(1), f13.element(2)
        G = ExactSymMat([[one, one, zero], [one, two, w / 2], [zero, w / 2, w + 2]], 13)
        assert audit_witness(G, control_set(f13), False)
        assert not audit_witness(G, control_set(f13), True)

    def test_single_element(self, f13, small_search):
        outcome = search_rank_le3(FeasibilityProblem(f13, [f13.element(1)]), small_search)
        assert outcome.status == FEASIBLE
        assert outcome.witness.to_json() == [["1,0,1"]]

    def test_generic_set_infeasible(self, small_search):
        verdict = nonexistence_suite(43, "generic", config=small_search)
        assert verdict.tier == "generic"
        assert verdict.in_proven_range
        assert verdict.outcome.status == INFEASIBLE
        assert verdict.outcome.witness is None
        stats = verdict.outcome.stats
        assert stats.units_done == stats.units_total
        assert sum(stats.prunes.values()) > 0

    def test_generic_set_for_19_is_feasible(self, small_search):
        ctx = make_field(19)
        verdict = nonexistence_suite(19, "generic", config=small_search)
        assert verdict.elements == [1, 2, ctx.element(5, 1), ctx.element(9, 2)]
        assert verdict.outcome.status == FEASIBLE
        assert audit_witness(verdict.outcome.witness, verdict.elements, False)
        assert verdict.outcome.witness.diag() == verdict.elements

    def test_generic_set_for_19_witness(self):
        ctx = make_field(19)
        zero, one, half = ctx.element(0), ctx.element(1), ctx.element(1, 0, 2)
        b = ctx.element(3, 1, 2)
        G = ExactSymMat([[one, -one, zero, half],
                         [-one, ctx.element(2), zero, b],
                         [zero, zero, ctx.element(5, 1), zero],
                         [half, b, zero, ctx.element(9, 2)]], 19)
        assert rank(G) == 3
        assert audit_witness(G, generic_set(ctx), False)
        assert not audit_witness(G, generic_set(ctx), True)

    def test_superset_stays_infeasible(self, small_search):
        ctx = make_field(43)
        _, S = suite_elements(43, "generic")
        problem = FeasibilityProblem(ctx, S + [ctx.element(3)])
        assert search_rank_le3(problem, small_search).status == INFEASIBLE

    @pytest.mark.parametrize("D, tier", [(13, None), (43, "generic")])
    def test_symmetry_reduction_preserves_status(self, D, tier, small_search):
        ctx = make_field(D)
        S = control_set(ctx) if tier is None else suite_elements(D, tier)[1]
        problem = FeasibilityProblem(ctx, S)
        on = search_rank_le3(problem, small_search)
        off = search_rank_le3(problem, replace(small_search, symmetry_reduction=False))
        assert on.status == off.status
        if on.status == INFEASIBLE:
            assert on.stats.nodes <= off.stats.nodes

    @pytest.mark.parametrize("order", ["descending", "ascending", "given"])
    def test_column_order_preserves_status(self, order, small_search):
        ctx = make_field(43)
        problem = FeasibilityProblem(ctx, suite_elements(43, "generic")[1])
        config = replace(small_search, column_order=order)
        assert search_rank_le3(problem, config).status == INFEASIBLE

    def test_classical_is_stricter(self, f13, small_search):
        problem = FeasibilityProblem(f13, control_set(f13), classical=True)
        outcome = search_rank_le3(problem, small_search)
        if outcome.status == FEASIBLE:
            assert audit_witness(outcome.witness, control_set(f13), True)
        else:
            assert outcome.status == INFEASIBLE


class TestLimits:
    def test_node_budget(self, f13):
        problem = FeasibilityProblem(f13, control_set(f13) + [f13.element(5)], node_budget=1)
        outcome = search_rank_le3(problem, SearchConfig(node_budget=1))
        assert outcome.status == INCONCLUSIVE
        assert outcome.reason == "node_budget"
        assert outcome.to_dict()["reason"] == "node_budget"

    def test_time_budget(self):
        ctx = make_field(43)
        problem = FeasibilityProblem(ctx, suite_elements(43, "generic")[1], time_budget_s=0.0)
        outcome = search_rank_le3(problem, SearchConfig(time_budget_s=0.0))
        assert outcome.status == INCONCLUSIVE
        assert outcome.reason == "time_budget"

    def test_admissible_field(self):
        with pytest.raises(AdmissibleD):
            nonexistence_suite(13)

    def test_not_squarefree(self):
        with pytest.raises(NotSquarefree):
            nonexistence_suite(12)

    def test_outside_proven_range(self, small_search):
        ctx = make_field(2503)
        verdict = nonexistence_suite(2503, "generic", config=small_search,
                                     elements=[ctx.element(1)])
        assert not verdict.in_proven_range
        assert verdict.tier == "file"


class TestParallel:
    @pytest.mark.parametrize("D, tier", [(13, None), (43, "generic")])
    def test_worker_count_does_not_change_outcome(self, D, tier, small_search):
        ctx = make_field(D)
        S = control_set(ctx) if tier is None else suite_elements(D, tier)[1]
        problem = FeasibilityProblem(ctx, S)
        serial = search_rank_le3(problem, small_search, jobs=1)
        pooled = search_rank_le3(problem, small_search, jobs=8)
        assert serial.to_dict() == pooled.to_dict()

    def test_unit_records_round_trip(self):
        unit = UnitResult(index=3, status="found", nodes=17, prunes={"psd": 2},
                          witnesses=[[[1, 0], [0, 2]]])
        assert UnitResult.from_dict(unit.to_dict()) == unit
        assert unit.complete
        assert not UnitResult(0, "capped", 1, {}, []).complete


class TestCheckpoint:
    def test_resume_gives_same_outcome(self, tmp_path, small_search):
        path = str(tmp_path / "d43.ckpt")
        first = nonexistence_suite(43, "generic", config=small_search, checkpoint_path=path)
        assert (tmp_path / "d43.ckpt").exists()
        second = nonexistence_suite(43, "generic", config=small_search, checkpoint_path=path)
        assert first.to_dict() == second.to_dict()

    def test_other_problem_refused(self, tmp_path, small_search):
        path = str(tmp_path / "d43.ckpt")
        nonexistence_suite(43, "generic", config=small_search, checkpoint_path=path)
        with pytest.raises(ChecksumMismatch):
            nonexistence_suite(43, "generic", classical=True, config=small_search,
                               checkpoint_path=path)


class TestSpanModule:
    def test_identity_gram(self, f5):
        I3 = ExactSymMat.diagonal([f5.element(1)] * 3, 5)
        L = span_module(f5, I3)
        assert L.rank2n == 6
        assert values_up_to_trace(L, 8) == values_up_to_trace(three_squares(f5), 8)

    def test_dependent_vectors(self, f5):
        one, zero, two = f5.element(1), f5.element(0), f5.element(2)
        G = ExactSymMat([[one, zero, zero, one], [zero, one, zero, one],
                         [zero, zero, one, zero], [one, one, zero, two]], 5)
        L = span_module(f5, G)
        assert values_up_to_trace(L, 8) == values_up_to_trace(three_squares(f5), 8)

    def test_known_witness_spans_catalog_lattice(self, f13):
        w = f13.omega()
        zero, one, two = f13.element(0), f13.element(1), f13.element(2)
        # Gram of e1, e1 + e2, e3 in phih3_13
        G = ExactSymMat([[one, one, zero], [one, two, w / 2], [zero, w / 2, w + 2]], 13)
        L = span_module(f13, G)
        assert values_up_to_trace(L, 10) == values_up_to_trace(catalog_get("phih3_13"), 10)
        for alpha in control_set(f13):
            assert represents(L, alpha) is not None

    def test_rank_two(self, f5):
        with pytest.raises(RankNot3):
            span_module(f5, ExactSymMat.diagonal([f5.element(1)] * 2, 5))


class TestClassify:
    def test_canonical_key_separates_lattices(self):
        a, b = catalog_get("phi12_13"), catalog_get("phi24_13")
        assert canonical_key(a) == canonical_key(a)
        assert canonical_key(a) != canonical_key(b)

    def test_low_rank_witnesses_saturate(self, f13, small_search):
        result = classify_search(f13, [f13.element(1)], small_search)
        assert result.lattices == []
        assert result.degenerate == 1
        assert result.saturated
        assert result.summary()["saturated"]

    def test_candidates_represent_the_set(self, f13, small_search):
        S = control_set(f13)
        result = classify_search(f13, S, small_search)
        assert result.outcome.status == FEASIBLE
        assert result.witness_count >= len(result.lattices) >= 1
        for L, record in zip(result.lattices, result.records()):
            assert record["label"].startswith("candidate_")
            for alpha in S:
                assert represents(L, alpha) is not None

    def test_witness_cap(self, f13, small_search):
        result = classify_search(f13, control_set(f13), replace(small_search, classify_cap=1))
        assert result.witness_count == 1
        assert result.saturated


class TestSweep:
    def test_table(self, small_search):
        table = sweep(42, 47, "generic", config=small_search)
        assert list(table.columns) == ["D", "tier", "k", "status", "nodes", "units", "exception"]
        assert list(table["D"]) == [42, 43, 46, 47]
        assert table.set_index("D").loc[43, "status"] == INFEASIBLE
        assert bool(table.set_index("D").loc[42, "exception"])


@pytest.mark.slow
class TestHardFields:
    def test_table_set_for_29(self):
        verdict = nonexistence_suite(29)
        assert verdict.tier == "table"
        assert verdict.outcome.status == INFEASIBLE

    def test_fallback_set_for_19(self):
        verdict = nonexistence_suite(19)
        assert verdict.tier == "fallback"
        assert verdict.outcome.status == INFEASIBLE

    @pytest.mark.parametrize("D", [19, 29])
    def test_eight_workers_match_one(self, D):
        serial = nonexistence_suite(D, jobs=1)
        pooled = nonexistence_suite(D, jobs=8)
        assert serial.outcome.status == INFEASIBLE
        assert serial.to_dict() == pooled.to_dict()
