import itertools
from collections import Counter

import numpy as np
import pytest

from groupopt import datasets, metrics
from groupopt.allocator import (
    SwapCandidate,
    _place_randomly,
    allocate_round,
    candidates_for,
    filter_dominated,
    random_plan,
    run,
    select_swap,
    sweep,
)
from groupopt.metrics import MeetingLedger, geometric_meeting_score, pareto_score, swap_meeting_delta
from groupopt.model import RunConfig, check_plan, validate_config
from helpers import binary_panel, count_meetings, panel_from_rows


def cand(partner="x", home=0, away=0, delta=0):
    return SwapCandidate(
        partner=partner,
        pareto_i_table=home,
        pareto_partner_table=away,
        combined_pareto=home + away,
        meeting_delta=delta,
    )


class TestFilterDominated:
    def test_dominated_on_both_is_removed(self):
        a, b = cand("a", home=2, delta=5), cand("b", home=1, delta=3)
        assert filter_dominated([a, b]) == [a]

    def test_incomparable_candidates_are_both_kept(self):
        a, b = cand("a", home=2, delta=1), cand("b", home=1, delta=5)
        assert filter_dominated([a, b]) == [a, b]

    def test_ties_are_not_strict_domination(self):
        a, b = cand("a", home=2, delta=3), cand("b", home=2, delta=3)
        assert filter_dominated([a, b]) == [a, b]

    def test_equal_pareto_lower_delta_is_dominated(self):
        a, b = cand("a", home=2, delta=3), cand("b", home=2, delta=2)
        assert filter_dominated([a, b]) == [a]

    def test_matches_quadratic_definition(self):
        rng = np.random.default_rng(13)
        for _ in range(200):
            cands = [
                cand(f"c{k}", home=int(rng.integers(0, 4)), away=int(rng.integers(0, 4)),
                     delta=int(rng.integers(-5, 6)))
                for k in range(int(rng.integers(1, 10)))
            ]
            expected = [
                c for c in cands
                if not any(
                    o.combined_pareto >= c.combined_pareto
                    and o.meeting_delta >= c.meeting_delta
                    and (o.combined_pareto > c.combined_pareto or o.meeting_delta > c.meeting_delta)
                    for o in cands
                )
            ]
            assert filter_dominated(cands) == expected


class TestSelectSwap:
    def test_empty_list_selects_nothing(self):
        assert select_swap([], 0.5, np.random.default_rng(0)) is None

    def test_pareto_branch_samples_proportionally(self):
        cands = [cand("a", home=2), cand("b", home=1)]
        rng = np.random.default_rng(42)
        picks = Counter(
            select_swap(cands, 1.0, rng).partner for _ in range(6000)
        )
        assert picks["a"] / 6000 == pytest.approx(2 / 3, abs=0.03)
        assert picks["b"] / 6000 == pytest.approx(1 / 3, abs=0.03)

    def test_pure_pareto_mix_never_draws_meeting_branch_first(self):
        # one candidate only attractive by meeting delta, one by balance:
        # with pareto_mix=1 the balance branch always goes first
        cands = [cand("bal", home=1, delta=0), cand("meet", home=0, delta=9)]
        rng = np.random.default_rng(1)
        for _ in range(500):
            assert select_swap(cands, 1.0, rng).partner == "bal"

    def test_all_zero_branch_falls_back_to_the_other(self):
        cands = [cand("a", home=0, delta=4)]
        for mix in (0.0, 1.0):
            chosen = select_swap(cands, mix, np.random.default_rng(7))
            assert chosen is not None and chosen.partner == "a"

    def test_both_branches_zero_selects_nothing(self):
        cands = [cand("a", home=0, delta=0), cand("b", home=0, delta=-3)]
        for mix in (0.0, 0.5, 1.0):
            assert select_swap(cands, mix, np.random.default_rng(3)) is None

    def test_negative_deltas_never_get_weight(self):
        cands = [cand("a", home=0, delta=-5), cand("b", home=0, delta=2)]
        rng = np.random.default_rng(5)
        for _ in range(200):
            assert select_swap(cands, 0.0, rng).partner == "b"


def clustered_panel(n=20, n_cluster=5, manual=None):
    rows = [
        (
            f"p{i:02d}",
            {
                "x": "ab"[i % 2],
                "y": "uv"[(i // 2) % 2],
                "c": "yes" if i < n_cluster else "no",
            },
        )
        for i in range(n)
    ]
    return panel_from_rows(
        rows, [("x", ("a", "b")), ("y", ("u", "v"))], cluster=("c", "yes"), manual=manual
    )


class TestCandidatesFor:
    def brute_candidates(self, agent, alloc, panel, layout, ledger):
        """Independent reconstruction from the public metric operations."""
        out = []
        t_i = alloc[agent]
        for p in panel.participants:
            if p.id == agent or alloc[p.id] == t_i or p.manual_table is not None:
                continue
            me = panel.participant(agent)
            if me.is_cluster and not layout.is_cluster_table(alloc[p.id]):
                continue
            if p.is_cluster and not layout.is_cluster_table(t_i):
                continue
            home = pareto_score(alloc, panel, agent, p.id, t_i)
            away = pareto_score(alloc, panel, p.id, agent, alloc[p.id])
            if home < 0 or away < 0:
                continue
            out.append(SwapCandidate(
                partner=p.id,
                pareto_i_table=home,
                pareto_partner_table=away,
                combined_pareto=home + away,
                meeting_delta=swap_meeting_delta(alloc, agent, p.id, ledger),
            ))
        return out

    def test_matches_metric_reconstruction_everywhere(self):
        panel = clustered_panel()
        config = RunConfig(num_tables=4, num_rounds=1, num_cluster_tables=2, rng_seed=3)
        layout = validate_config(panel, config)
        rng = np.random.default_rng(17)
        ledger = MeetingLedger(panel.ids)
        for trial in range(4):
            alloc = _place_randomly(panel, layout, rng)
            for p in panel.participants:
                if p.manual_table is not None:
                    continue
                got = candidates_for(p.id, alloc, panel, layout, ledger)
                want = self.brute_candidates(p.id, alloc, panel, layout, ledger)
                assert got == want, f"candidate mismatch for {p.id}"
            ledger.add_round(alloc)

    def test_cluster_agent_cannot_move_off_cluster_tables(self):
        panel = clustered_panel()
        config = RunConfig(num_tables=4, num_rounds=1, num_cluster_tables=2, rng_seed=0)
        layout = validate_config(panel, config)
        alloc = _place_randomly(panel, layout, np.random.default_rng(2))
        ledger = MeetingLedger(panel.ids)
        for p in panel.cluster_agents():
            for c in candidates_for(p.id, alloc, panel, layout, ledger):
                assert layout.is_cluster_table(alloc[c.partner])

    def test_identical_twins_are_candidates_with_zero_score(self):
        rows = [
            ("p1", {"x": "a"}), ("p2", {"x": "b"}),
            ("p3", {"x": "a"}), ("p4", {"x": "b"}),
        ]
        panel = panel_from_rows(rows, [("x", ("a", "b"))])
        layout = validate_config(panel, RunConfig(num_tables=2, num_rounds=1))
        alloc = {"p1": 0, "p2": 0, "p3": 1, "p4": 1}
        cands = candidates_for("p1", alloc, panel, layout, MeetingLedger(panel.ids))
        twins = [c for c in cands if c.partner == "p3"]
        assert twins and twins[0].combined_pareto == 0

    def test_mixed_improvement_and_worsening_is_excluded(self):
        # moving p4 (a,v) out for p8 (b,u) improves x but worsens y
        rows = [
            ("p1", {"x": "a", "y": "u"}),
            ("p2", {"x": "a", "y": "u"}),
            ("p3", {"x": "a", "y": "u"}),
            ("p4", {"x": "a", "y": "v"}),
            ("p5", {"x": "b", "y": "v"}),
            ("p6", {"x": "b", "y": "v"}),
            ("p7", {"x": "b", "y": "v"}),
            ("p8", {"x": "b", "y": "u"}),
        ]
        panel = panel_from_rows(rows, [("x", ("a", "b")), ("y", ("u", "v"))])
        layout = validate_config(panel, RunConfig(num_tables=2, num_rounds=1))
        alloc = {"p1": 0, "p2": 0, "p3": 0, "p4": 0, "p5": 1, "p6": 1, "p7": 1, "p8": 1}
        cands = candidates_for("p4", alloc, panel, layout, MeetingLedger(panel.ids))
        assert not any(c.partner == "p8" for c in cands)

    def test_manual_agents_cannot_be_partners_or_subjects(self):
        panel = binary_panel(8, manual={"a03": 1})
        layout = validate_config(panel, RunConfig(num_tables=2, num_rounds=1))
        alloc = {"a01": 0, "a02": 0, "a05": 0, "a06": 0,
                 "a03": 1, "a04": 1, "a07": 1, "a08": 1}
        ledger = MeetingLedger(panel.ids)
        assert not any(
            c.partner == "a03"
            for c in candidates_for("a01", alloc, panel, layout, ledger)
        )
        with pytest.raises(ValueError):
            candidates_for("a03", alloc, panel, layout, ledger)


class TestSweep:
    def test_balanced_tables_with_empty_ledger_swap_nothing(self):
        # from an already-balanced seating every candidate has
        # combined_pareto 0 and meeting_delta 0, so no swap is applied
        rows = [(f"p{i}", {"x": "a" if i % 2 else "b"}) for i in range(8)]
        panel = panel_from_rows(rows, [("x", ("a", "b"))])
        config = RunConfig(num_tables=2, num_rounds=1, rng_seed=5)
        layout = validate_config(panel, config)
        alloc = {f"p{i}": (0 if i < 4 else 1) for i in range(8)}
        events = []
        after = sweep(alloc, panel, layout, MeetingLedger(panel.ids), config,
                      np.random.default_rng(0), on_swap=events.append)
        assert after == alloc
        assert events == []

    def test_swaps_apply_eagerly_and_preserve_constraints(self):
        panel = clustered_panel(n=24, n_cluster=6, manual={"p07": 0})
        config = RunConfig(num_tables=4, num_rounds=3, num_cluster_tables=2, rng_seed=11)
        layout = validate_config(panel, config)
        events = []
        plan, _ = run(panel, config, on_swap=events.append)
        assert events, "expected at least one applied swap"
        from groupopt.model import AllocationPlan
        for e in events:
            # the post-swap seating is the pre-swap seating with exactly
            # the two participants exchanged
            assert e.before[e.agent] == e.agent_table
            assert e.before[e.partner] == e.partner_table
            assert e.after[e.agent] == e.partner_table
            assert e.after[e.partner] == e.agent_table
            untouched = {k: v for k, v in e.before.items() if k not in (e.agent, e.partner)}
            assert untouched == {k: v for k, v in e.after.items() if k not in (e.agent, e.partner)}
            check_plan(AllocationPlan(rounds=(e.after,)), panel, layout)

    def test_no_swap_ever_involves_a_manual_agent(self):
        panel = clustered_panel(n=24, n_cluster=6, manual={"p07": 0, "p20": 3})
        config = RunConfig(num_tables=4, num_rounds=3, num_cluster_tables=2, rng_seed=2)
        events = []
        run(panel, config, on_swap=events.append)
        for e in events:
            assert e.agent not in ("p07", "p20")
            assert e.partner not in ("p07", "p20")


class TestAllocateRoundAndRun:
    def test_binding_cluster_tables_never_mix_cluster_and_rest(self):
        # 15 cluster agents exactly fill 3 cluster tables of 5
        rows = [
            (f"p{i:02d}", {"x": "ab"[i % 2], "c": "in" if i < 15 else "out"})
            for i in range(30)
        ]
        panel = panel_from_rows(rows, [("x", ("a", "b"))], cluster=("c", "in"))
        config = RunConfig(num_tables=6, num_rounds=5, num_cluster_tables=3, rng_seed=9)
        layout = validate_config(panel, config)
        plan, ledger = run(panel, config)
        check_plan(plan, panel, layout)
        cluster_ids = {p.id for p in panel.cluster_agents()}
        for round_alloc in plan.rounds:
            for pid, t in round_alloc.items():
                if pid in cluster_ids:
                    assert layout.is_cluster_table(t)
                else:
                    assert not layout.is_cluster_table(t)
        # therefore no cluster participant ever meets a non-cluster one
        for a in cluster_ids:
            for b in set(panel.ids) - cluster_ids:
                assert ledger.count(a, b) == 0

    def test_unconstrained_panel_runs_clean(self):
        panel = binary_panel(12)
        config = RunConfig(num_tables=3, num_rounds=4, rng_seed=0)
        plan, _ = run(panel, config)
        check_plan(plan, panel, validate_config(panel, config))

    def test_manual_agent_stays_put_every_round(self):
        panel = binary_panel(12, manual={"a05": 2})
        config = RunConfig(num_tables=3, num_rounds=6, rng_seed=4)
        plan, _ = run(panel, config)
        assert all(round_alloc["a05"] == 2 for round_alloc in plan.rounds)

    def test_single_round_ledger_matches_coseating(self):
        panel = binary_panel(10)
        config = RunConfig(num_tables=2, num_rounds=1, rng_seed=8)
        plan, ledger = run(panel, config)
        met = count_meetings(list(plan.rounds))
        assert ledger.total_meetings() == sum(met.values())
        for (a, b), c in met.items():
            assert ledger.count(a, b) == c

    def test_same_seed_gives_identical_plans(self):
        panel = datasets.instance_panel("synth30", seed=1)
        config = RunConfig(num_tables=3, num_rounds=5, rng_seed=123)
        plan1, _ = run(panel, config)
        plan2, _ = run(panel, config)
        assert plan1.rounds == plan2.rounds

    def test_different_seeds_differ(self):
        panel = datasets.instance_panel("synth30", seed=1)
        plan1, _ = run(panel, RunConfig(num_tables=3, num_rounds=5, rng_seed=1))
        plan2, _ = run(panel, RunConfig(num_tables=3, num_rounds=5, rng_seed=2))
        assert plan1.rounds != plan2.rounds

    def test_beats_random_baseline_on_average(self):
        panel = datasets.instance_panel("synth30", seed=1)
        layout = validate_config(panel, RunConfig(num_tables=3, num_rounds=5))
        opt_scores = []
        for seed in range(10):
            _, ledger = run(panel, RunConfig(num_tables=3, num_rounds=5, rng_seed=seed))
            opt_scores.append(geometric_meeting_score(ledger))
        base_scores = []
        rng = np.random.default_rng(0)
        for _ in range(30):
            _, ledger = random_plan(panel, layout, RunConfig(num_tables=3, num_rounds=5), rng)
            base_scores.append(geometric_meeting_score(ledger))
        assert np.mean(opt_scores) > np.mean(base_scores)


class TestRandomPlacement:
    def test_respects_all_constraints(self):
        panel = clustered_panel(n=20, n_cluster=5, manual={"p10": 0, "p03": 1})
        config = RunConfig(num_tables=4, num_rounds=1, num_cluster_tables=2)
        layout = validate_config(panel, config)
        from groupopt.model import AllocationPlan
        rng = np.random.default_rng(31)
        for _ in range(25):
            alloc = _place_randomly(panel, layout, rng)
            check_plan(AllocationPlan(rounds=(alloc,)), panel, layout)

    def test_every_seatable_table_reachable(self):
        # over many draws a free participant should visit every table
        panel = binary_panel(12)
        layout = validate_config(panel, RunConfig(num_tables=3, num_rounds=1))
        rng = np.random.default_rng(6)
        seen = {int(_place_randomly(panel, layout, rng)["a01"]) for _ in range(60)}
        assert seen == {0, 1, 2}
