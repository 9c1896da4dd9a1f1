from __future__ import annotations

import random
from dataclasses import replace

import pytest
from hypothesis import given, settings, strategies as st

from polorg import (
    Entity,
    FormalEdge,
    InformalEdge,
    InfluenceMode,
    Mood,
    OrgError,
    OrgModel,
    PropagationParams,
    Scenario,
    TerminationKind,
    access_report,
    diff_moods,
    influence_rank,
    parse_scenario,
    propagate,
    whatif,
)
from polorg.model import Severity

from genmodels import as_plain, family_model
from oracle import simulate


def model_of(entities, formal=(), informal=(), name="t"):
    return OrgModel.from_parts(name, entities, formal, informal)


class TestPropagateExamples:
    def test_example_reproduces_cascade(self, example_model):
        trace = propagate(example_model)
        assert {k: v.value for k, v in trace.final.items()} == {
            "A": "sad",
            "B": "sad",
            "C": "happy",
            "D": "sad",
            "E": "happy",
            "F": "happy",
            "G": "happy",
        }
        assert trace.termination.kind is TerminationKind.FIXPOINT
        # round 1 flips A through the informal edge, round 2 cascades to B only
        assert [c.entity for c in trace.rounds[0].changes] == ["A"]
        assert [c.entity for c in trace.rounds[1].changes] == ["B"]
        assert trace.rounds[0].deliveries[0].kind.value == "informal"
        assert trace.rounds[1].deliveries[0].kind.value == "formal"

    def test_deactivated_edge_is_a_noop(self, example_model):
        scenario = Scenario(activations={("D", "A"): False})
        trace = propagate(example_model, scenario)
        assert trace.rounds == ()
        assert trace.final == trace.initial
        assert trace.termination.kind is TerminationKind.FIXPOINT

    def test_equal_strength_conflict_resolves_neutral(self):
        m = model_of(
            [Entity("X", mood=Mood.HAPPY), Entity("Y", mood=Mood.SAD), Entity("Z", mood=Mood.NEUTRAL)],
            informal=[InformalEdge("X", "Z"), InformalEdge("Y", "Z")],
        )
        trace = propagate(m)
        assert len(trace.rounds) == 1
        (resolution,) = trace.rounds[0].resolutions
        assert resolution.conflict
        assert resolution.resolved is Mood.NEUTRAL
        assert trace.rounds[0].changes == ()
        assert trace.final == trace.initial
        assert trace.termination.kind is TerminationKind.FIXPOINT

    def test_mutual_influence_oscillates(self):
        m = model_of(
            [Entity("P", mood=Mood.HAPPY), Entity("Q", mood=Mood.SAD)],
            informal=[InformalEdge("P", "Q"), InformalEdge("Q", "P")],
        )
        trace = propagate(m)
        assert trace.termination.kind is TerminationKind.OSCILLATION
        assert trace.termination.period == 2
        assert trace.final == trace.initial  # back at the repeated state

    def test_override_marks_entity_changed_and_cascades(self, example_model):
        scenario = Scenario(
            activations={("D", "A"): False},
            overrides={"C": Mood.SAD},
        )
        trace = propagate(example_model, scenario)
        # C's sadness travels the power-3 edge to F but not the power-1 edge to G
        assert trace.final["F"] is Mood.SAD
        assert trace.final["G"] is Mood.HAPPY
        assert trace.overrides == (("C", Mood.SAD),)

    def test_neutral_source_exerts_no_pull(self):
        m = model_of(
            [Entity("N", mood=Mood.NEUTRAL), Entity("W", mood=Mood.HAPPY)],
            informal=[InformalEdge("N", "W")],
        )
        trace = propagate(m)
        assert trace.rounds == ()
        assert trace.final == trace.initial

    def test_seed_deliveries_never_carry_neutral(self, example_model):
        rng = random.Random(42)
        from genmodels import family_model as gen

        for _ in range(100):
            trace = propagate(gen(rng))
            if trace.rounds:
                for d in trace.rounds[0].deliveries:
                    if d.kind.value == "informal":
                        assert d.mood is not Mood.NEUTRAL

    def test_unknown_override_entity(self, example_model):
        with pytest.raises(OrgError) as err:
            propagate(example_model, Scenario(overrides={"ZZ": Mood.SAD}))
        assert err.value.code == "E-UNKNOWN-ENTITY"

    def test_unknown_activation_edge(self, example_model):
        with pytest.raises(OrgError) as err:
            propagate(example_model, Scenario(activations={("A", "D"): True}))
        assert err.value.code == "E-UNKNOWN-EDGE"

    def test_graded_mode_moves_one_step_per_strength_point(self, example_model):
        params = PropagationParams(mode=InfluenceMode.GRADED)
        trace = propagate(example_model, Scenario(params=params))
        # strength 1 informal pull moves A a single step to Neutral;
        # the power-2 cascade then moves B one step toward A's Neutral
        assert trace.final["A"] is Mood.NEUTRAL
        assert trace.final["B"] is Mood.NEUTRAL

    def test_graded_strength_two_jumps_both_steps(self):
        m = model_of(
            [Entity("S", mood=Mood.SAD), Entity("T", mood=Mood.HAPPY)],
            informal=[InformalEdge("S", "T", strength=2)],
        )
        trace = propagate(m, Scenario(params=PropagationParams(mode=InfluenceMode.GRADED)))
        assert trace.final["T"] is Mood.SAD

    def test_round_cap(self):
        m = model_of(
            [Entity("P", mood=Mood.HAPPY), Entity("Q", mood=Mood.SAD)],
            informal=[InformalEdge("P", "Q"), InformalEdge("Q", "P")],
        )
        trace = propagate(m, Scenario(params=PropagationParams(max_rounds=1)))
        assert trace.termination.kind is TerminationKind.ROUND_CAP
        assert len(trace.rounds) == 1

    def test_informal_outranks_formal_on_tie(self):
        m = model_of(
            [
                Entity("P", mood=Mood.HAPPY),
                Entity("B", mood=Mood.NEUTRAL),
                Entity("S", mood=Mood.SAD),
            ],
            formal=[FormalEdge("P", "B", power=2)],
            informal=[InformalEdge("S", "B", strength=2)],
        )
        trace = propagate(m, Scenario(overrides={"P": Mood.HAPPY}))
        # both deliveries hit B in round 1 at strength 2; the informal one wins
        assert trace.final["B"] is Mood.SAD

    def test_higher_strength_wins_regardless_of_kind(self):
        m = model_of(
            [
                Entity("P", mood=Mood.HAPPY),
                Entity("B", mood=Mood.NEUTRAL),
                Entity("S", mood=Mood.SAD),
            ],
            formal=[FormalEdge("P", "B", power=3)],
            informal=[InformalEdge("S", "B", strength=2)],
        )
        trace = propagate(m, Scenario(overrides={"P": Mood.HAPPY}))
        assert trace.final["B"] is Mood.HAPPY


class TestPropagateProperties:
    def test_deterministic_traces(self, example_model):
        traces = {repr(propagate(example_model)) for _ in range(5)}
        assert len(traces) == 1

    @given(st.integers(0, 3000))
    @settings(max_examples=150, deadline=None)
    def test_noop_when_everything_inactive(self, seed):
        m = family_model(random.Random(seed))
        scenario = Scenario(activations={(i.source, i.target): False for i in m.informal})
        trace = propagate(m, scenario)
        assert trace.final == trace.initial
        assert trace.termination.kind is TerminationKind.FIXPOINT

    @given(st.integers(0, 3000))
    @settings(max_examples=200, deadline=None)
    def test_matches_oracle(self, seed):
        rng = random.Random(seed)
        m = family_model(rng)
        overrides = {}
        if rng.random() < 0.4 and m.entities:
            eid = rng.choice(sorted(m.entities))
            overrides[eid] = rng.choice(list(Mood))
        threshold = rng.randint(1, 3)
        trace = propagate(
            m,
            Scenario(overrides=overrides, params=PropagationParams(cascade_threshold=threshold)),
        )
        entities, formal, informal = as_plain(m)
        expected = simulate(
            entities,
            formal,
            informal,
            overrides={k: v.value for k, v in overrides.items()},
            threshold=threshold,
        )
        assert {k: v.value for k, v in trace.final.items()} == expected["final"]
        assert trace.termination.kind.value == expected["termination"]
        assert trace.termination.period == expected["period"]
        assert [sorted(c.entity for c in r.changes) for r in trace.rounds] == [
            sorted(s) for s in expected["round_changes"]
        ]

    def test_conflict_resolution_is_order_independent(self):
        # resolving a delivery multiset must not depend on arrival order
        from itertools import permutations

        m = model_of(
            [
                Entity("X", mood=Mood.HAPPY),
                Entity("Y", mood=Mood.SAD),
                Entity("W", mood=Mood.SAD),
                Entity("Z", mood=Mood.NEUTRAL),
            ],
            informal=[InformalEdge("X", "Z", strength=2), InformalEdge("Y", "Z", strength=2), InformalEdge("W", "Z")],
        )
        baseline = propagate(m).final
        for perm in permutations(m.informal):
            shuffled = OrgModel.from_parts(m.name, m.entities.values(), m.formal, perm)
            assert propagate(shuffled).final == baseline

    @given(st.integers(0, 3000))
    @settings(max_examples=150, deadline=None)
    def test_replaying_rounds_reproduces_final(self, seed):
        m = family_model(random.Random(seed))
        trace = propagate(m)
        moods = dict(trace.initial)
        for eid, mood in trace.overrides:
            moods[eid] = mood
        for r in trace.rounds:
            for change in r.changes:
                assert moods[change.entity] is change.before
                moods[change.entity] = change.after
        assert moods == trace.final

    def test_fixpoint_idempotent_on_example(self, example_model):
        first = propagate(example_model)
        settled = example_model.with_moods(first.final)
        again = propagate(settled)
        assert again.final == first.final
        assert all(not r.changes for r in again.rounds)


class TestInfluenceRank:
    def test_example_ranking(self, example_model):
        ranking = influence_rank(example_model)
        by_id = {e.entity: e for e in ranking.entries}
        assert by_id["D"].score == 2
        assert by_id["D"].influence_set == ("A", "B")
        assert by_id["A"].score == 1
        assert by_id["A"].influence_set == ("B",)
        # the informal channel outranks the head of the hierarchy
        assert ranking.entries[0].entity == "D"

    def test_isolated_entity_scores_zero(self):
        m = model_of([Entity("L")])
        (entry,) = influence_rank(m).entries
        assert entry.score == 0 and entry.influence_set == ()

    def test_scores_match_set_sizes_and_sorting(self, example_model):
        ranking = influence_rank(example_model)
        scores = [e.score for e in ranking.entries]
        assert scores == sorted(scores, reverse=True)
        for a, b in zip(ranking.entries, ranking.entries[1:]):
            if a.score == b.score:
                assert a.entity < b.entity
        assert all(e.score == len(e.influence_set) for e in ranking.entries)

    @given(st.integers(0, 2000))
    @settings(max_examples=100, deadline=None)
    def test_invariant_under_uniform_power_scaling(self, seed):
        m = family_model(random.Random(seed))
        base = influence_rank(m, PropagationParams(cascade_threshold=2))
        scale = 3
        scaled = OrgModel.from_parts(
            m.name,
            m.entities.values(),
            [replace(f, power=f.power * scale) for f in m.formal],
            m.informal,
        )
        got = influence_rank(scaled, PropagationParams(cascade_threshold=2 * scale))
        assert got == base


class TestAccessReport:
    def test_blocked_without_informal(self):
        m = model_of(
            [Entity("M"), Entity("E")],
            formal=[FormalEdge("M", "E", blocked=True)],
        )
        report = access_report(m, {"M"})
        assert report["M"].status == "open"
        assert report["E"].status == "blocked"

    def test_workaround_through_informal(self):
        m = model_of(
            [Entity("M"), Entity("E")],
            formal=[FormalEdge("M", "E", blocked=True)],
            informal=[InformalEdge("E", "M")],
        )
        report = access_report(m, {"M"})
        assert report["E"].status == "workaround"
        assert report["E"].path == ("M", "E")

    def test_example_all_open(self, example_model):
        report = access_report(example_model, {"A"})
        assert all(status.status == "open" for status in report.values())

    def test_entry_entities_are_open(self):
        m = model_of([Entity("M"), Entity("E")], formal=[FormalEdge("M", "E", blocked=True)])
        report = access_report(m, {"M", "E"})
        assert report["E"].status == "open"

    def test_bad_entry(self, example_model):
        for entries in (set(), {"nope"}):
            with pytest.raises(OrgError) as err:
                access_report(example_model, entries)
            assert err.value.code == "E-BAD-ENTRY"

    def test_workaround_prefers_fewest_edges_then_smallest_ids(self):
        # two shortest routes to T: entry -> A -> T and entry -> B -> T
        m = model_of(
            [Entity("R"), Entity("A"), Entity("B"), Entity("T")],
            formal=[FormalEdge("R", "T", blocked=True)],
            informal=[
                InformalEdge("R", "A"),
                InformalEdge("R", "B"),
                InformalEdge("A", "T"),
                InformalEdge("B", "T"),
            ],
        )
        report = access_report(m, {"R"})
        assert report["T"].path == ("R", "A", "T")

    def test_workaround_paths_are_valid_and_use_informal(self):
        rng = random.Random(7)
        for _ in range(200):
            m = family_model(rng)
            blocked = OrgModel.from_parts(
                m.name,
                m.entities.values(),
                [replace(f, blocked=rng.random() < 0.5) for f in m.formal],
                m.informal,
            )
            entries = {sorted(blocked.entities)[0]}
            report = access_report(blocked, entries)
            formal_ok = {
                frozenset((f.superior, f.subordinate)) for f in blocked.formal if not f.blocked
            }
            informal_ok = {frozenset((i.source, i.target)) for i in blocked.informal}
            for eid, status in report.items():
                if status.status != "workaround":
                    continue
                path = status.path
                assert path[0] in entries and path[-1] == eid
                hops = [frozenset(pair) for pair in zip(path, path[1:])]
                assert all(h in formal_ok | informal_ok for h in hops)
                assert any(h in informal_ok and h not in formal_ok for h in hops)


class TestDiffMoods:
    def test_example_diff(self, example_model):
        final = propagate(example_model).final
        changes = diff_moods(example_model.moods(), final)
        assert [(c.entity, c.before.value, c.after.value) for c in changes] == [
            ("A", "happy", "sad"),
            ("B", "happy", "sad"),
        ]

    def test_identical_mappings(self, example_model):
        assert diff_moods(example_model.moods(), example_model.moods()) == []

    def test_unchanged_entries_omitted(self, example_model):
        final = propagate(example_model).final
        changes = diff_moods(example_model.moods(), final)
        assert "D" not in [c.entity for c in changes]

    def test_domain_mismatch(self):
        with pytest.raises(OrgError) as err:
            diff_moods({"A": Mood.HAPPY}, {"B": Mood.HAPPY})
        assert err.value.code == "E-DIFF-DOMAIN"


class TestWhatIf:
    def test_base_versus_leak(self, example_model):
        result = whatif(
            example_model,
            [
                ("base", Scenario(activations={("D", "A"): False})),
                ("leak", Scenario(activations={("D", "A"): True})),
            ],
        )
        differing = {eid for eid, row in result.matrix.items() if row["base"] is not row["leak"]}
        assert differing == {"A", "B"}

    def test_empty_scenario_list(self, example_model):
        result = whatif(example_model, [])
        assert result.rows == ()
        assert all(row == {} for row in result.matrix.values())

    def test_error_isolation(self, example_model):
        result = whatif(
            example_model,
            [
                ("ok", Scenario()),
                ("broken", Scenario(activations={("A", "D"): True})),
            ],
        )
        by_name = {row.name: row for row in result.rows}
        assert by_name["broken"].error.code == "E-UNKNOWN-EDGE"
        assert by_name["ok"].error is None
        assert by_name["ok"].trace is not None

    def test_duplicate_names(self, example_model):
        with pytest.raises(OrgError) as err:
            whatif(example_model, [("x", Scenario()), ("x", Scenario())])
        assert err.value.code == "E-DUP-SCENARIO"


class TestScenarioFiles:
    def test_full_syntax(self):
        text = (
            "# tweak the informal channel\n"
            "activate D ~> A\n"
            "deactivate B ~> C\n"
            "override A mood=sad\n"
            "param cascade_threshold=3\n"
            "param mode=graded\n"
            "param max_rounds=9\n"
        )
        result = parse_scenario(text)
        assert not result.diagnostics
        s = result.scenario
        assert s.activations == {("D", "A"): True, ("B", "C"): False}
        assert s.overrides == {"A": Mood.SAD}
        assert s.params == PropagationParams(3, InfluenceMode.GRADED, 9)

    def test_empty_is_default(self):
        result = parse_scenario("")
        assert result.scenario == Scenario()

    def test_bad_statement_recovers(self):
        result = parse_scenario("activate D ~> A\nfrobnicate\noverride A mood=angry\n")
        assert result.scenario is None
        assert len([d for d in result.diagnostics if d.severity is Severity.ERROR]) == 2

    def test_duplicate_setting_warns(self):
        result = parse_scenario("override A mood=sad\noverride A mood=happy\n")
        assert result.scenario.overrides == {"A": Mood.HAPPY}
        assert [d.code for d in result.diagnostics] == ["W-DUP-ATTR"]
