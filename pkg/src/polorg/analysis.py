"""Mood propagation, influence ranking, access analysis and what-if runs.

Propagation is a synchronous round game over the organigram:

1. Scenario mood overrides are applied first; every overridden entity counts
   as changed going into round 1.
2. Round 1 additionally seeds from standing disagreement: each active
   informal edge whose source mood is not Neutral and differs from its
   target's mood delivers the source's mood.
3. From round 2 on (and in round 1 for override-changed entities), an entity
   changed in the previous step delivers its new mood along every outgoing
   formal edge whose power meets the cascade threshold and along every
   outgoing active informal edge. Informal edges do not re-fire from standing
   disagreement after round 1; only a fresh change re-fires them.
4. Per target, the strongest deliveries survive; on a strength tie informal
   outranks formal; if the survivors still disagree the target resolves to
   Neutral (a conflict). In adopt mode the target takes the resolved mood;
   in graded mode it moves one mood step toward it per point of strength.
5. The run ends at a fixpoint (no deliveries, or none that change a mood),
   when a global mood state repeats exactly (oscillation with the detected
   period), or at the round cap.

Everything is deterministic: targets are processed in canonical order and
the trace records every delivery, resolution and change.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field, replace
from collections.abc import Mapping

from .model import (
    Diagnostic,
    EntityId,
    InformalEdge,
    Mood,
    OrgError,
    OrgModel,
    Severity,
    Span,
    canonical_order,
)
from . import dsl


class InfluenceMode(str, enum.Enum):
    ADOPT = "adopt"
    GRADED = "graded"


class EdgeKind(str, enum.Enum):
    FORMAL = "formal"
    INFORMAL = "informal"


class TerminationKind(str, enum.Enum):
    FIXPOINT = "fixpoint"
    OSCILLATION = "oscillation"
    ROUND_CAP = "round_cap"


@dataclass(frozen=True)
class PropagationParams:
    """Knobs of the propagation game.

    ``max_rounds`` of ``None`` means four rounds per entity (at least one).
    """

    cascade_threshold: int = 2
    mode: InfluenceMode = InfluenceMode.ADOPT
    max_rounds: int | None = None

    def __post_init__(self) -> None:
        if self.cascade_threshold < 1:
            raise ValueError("cascade_threshold must be >= 1")
        if self.max_rounds is not None and self.max_rounds < 1:
            raise ValueError("max_rounds must be >= 1")


@dataclass(frozen=True)
class Scenario:
    """A what-if configuration applied on top of a model."""

    activations: Mapping[tuple[EntityId, EntityId], bool] = field(default_factory=dict)
    overrides: Mapping[EntityId, Mood] = field(default_factory=dict)
    params: PropagationParams = PropagationParams()


@dataclass(frozen=True)
class Delivery:
    """One mood handed from source to target along a specific edge."""

    source: EntityId
    target: EntityId
    kind: EdgeKind
    mood: Mood
    strength: int


@dataclass(frozen=True)
class MoodChange:
    entity: EntityId
    before: Mood
    after: Mood


@dataclass(frozen=True)
class Resolution:
    """Outcome at one target: the winning mood, or Neutral on conflict."""

    target: EntityId
    resolved: Mood
    applied: Mood
    conflict: bool
    survivors: tuple[Delivery, ...]


@dataclass(frozen=True)
class Round:
    number: int
    deliveries: tuple[Delivery, ...]
    resolutions: tuple[Resolution, ...]
    changes: tuple[MoodChange, ...]


@dataclass(frozen=True)
class Termination:
    kind: TerminationKind
    period: int | None = None


@dataclass(frozen=True)
class PropagationTrace:
    """Full record of a propagation run; replaying the rounds from the
    initial moods (after overrides) reproduces ``final`` exactly."""

    initial: dict[EntityId, Mood]
    overrides: tuple[tuple[EntityId, Mood], ...]
    rounds: tuple[Round, ...]
    final: dict[EntityId, Mood]
    termination: Termination

    @property
    def change_rounds(self) -> int:
        """Number of rounds in which at least one mood changed."""
        return sum(1 for r in self.rounds if r.changes)


_MOOD_VALUE = {Mood.HAPPY: 1, Mood.NEUTRAL: 0, Mood.SAD: -1}
_VALUE_MOOD = {v: k for k, v in _MOOD_VALUE.items()}


def _step_toward(current: Mood, target: Mood, strength: int) -> Mood:
    cur, tgt = _MOOD_VALUE[current], _MOOD_VALUE[target]
    delta = max(-strength, min(strength, tgt - cur))
    return _VALUE_MOOD[cur + delta]


def _effective_active(edge: InformalEdge, activations: Mapping[tuple[EntityId, EntityId], bool]) -> bool:
    return activations.get((edge.source, edge.target), edge.active)


def _engine(
    model: OrgModel,
    activations: Mapping[tuple[EntityId, EntityId], bool],
    overrides: Mapping[EntityId, Mood],
    params: PropagationParams,
    emit_seeds: bool,
    extra_changed: frozenset[EntityId] = frozenset(),
) -> PropagationTrace:
    order = canonical_order(model)
    index = {eid: i for i, eid in enumerate(order)}
    moods = model.moods()
    initial = dict(moods)
    applied_overrides = tuple(sorted(overrides.items(), key=lambda kv: index[kv[0]]))
    for eid, mood in applied_overrides:
        moods[eid] = mood
    changed_prev: set[EntityId] = set(overrides) | set(extra_changed)

    formal_out: dict[EntityId, list] = {}
    for fe in model.formal:
        formal_out.setdefault(fe.superior, []).append(fe)
    informal_out: dict[EntityId, list[InformalEdge]] = {}
    active_informal: list[InformalEdge] = []
    for ie in model.informal:
        if _effective_active(ie, activations):
            informal_out.setdefault(ie.source, []).append(ie)
            active_informal.append(ie)

    max_rounds = params.max_rounds if params.max_rounds is not None else max(1, 4 * len(order))
    threshold = params.cascade_threshold

    def state_key() -> tuple:
        return tuple(moods[eid] for eid in order)

    seen_states: dict[tuple, int] = {state_key(): 0}
    rounds: list[Round] = []
    termination = Termination(TerminationKind.ROUND_CAP)

    for number in range(1, max_rounds + 1):
        deliveries: list[Delivery] = []
        seen_edges: set[tuple[EdgeKind, EntityId, EntityId]] = set()

        def deliver(d: Delivery) -> None:
            key = (d.kind, d.source, d.target)
            if key not in seen_edges:
                seen_edges.add(key)
                deliveries.append(d)

        if number == 1 and emit_seeds:
            for ie in active_informal:
                src_mood = moods[ie.source]
                if src_mood is not Mood.NEUTRAL and src_mood is not moods[ie.target]:
                    deliver(Delivery(ie.source, ie.target, EdgeKind.INFORMAL, src_mood, ie.strength))
        for src in sorted(changed_prev, key=index.__getitem__):
            mood = moods[src]
            for fe in formal_out.get(src, ()):
                if fe.power >= threshold:
                    deliver(Delivery(src, fe.subordinate, EdgeKind.FORMAL, mood, fe.power))
            for ie in informal_out.get(src, ()):
                deliver(Delivery(src, ie.target, EdgeKind.INFORMAL, mood, ie.strength))

        if not deliveries:
            termination = Termination(TerminationKind.FIXPOINT)
            break

        deliveries.sort(key=lambda d: (index[d.target], d.kind.value, index[d.source]))
        resolutions: list[Resolution] = []
        changes: list[MoodChange] = []
        for target in sorted({d.target for d in deliveries}, key=index.__getitem__):
            incoming = [d for d in deliveries if d.target == target]
            top_strength = max(d.strength for d in incoming)
            top = [d for d in incoming if d.strength == top_strength]
            informal_top = [d for d in top if d.kind is EdgeKind.INFORMAL]
            survivors = informal_top or top
            moods_delivered = {d.mood for d in survivors}
            conflict = len(moods_delivered) > 1
            resolved = Mood.NEUTRAL if conflict else survivors[0].mood
            current = moods[target]
            if params.mode is InfluenceMode.ADOPT:
                applied = resolved
            else:
                applied = _step_toward(current, resolved, top_strength)
            resolutions.append(
                Resolution(target, resolved, applied, conflict, tuple(survivors))
            )
            if applied is not current:
                changes.append(MoodChange(target, current, applied))

        for c in changes:
            moods[c.entity] = c.after
        rounds.append(Round(number, tuple(deliveries), tuple(resolutions), tuple(changes)))
        changed_prev = {c.entity for c in changes}

        if not changes:
            termination = Termination(TerminationKind.FIXPOINT)
            break
        key = state_key()
        if key in seen_states:
            termination = Termination(TerminationKind.OSCILLATION, number - seen_states[key])
            break
        seen_states[key] = number

    return PropagationTrace(initial, applied_overrides, tuple(rounds), dict(moods), termination)


def _check_scenario(model: OrgModel, scenario: Scenario) -> None:
    for eid in scenario.overrides:
        if eid not in model.entities:
            raise OrgError("E-UNKNOWN-ENTITY", f"scenario overrides unknown entity {eid}")
    pairs = model.informal_pairs()
    for pair in scenario.activations:
        if pair not in pairs:
            raise OrgError("E-UNKNOWN-EDGE", f"scenario references unknown informal edge {pair[0]} ~> {pair[1]}")


def propagate(model: OrgModel, scenario: Scenario | None = None) -> PropagationTrace:
    """Run the propagation game for one scenario and return its full trace."""
    scenario = scenario or Scenario()
    _check_scenario(model, scenario)
    return _engine(
        model,
        scenario.activations,
        scenario.overrides,
        scenario.params,
        emit_seeds=True,
    )


@dataclass(frozen=True)
class RankEntry:
    entity: EntityId
    score: int
    influence_set: tuple[EntityId, ...]


@dataclass(frozen=True)
class InfluenceRanking:
    entries: tuple[RankEntry, ...]


def influence_rank(model: OrgModel, params: PropagationParams | None = None) -> InfluenceRanking:
    """Rank entities by propagation reach.

    Each entity is probed in isolation: everyone content, the probe entity
    alone dissenting, every informal edge active, and only the probe's
    dissent propagating. Its influence set is everyone whose final mood
    flipped; the score is the set size. Ties sort by id.
    """
    params = params or PropagationParams()
    all_active = {(ie.source, ie.target): True for ie in model.informal}
    entries: list[RankEntry] = []
    for probe in canonical_order(model):
        moods = {eid: (Mood.SAD if eid == probe else Mood.HAPPY) for eid in model.entities}
        trace = _engine(
            model.with_moods(moods),
            all_active,
            {},
            params,
            emit_seeds=False,
            extra_changed=frozenset({probe}),
        )
        influenced = tuple(
            sorted(eid for eid, mood in trace.final.items() if eid != probe and mood is Mood.SAD)
        )
        entries.append(RankEntry(probe, len(influenced), influenced))
    entries.sort(key=lambda e: (-e.score, e.entity))
    return InfluenceRanking(tuple(entries))


@dataclass(frozen=True)
class AccessStatus:
    """Elicitation reachability of one entity from the entry set."""

    status: str  # "open" | "workaround" | "blocked"
    path: tuple[EntityId, ...] | None = None

    OPEN = "open"
    WORKAROUND = "workaround"
    BLOCKED = "blocked"


def access_report(model: OrgModel, entries: set[EntityId]) -> dict[EntityId, AccessStatus]:
    """Reachability of every entity from the entry set.

    Formal edges are walkable in both directions unless blocked; informal
    edges are walkable in both directions regardless of their activity flag
    (the relationship exists even when its influence is switched off).
    Open means a formal-only route exists; a workaround is the shortest
    route that needs at least one informal hop (ties resolved toward the
    lexicographically smallest id sequence); blocked means no route at all.
    """
    if not entries:
        raise OrgError("E-BAD-ENTRY", "entry set is empty")
    for eid in sorted(entries):
        if eid not in model.entities:
            raise OrgError("E-BAD-ENTRY", f"unknown entry entity {eid}")

    formal_adj: dict[EntityId, set[EntityId]] = {eid: set() for eid in model.entities}
    full_adj: dict[EntityId, set[EntityId]] = {eid: set() for eid in model.entities}
    for fe in model.formal:
        if not fe.blocked:
            formal_adj[fe.superior].add(fe.subordinate)
            formal_adj[fe.subordinate].add(fe.superior)
            full_adj[fe.superior].add(fe.subordinate)
            full_adj[fe.subordinate].add(fe.superior)
    for ie in model.informal:
        full_adj[ie.source].add(ie.target)
        full_adj[ie.target].add(ie.source)

    def reach(adj: dict[EntityId, set[EntityId]]) -> set[EntityId]:
        seen = set(entries)
        queue = deque(sorted(entries))
        while queue:
            node = queue.popleft()
            for nxt in sorted(adj[node]):
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
        return seen

    open_set = reach(formal_adj)
    reachable = reach(full_adj)

    def smallest_path(target: EntityId) -> tuple[EntityId, ...]:
        # BFS distances toward the target, then a greedy forward walk picks
        # the lexicographically smallest among the shortest entry->target paths.
        dist = {target: 0}
        queue = deque([target])
        while queue:
            node = queue.popleft()
            for nxt in sorted(full_adj[node]):
                if nxt not in dist:
                    dist[nxt] = dist[node] + 1
                    queue.append(nxt)
        total = min(dist[e] for e in entries if e in dist)
        current = min(e for e in entries if dist.get(e) == total)
        path = [current]
        remaining = total
        while remaining > 0:
            current = min(n for n in full_adj[current] if dist.get(n) == remaining - 1)
            path.append(current)
            remaining -= 1
        return tuple(path)

    report: dict[EntityId, AccessStatus] = {}
    for eid in canonical_order(model):
        if eid in open_set:
            report[eid] = AccessStatus(AccessStatus.OPEN)
        elif eid in reachable:
            report[eid] = AccessStatus(AccessStatus.WORKAROUND, smallest_path(eid))
        else:
            report[eid] = AccessStatus(AccessStatus.BLOCKED)
    return report


def diff_moods(
    before: Mapping[EntityId, Mood], after: Mapping[EntityId, Mood]
) -> list[MoodChange]:
    """Per-entity mood differences, in id order; unchanged entries omitted."""
    if set(before) != set(after):
        raise OrgError("E-DIFF-DOMAIN", "mood mappings cover different entity sets")
    return [
        MoodChange(eid, before[eid], after[eid])
        for eid in sorted(before)
        if before[eid] is not after[eid]
    ]


@dataclass(frozen=True)
class WhatIfRow:
    name: str
    trace: PropagationTrace | None
    changes: tuple[MoodChange, ...]
    error: Diagnostic | None = None


@dataclass(frozen=True)
class WhatIfResult:
    rows: tuple[WhatIfRow, ...]
    matrix: dict[EntityId, dict[str, Mood]]


def whatif(model: OrgModel, scenarios: list[tuple[str, Scenario]]) -> WhatIfResult:
    """Run several named scenarios and tabulate their final moods.

    A failing scenario only poisons its own row; the matrix covers the
    scenarios that ran.
    """
    names = [name for name, _ in scenarios]
    if len(set(names)) != len(names):
        dup = next(n for i, n in enumerate(names) if n in names[:i])
        raise OrgError("E-DUP-SCENARIO", f"duplicate scenario name {dup!r}")
    initial = model.moods()
    rows: list[WhatIfRow] = []
    for name, scenario in scenarios:
        try:
            trace = propagate(model, scenario)
        except OrgError as e:
            rows.append(WhatIfRow(name, None, (), e.to_diagnostic()))
            continue
        rows.append(WhatIfRow(name, trace, tuple(diff_moods(initial, trace.final))))
    matrix: dict[EntityId, dict[str, Mood]] = {}
    for eid in canonical_order(model):
        matrix[eid] = {row.name: row.trace.final[eid] for row in rows if row.trace is not None}
    return WhatIfResult(tuple(rows), matrix)


# --- scenario files ---------------------------------------------------------

_SCENARIO_PARAM_KEYS = {"cascade_threshold", "mode", "max_rounds"}


@dataclass(frozen=True)
class ScenarioResult:
    """Outcome of :func:`parse_scenario`; scenario present iff no errors."""

    scenario: Scenario | None
    diagnostics: list[Diagnostic]


def parse_scenario(text: str) -> ScenarioResult:
    """Parse a scenario file.

    Statements (one per line, ``#`` comments): ``activate A ~> B``,
    ``deactivate A ~> B``, ``override A mood=<happy|sad|neutral>``,
    ``param cascade_threshold=<n>``, ``param mode=<adopt|graded>``,
    ``param max_rounds=<n>``.
    """
    diagnostics: list[Diagnostic] = []
    activations: dict[tuple[EntityId, EntityId], bool] = {}
    overrides: dict[EntityId, Mood] = {}
    params = PropagationParams()

    def warn_dup(tok: dsl.Token) -> None:
        diagnostics.append(
            Diagnostic(
                Severity.WARNING,
                "W-DUP-ATTR",
                f"{tok.text} set more than once; last value wins",
                Span(tok.line, tok.col, len(tok.text)),
            )
        )

    for line_no, raw in enumerate(text.splitlines(), start=1):
        try:
            tokens = dsl._tokenize(raw, line_no)
        except dsl._LineError as e:
            diagnostics.append(e.diagnostic)
            continue
        if not tokens:
            continue
        head = tokens[0]
        cur = dsl._Cursor(tokens, line_no, len(raw))
        cur.i = 1
        try:
            if head.kind != "id":
                raise dsl._syntax(f"expected a statement, found {head.text!r}", line_no, head.col, len(head.text))
            if head.text in ("activate", "deactivate"):
                src = cur.take("id", "source id")
                cur.take("squig", "'~>'")
                tgt = cur.take("id", "target id")
                cur.done()
                if (src.text, tgt.text) in activations:
                    warn_dup(src)
                activations[(src.text, tgt.text)] = head.text == "activate"
            elif head.text == "override":
                ident = cur.take("id", "entity id")
                key = cur.take("id", "mood attribute")
                if key.text != "mood":
                    raise dsl._syntax("override expects mood=<value>", line_no, key.col, len(key.text))
                cur.take("eq", "'='")
                val = cur.take("id", "mood value")
                cur.done()
                if val.text not in ("happy", "sad", "neutral"):
                    raise dsl._syntax("mood expects happy, sad or neutral", line_no, val.col, len(val.text))
                if ident.text in overrides:
                    warn_dup(ident)
                overrides[ident.text] = Mood(val.text)
            elif head.text == "param":
                key = cur.take("id", "parameter name")
                cur.take("eq", "'='")
                val = cur.peek()
                if val is None:
                    raise dsl._syntax("expected parameter value", line_no, len(raw) + 1)
                cur.i += 1
                cur.done()
                if key.text not in _SCENARIO_PARAM_KEYS:
                    raise dsl._syntax(f"unknown parameter {key.text!r}", line_no, key.col, len(key.text))
                if key.text == "mode":
                    if val.kind != "id" or val.text not in ("adopt", "graded"):
                        raise dsl._syntax("mode expects adopt or graded", line_no, val.col, len(val.text))
                    params = replace(params, mode=InfluenceMode(val.text))
                else:
                    if val.kind != "int" or int(val.text) < 1:
                        raise dsl._syntax(f"{key.text} expects an integer >= 1", line_no, val.col, len(val.text))
                    params = replace(params, **{key.text: int(val.text)})
            else:
                raise dsl._syntax(f"unknown statement {head.text!r}", line_no, head.col, len(head.text))
        except dsl._LineError as e:
            diagnostics.append(e.diagnostic)

    if any(d.severity is Severity.ERROR for d in diagnostics):
        return ScenarioResult(None, diagnostics)
    return ScenarioResult(Scenario(activations, overrides, params), diagnostics)
