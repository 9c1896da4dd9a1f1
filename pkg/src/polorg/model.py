"""Core data model for political organigrams.

An organigram here is a forest of entities connected by directed formal
power edges (weighted, optionally access-blocking) plus directed informal
influence edges. Every entity carries a three-valued mood. All values are
immutable once constructed; every operation in this package is a pure
function over them.
"""

from __future__ import annotations

import enum
import re
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field

EntityId = str

_ID_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")


class Mood(str, enum.Enum):
    """Three-valued stakeholder stance toward the current state of affairs."""

    HAPPY = "happy"
    SAD = "sad"
    NEUTRAL = "neutral"

    @property
    def title(self) -> str:
        """Display form: Happy / Sad / Neutral."""
        return self.value.capitalize()


class Severity(str, enum.Enum):
    ERROR = "error"
    WARNING = "warning"


#: The closed set of diagnostic codes this package emits.
DIAGNOSTIC_CODES: dict[str, str] = {
    "E-SYNTAX": "statement could not be parsed",
    "E-BAD-ID": "identifier does not match [A-Za-z][A-Za-z0-9_]*",
    "E-EMPTY-TEXT": "label or title present but empty",
    "E-DUP-ENTITY": "entity declared more than once",
    "E-SELF-LOOP": "edge connects an entity to itself",
    "E-UNKNOWN-ENTITY": "edge or scenario references an undeclared entity",
    "E-DUP-EDGE": "duplicate edge for an ordered entity pair",
    "E-BAD-POWER": "power or strength below 1",
    "E-MULTI-SUPERIOR": "entity has more than one formal superior",
    "E-FORMAL-CYCLE": "formal power edges form a cycle",
    "E-UNKNOWN-EDGE": "scenario references an informal edge that does not exist",
    "E-BAD-ENTRY": "access entry set is empty or names an unknown entity",
    "E-DIFF-DOMAIN": "mood mappings cover different entity sets",
    "E-DUP-SCENARIO": "duplicate scenario name",
    "E-IO": "input could not be read",
    "W-DUP-ATTR": "attribute key repeated; last value wins",
    "W-UNKNOWN-ATTR": "unknown attribute key ignored",
}


@dataclass(frozen=True)
class Span:
    """Location of a construct in source text (1-based line and column)."""

    line: int
    col: int
    length: int


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    code: str
    message: str
    span: Span | None = None

    def __post_init__(self) -> None:
        if self.code not in DIAGNOSTIC_CODES:
            raise ValueError(f"undocumented diagnostic code: {self.code}")


class OrgError(Exception):
    """Operation failure carrying a stable diagnostic code."""

    def __init__(self, code: str, message: str):
        if code not in DIAGNOSTIC_CODES:
            raise ValueError(f"undocumented diagnostic code: {code}")
        super().__init__(message)
        self.code = code
        self.message = message

    def to_diagnostic(self) -> Diagnostic:
        return Diagnostic(Severity.ERROR, self.code, self.message)


@dataclass(frozen=True)
class Entity:
    id: EntityId
    label: str | None = None
    title: str | None = None
    mood: Mood = Mood.NEUTRAL

    @property
    def display(self) -> str:
        return self.label if self.label is not None else self.id


@dataclass(frozen=True)
class FormalEdge:
    """Directed superior -> subordinate power relationship.

    ``power`` is the relationship weight (rendered as parallel lines);
    ``blocked`` marks a superior who bars direct access to the subordinate.
    """

    superior: EntityId
    subordinate: EntityId
    power: int = 1
    blocked: bool = False


@dataclass(frozen=True)
class InformalEdge:
    """Directed off-hierarchy influence (back channel, friendship, ...)."""

    source: EntityId
    target: EntityId
    strength: int = 1
    active: bool = True
    note: str | None = None


@dataclass(frozen=True)
class OrgModel:
    """A political organigram. Edge lists are kept in canonical sorted order."""

    name: str
    entities: dict[EntityId, Entity] = field(default_factory=dict)
    formal: tuple[FormalEdge, ...] = ()
    informal: tuple[InformalEdge, ...] = ()

    def __post_init__(self) -> None:
        rekeyed = {e.id: e for e in self.entities.values()}
        object.__setattr__(self, "entities", rekeyed)
        object.__setattr__(
            self,
            "formal",
            tuple(sorted(self.formal, key=lambda e: (e.superior, e.subordinate))),
        )
        object.__setattr__(
            self,
            "informal",
            tuple(sorted(self.informal, key=lambda e: (e.source, e.target))),
        )

    @classmethod
    def from_parts(
        cls,
        name: str,
        entities: Iterable[Entity],
        formal: Iterable[FormalEdge] = (),
        informal: Iterable[InformalEdge] = (),
    ) -> "OrgModel":
        return cls(name, {e.id: e for e in entities}, tuple(formal), tuple(informal))

    def moods(self) -> dict[EntityId, Mood]:
        """Current mood of every entity, keyed by id."""
        return {eid: ent.mood for eid, ent in self.entities.items()}

    def with_moods(self, moods: Mapping[EntityId, Mood]) -> "OrgModel":
        """Copy of the model with the given moods applied."""
        entities = {
            eid: Entity(ent.id, ent.label, ent.title, moods.get(eid, ent.mood))
            for eid, ent in self.entities.items()
        }
        return OrgModel(self.name, entities, self.formal, self.informal)

    def informal_pairs(self) -> set[tuple[EntityId, EntityId]]:
        return {(e.source, e.target) for e in self.informal}


def _err(code: str, message: str, span: Span | None) -> Diagnostic:
    return Diagnostic(Severity.ERROR, code, message, span)


def check_parts(
    entities: list[Entity],
    formal: list[FormalEdge],
    informal: list[InformalEdge],
    span_of=None,
) -> list[Diagnostic]:
    """Structural rule engine shared by :func:`validate` and the parser.

    ``span_of(kind, index, field=None)`` maps a construct back to its source
    span; it is ``None`` for in-memory candidates.
    """

    def span(kind: str, index: int, fld: str | None = None) -> Span | None:
        if span_of is None:
            return None
        return span_of(kind, index, fld)

    out: list[Diagnostic] = []
    known: set[EntityId] = {e.id for e in entities}

    seen_ids: set[EntityId] = set()
    for i, ent in enumerate(entities):
        if not _ID_RE.match(ent.id):
            out.append(_err("E-BAD-ID", f"invalid entity id {ent.id!r}", span("entity", i)))
        if ent.id in seen_ids:
            out.append(_err("E-DUP-ENTITY", f"entity {ent.id} declared more than once", span("entity", i)))
        seen_ids.add(ent.id)
        if ent.label == "":
            out.append(_err("E-EMPTY-TEXT", f"entity {ent.id} has an empty label", span("entity", i)))
        if ent.title == "":
            out.append(_err("E-EMPTY-TEXT", f"entity {ent.id} has an empty title", span("entity", i)))

    seen_formal: set[tuple[EntityId, EntityId]] = set()
    superiors: dict[EntityId, list[tuple[EntityId, int]]] = {}
    for i, fe in enumerate(formal):
        for end in (fe.superior, fe.subordinate):
            if end not in known:
                out.append(_err("E-UNKNOWN-ENTITY", f"formal edge references unknown entity {end}", span("formal", i)))
        if fe.superior == fe.subordinate:
            out.append(_err("E-SELF-LOOP", f"formal edge {fe.superior} -> {fe.subordinate} is a self loop", span("formal", i)))
            continue
        if fe.power < 1:
            out.append(_err("E-BAD-POWER", f"formal edge {fe.superior} -> {fe.subordinate} has power {fe.power}; minimum is 1", span("formal", i, "power")))
        pair = (fe.superior, fe.subordinate)
        if pair in seen_formal:
            out.append(_err("E-DUP-EDGE", f"duplicate formal edge {fe.superior} -> {fe.subordinate}", span("formal", i)))
        seen_formal.add(pair)
        superiors.setdefault(fe.subordinate, []).append((fe.superior, i))

    for sub in sorted(superiors):
        distinct: list[tuple[EntityId, int]] = []
        for sup, i in superiors[sub]:
            if all(sup != d[0] for d in distinct):
                distinct.append((sup, i))
        if len(distinct) > 1:
            names = ", ".join(d[0] for d in distinct)
            out.append(_err("E-MULTI-SUPERIOR", f"entity {sub} has multiple formal superiors: {names}", span("formal", distinct[1][1])))

    out.extend(_cycle_diagnostics(formal, span))

    seen_informal: set[tuple[EntityId, EntityId]] = set()
    for i, ie in enumerate(informal):
        for end in (ie.source, ie.target):
            if end not in known:
                out.append(_err("E-UNKNOWN-ENTITY", f"informal edge references unknown entity {end}", span("informal", i)))
        if ie.source == ie.target:
            out.append(_err("E-SELF-LOOP", f"informal edge {ie.source} ~> {ie.target} is a self loop", span("informal", i)))
            continue
        if ie.strength < 1:
            out.append(_err("E-BAD-POWER", f"informal edge {ie.source} ~> {ie.target} has strength {ie.strength}; minimum is 1", span("informal", i, "strength")))
        pair = (ie.source, ie.target)
        if pair in seen_informal:
            out.append(_err("E-DUP-EDGE", f"duplicate informal edge {ie.source} ~> {ie.target}", span("informal", i)))
        seen_informal.add(pair)

    return sorted(out, key=_diag_key)


def _cycle_diagnostics(formal: list[FormalEdge], span) -> list[Diagnostic]:
    """One diagnostic per distinct cycle in the superior -> subordinate graph."""
    succ: dict[EntityId, list[EntityId]] = {}
    edge_index: dict[tuple[EntityId, EntityId], int] = {}
    for i, fe in enumerate(formal):
        if fe.superior == fe.subordinate:
            continue
        succ.setdefault(fe.superior, []).append(fe.subordinate)
        edge_index.setdefault((fe.superior, fe.subordinate), i)

    out: list[Diagnostic] = []
    reported: set[frozenset[EntityId]] = set()
    state: dict[EntityId, int] = {}  # 1 = on stack, 2 = done

    def visit(start: EntityId) -> None:
        stack: list[tuple[EntityId, list[EntityId]]] = [(start, sorted(succ.get(start, ())))]
        path: list[EntityId] = [start]
        state[start] = 1
        while stack:
            node, nbrs = stack[-1]
            if nbrs:
                nxt = nbrs.pop(0)
                if state.get(nxt) == 1:
                    cycle = path[path.index(nxt):] + [nxt]
                    key = frozenset(cycle)
                    if key not in reported:
                        reported.add(key)
                        first = min(
                            (edge_index[(cycle[j], cycle[j + 1])], (cycle[j], cycle[j + 1]))
                            for j in range(len(cycle) - 1)
                        )
                        out.append(
                            _err(
                                "E-FORMAL-CYCLE",
                                "formal power edges form a cycle: " + " -> ".join(cycle),
                                span("formal", first[0]),
                            )
                        )
                elif state.get(nxt) is None:
                    state[nxt] = 1
                    path.append(nxt)
                    stack.append((nxt, sorted(succ.get(nxt, ()))))
            else:
                stack.pop()
                path.pop()
                state[node] = 2

    for node in sorted(succ):
        if state.get(node) is None:
            visit(node)
    return out


def _diag_key(d: Diagnostic) -> tuple:
    if d.span is None:
        return (1, 0, 0, d.code, d.message)
    return (0, d.span.line, d.span.col, d.code, d.message)


def validate(model: OrgModel) -> list[Diagnostic]:
    """Return every structural violation in the candidate model.

    The result is empty exactly when the model is well formed: ids are legal
    and unique, every edge joins existing distinct entities, weights are
    positive, edges are unique per ordered pair, and the formal edges form a
    forest (single superior, no cycles). Pure and deterministic.
    """
    return check_parts(list(model.entities.values()), list(model.formal), list(model.informal))


def depth(model: OrgModel, eid: EntityId) -> int:
    """Number of formal superior links from ``eid`` up to its root."""
    if eid not in model.entities:
        raise OrgError("E-UNKNOWN-ENTITY", f"unknown entity {eid}")
    parent = {fe.subordinate: fe.superior for fe in model.formal}
    d = 0
    cur = eid
    while cur in parent:
        cur = parent[cur]
        d += 1
        if d > len(model.entities):
            raise OrgError("E-FORMAL-CYCLE", f"formal cycle reached from {eid}")
    return d


def canonical_order(model: OrgModel) -> list[EntityId]:
    """All entity ids sorted by (depth, id); the shared tie-break order."""
    return sorted(model.entities, key=lambda e: (depth(model, e), e))
