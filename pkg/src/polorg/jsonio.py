"""JSON projections shared by the CLI's --json mode and the HTTP API.

All projections are plain dicts serialized with :func:`dumps` (sorted keys,
two-space indent, UTF-8, trailing newline) so the same report is
byte-identical wherever it is produced.
"""

from __future__ import annotations

import json
from typing import Any

from .model import Diagnostic, Entity, FormalEdge, InformalEdge, Mood, OrgError, OrgModel
from .analysis import (
    AccessStatus,
    InfluenceMode,
    InfluenceRanking,
    MoodChange,
    PropagationParams,
    PropagationTrace,
    Scenario,
    WhatIfResult,
)


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def span_to_json(diag: Diagnostic) -> dict | None:
    if diag.span is None:
        return None
    return {"line": diag.span.line, "col": diag.span.col, "length": diag.span.length}


def diagnostics_to_json(diags: list[Diagnostic]) -> list[dict]:
    return [
        {"severity": d.severity.value, "code": d.code, "message": d.message, "span": span_to_json(d)}
        for d in diags
    ]


def model_to_json(model: OrgModel) -> dict:
    return {
        "name": model.name,
        "entities": {
            eid: {"label": e.label, "title": e.title, "mood": e.mood.value}
            for eid, e in sorted(model.entities.items())
        },
        "formal": [
            {"superior": f.superior, "subordinate": f.subordinate, "power": f.power, "blocked": f.blocked}
            for f in model.formal
        ],
        "informal": [
            {"source": i.source, "target": i.target, "strength": i.strength, "active": i.active, "note": i.note}
            for i in model.informal
        ],
    }


def _need(d: dict, key: str, kind: type, what: str):
    if key not in d:
        raise OrgError("E-SYNTAX", f"{what}: missing key {key!r}")
    val = d[key]
    if not isinstance(val, kind) or (kind is int and isinstance(val, bool)):
        raise OrgError("E-SYNTAX", f"{what}: key {key!r} must be {kind.__name__}")
    return val


def _mood(value: Any, what: str) -> Mood:
    try:
        return Mood(value)
    except ValueError:
        raise OrgError("E-SYNTAX", f"{what}: invalid mood {value!r}") from None


def model_from_json(data: Any) -> OrgModel:
    """Build a model candidate from its JSON projection.

    Shape errors raise ``OrgError`` (E-SYNTAX); structural violations are the
    caller's business via ``validate``.
    """
    if not isinstance(data, dict):
        raise OrgError("E-SYNTAX", "model: expected a JSON object")
    name = _need(data, "name", str, "model")
    raw_entities = _need(data, "entities", dict, "model")
    entities = {}
    for eid, spec in raw_entities.items():
        if not isinstance(spec, dict):
            raise OrgError("E-SYNTAX", f"entity {eid}: expected a JSON object")
        label = spec.get("label")
        title = spec.get("title")
        if label is not None and not isinstance(label, str):
            raise OrgError("E-SYNTAX", f"entity {eid}: label must be a string")
        if title is not None and not isinstance(title, str):
            raise OrgError("E-SYNTAX", f"entity {eid}: title must be a string")
        entities[eid] = Entity(eid, label, title, _mood(spec.get("mood", "neutral"), f"entity {eid}"))
    def weight(spec: dict, key: str, what: str) -> int:
        val = spec.get(key, 1)
        if not isinstance(val, int) or isinstance(val, bool):
            raise OrgError("E-SYNTAX", f"{what}: {key} must be an integer")
        return val

    formal = []
    for spec in data.get("formal", []):
        if not isinstance(spec, dict):
            raise OrgError("E-SYNTAX", "formal edge: expected a JSON object")
        formal.append(
            FormalEdge(
                _need(spec, "superior", str, "formal edge"),
                _need(spec, "subordinate", str, "formal edge"),
                weight(spec, "power", "formal edge"),
                bool(spec.get("blocked", False)),
            )
        )
    informal = []
    for spec in data.get("informal", []):
        if not isinstance(spec, dict):
            raise OrgError("E-SYNTAX", "informal edge: expected a JSON object")
        note = spec.get("note")
        if note is not None and not isinstance(note, str):
            raise OrgError("E-SYNTAX", "informal edge: note must be a string")
        informal.append(
            InformalEdge(
                _need(spec, "source", str, "informal edge"),
                _need(spec, "target", str, "informal edge"),
                weight(spec, "strength", "informal edge"),
                bool(spec.get("active", True)),
                note,
            )
        )
    return OrgModel(name, entities, tuple(formal), tuple(informal))


def moods_to_json(moods: dict[str, Mood]) -> dict[str, str]:
    return {eid: mood.value for eid, mood in sorted(moods.items())}


def changes_to_json(changes) -> list[dict]:
    return [{"entity": c.entity, "before": c.before.value, "after": c.after.value} for c in changes]


def trace_to_json(trace: PropagationTrace) -> dict:
    return {
        "initial": moods_to_json(trace.initial),
        "overrides": [{"entity": eid, "mood": mood.value} for eid, mood in trace.overrides],
        "rounds": [
            {
                "round": r.number,
                "deliveries": [
                    {
                        "source": d.source,
                        "target": d.target,
                        "kind": d.kind.value,
                        "mood": d.mood.value,
                        "strength": d.strength,
                    }
                    for d in r.deliveries
                ],
                "resolutions": [
                    {
                        "target": res.target,
                        "resolved": res.resolved.value,
                        "applied": res.applied.value,
                        "conflict": res.conflict,
                        "sources": sorted(d.source for d in res.survivors),
                    }
                    for res in r.resolutions
                ],
                "changes": changes_to_json(r.changes),
            }
            for r in trace.rounds
        ],
        "final": moods_to_json(trace.final),
        "termination": {"kind": trace.termination.kind.value, "period": trace.termination.period},
    }


def scenario_from_json(data: Any) -> Scenario:
    if data is None:
        return Scenario()
    if not isinstance(data, dict):
        raise OrgError("E-SYNTAX", "scenario: expected a JSON object")
    activations = {}
    for spec in data.get("activations", []):
        if not isinstance(spec, dict):
            raise OrgError("E-SYNTAX", "activation: expected a JSON object")
        src = _need(spec, "source", str, "activation")
        tgt = _need(spec, "target", str, "activation")
        activations[(src, tgt)] = bool(spec.get("active", True))
    overrides = {}
    raw_overrides = data.get("overrides", {})
    if not isinstance(raw_overrides, dict):
        raise OrgError("E-SYNTAX", "overrides: expected a JSON object")
    for eid, mood in raw_overrides.items():
        overrides[eid] = _mood(mood, f"override {eid}")
    params = params_from_json(data.get("params"))
    return Scenario(activations, overrides, params)


def params_from_json(data: Any) -> PropagationParams:
    if data is None:
        return PropagationParams()
    if not isinstance(data, dict):
        raise OrgError("E-SYNTAX", "params: expected a JSON object")
    threshold = data.get("cascade_threshold", 2)
    if not isinstance(threshold, int) or isinstance(threshold, bool) or threshold < 1:
        raise OrgError("E-SYNTAX", "cascade_threshold must be an integer >= 1")
    mode_raw = data.get("mode", "adopt")
    try:
        mode = InfluenceMode(mode_raw)
    except ValueError:
        raise OrgError("E-SYNTAX", f"invalid mode {mode_raw!r}") from None
    max_rounds = data.get("max_rounds")
    if max_rounds is not None and (not isinstance(max_rounds, int) or isinstance(max_rounds, bool) or max_rounds < 1):
        raise OrgError("E-SYNTAX", "max_rounds must be an integer >= 1")
    return PropagationParams(threshold, mode, max_rounds)


def rank_to_json(ranking: InfluenceRanking) -> dict:
    return {
        "entries": [
            {"entity": e.entity, "score": e.score, "influence_set": list(e.influence_set)}
            for e in ranking.entries
        ]
    }


def access_to_json(report: dict[str, AccessStatus]) -> dict:
    statuses: dict[str, dict] = {}
    for eid, status in sorted(report.items()):
        entry: dict[str, Any] = {"status": status.status}
        if status.path is not None:
            entry["path"] = list(status.path)
        statuses[eid] = entry
    return {"statuses": statuses}


def whatif_to_json(result: WhatIfResult) -> dict:
    return {
        "scenarios": [
            {
                "name": row.name,
                "final": moods_to_json(row.trace.final) if row.trace else None,
                "changes": changes_to_json(row.changes),
                "termination": (
                    {"kind": row.trace.termination.kind.value, "period": row.trace.termination.period}
                    if row.trace
                    else None
                ),
                "error": (
                    {"code": row.error.code, "message": row.error.message} if row.error else None
                ),
            }
            for row in result.rows
        ],
        "matrix": {
            eid: {name: mood.value for name, mood in row.items()}
            for eid, row in result.matrix.items()
        },
    }


def diff_to_json(changes: list[MoodChange]) -> dict:
    return {"changes": changes_to_json(changes)}
