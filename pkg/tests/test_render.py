from __future__ import annotations

import random
import re
import xml.etree.ElementTree as ET
from dataclasses import replace

from polorg import (
    Entity,
    FormalEdge,
    InformalEdge,
    Mood,
    OrgModel,
    RenderOptions,
    layout,
    to_dot,
    to_svg,
)

from genmodels import rich_model

_DOT_LINE = re.compile(
    r"""^(
        digraph\ ".*"\ \{
      | \ \ rankdir=TB;
      | \ \ node\ \[shape=circle\];
      | \ \ ".*"\ \[label=".*"\];
      | \ \ ".*"\ ->\ ".*"\ \[.*\];
      | \}
    )$""",
    re.VERBOSE,
)


def model_of(entities, formal=(), informal=(), name="t"):
    return OrgModel.from_parts(name, entities, formal, informal)


def check_dot(text: str) -> None:
    lines = text.splitlines()
    assert lines[0].startswith("digraph ")
    assert lines[-1] == "}"
    for line in lines:
        assert _DOT_LINE.match(line), f"unexpected statement: {line!r}"


class TestLayout:
    def test_example_layers(self, example_model):
        plan = layout(example_model)
        assert plan.layers == [["A"], ["B", "C"], ["D", "E", "F", "G"]]

    def test_single_entity_at_origin(self):
        plan = layout(model_of([Entity("X")]))
        assert plan.layers == [["X"]]
        assert plan.positions["X"] == (0.0, 0.0)

    def test_deterministic(self, example_model):
        assert layout(example_model) == layout(example_model)

    def test_y_increases_with_depth_and_x_distinct(self, example_model):
        plan = layout(example_model)
        for d, row in enumerate(plan.layers):
            xs = [plan.positions[e][0] for e in row]
            assert len(set(xs)) == len(xs)
            assert all(plan.positions[e][1] == float(d) for e in row)

    def test_children_group_under_parents(self):
        # two roots, each with two children; no interleaving
        m = model_of(
            [Entity(x) for x in "RSabcd"],
            formal=[
                FormalEdge("R", "c"),
                FormalEdge("R", "d"),
                FormalEdge("S", "a"),
                FormalEdge("S", "b"),
            ],
        )
        plan = layout(m)
        assert plan.layers == [["R", "S"], ["c", "d", "a", "b"]]

    def test_zero_crossings_on_example(self, example_model):
        plan = layout(example_model)
        slot = {e: i for row in plan.layers for i, e in enumerate(row)}
        edges = [
            (slot[f.superior], slot[f.subordinate])
            for f in example_model.formal
        ]
        crossings = sum(
            1
            for i in range(len(edges))
            for j in range(i + 1, len(edges))
            if (edges[i][0] - edges[j][0]) * (edges[i][1] - edges[j][1]) < 0
        )
        assert crossings == 0

    def test_informal_routes_are_distinguishable(self, example_model):
        plan = layout(example_model)
        kinds = {r.kind for r in plan.routes}
        assert kinds == {"formal", "informal"}
        informal = [r for r in plan.routes if r.kind == "informal"]
        assert all(len(r.points) == 3 for r in informal)
        formal = [r for r in plan.routes if r.kind == "formal"]
        assert all(len(r.points) == 2 for r in formal)


class TestToDot:
    def test_neutral_default_glyph(self):
        text = to_dot(model_of([Entity("A")]))
        assert "\U0001f610" in text
        check_dot(text)

    def test_example_edges(self, example_model):
        text = to_dot(example_model)
        assert '"A" -> "B" [penwidth=2];' in text
        assert '"A" -> "C" [penwidth=1];' in text
        assert '"D" -> "A" [style=dotted, arrowhead=open, penwidth=1];' in text
        check_dot(text)

    def test_blocked_edge_mark(self):
        m = model_of([Entity("M"), Entity("E")], formal=[FormalEdge("M", "E", blocked=True)])
        assert 'label="✗"' in to_dot(m)

    def test_hide_options(self, example_model):
        no_moods = to_dot(example_model, RenderOptions(format="dot", show_moods=False))
        assert "\U0001f60a" not in no_moods
        no_informal = to_dot(example_model, RenderOptions(format="dot", show_informal=False))
        assert "style=dotted" not in no_informal

    def test_inactive_informal_dimmed(self):
        m = model_of(
            [Entity("A"), Entity("B")],
            informal=[InformalEdge("A", "B", active=False)],
        )
        assert "color=gray60" in to_dot(m)

    def test_escaping(self):
        m = model_of([Entity("A", label='say "hi"\nok')], name='x"y')
        text = to_dot(m)
        check_dot(text)
        assert '\\"hi\\"' in text

    def test_generated_models_emit_wellformed_dot(self):
        rng = random.Random(11)
        for _ in range(50):
            check_dot(to_dot(rich_model(rng)))


class TestToSvg:
    def test_single_happy_entity(self):
        text = to_svg(model_of([Entity("A", mood=Mood.HAPPY)]))
        root = ET.fromstring(text)
        assert root.tag.endswith("svg")
        assert len(root.findall(".//{http://www.w3.org/2000/svg}circle")) == 1
        assert "\U0001f60a" in text

    def test_example_parallel_strokes(self, example_model):
        text = to_svg(example_model)
        root = ET.fromstring(text)
        ns = {"s": "http://www.w3.org/2000/svg"}
        groups = {
            (g.get("data-from"), g.get("data-to")): g
            for g in root.findall(".//s:g[@class='formal-edge']", ns)
        }
        assert len(groups[("A", "B")].findall("s:line", ns)) == 2
        assert len(groups[("A", "C")].findall("s:line", ns)) == 1
        assert len(groups[("C", "F")].findall("s:line", ns)) == 3
        dotted = root.findall(".//s:g[@class='informal-edge']", ns)
        assert [(g.get("data-from"), g.get("data-to")) for g in dotted] == [("D", "A")]

    def test_byte_deterministic(self, example_model):
        assert to_svg(example_model) == to_svg(example_model)

    def test_power_beyond_cap_annotated(self):
        m = model_of([Entity("A"), Entity("B")], formal=[FormalEdge("A", "B", power=6)])
        text = to_svg(m)
        root = ET.fromstring(text)
        ns = {"s": "http://www.w3.org/2000/svg"}
        group = root.find(".//s:g[@class='formal-edge']", ns)
        assert len(group.findall("s:line", ns)) == 4
        assert "×6" in text

    def test_blocked_glyph_centred(self):
        m = model_of([Entity("M"), Entity("E")], formal=[FormalEdge("M", "E", blocked=True)])
        text = to_svg(m)
        assert 'class="block-mark"' in text and "✗" in text

    def test_title_beneath_circle(self):
        text = to_svg(model_of([Entity("A", title="Chief")]))
        assert 'class="entity-title"' in text and ">Chief<" in text

    def test_generated_models_are_wellformed_xml(self):
        rng = random.Random(13)
        for _ in range(50):
            ET.fromstring(to_svg(rich_model(rng)))

    def test_control_characters_cannot_break_the_document(self):
        m = model_of([Entity("A", label="ding\x07dong", title="\x00")], name="be\x0cll")
        ET.fromstring(to_svg(m))

    def test_entity_groups_carry_ids_for_overlays(self, example_model):
        text = to_svg(example_model)
        assert 'id="entity-A"' in text and 'data-entity="A"' in text
        assert 'data-mood="sad"' in text


class TestVisualInjectivity:
    BASE = dict(
        entities=[Entity("A", mood=Mood.HAPPY), Entity("B")],
        formal=[FormalEdge("A", "B", power=1)],
        informal=[InformalEdge("B", "A", active=True)],
    )

    def variants(self):
        base = model_of(**self.BASE)
        power = model_of(**{**self.BASE, "formal": [FormalEdge("A", "B", power=2)]})
        blocked = model_of(**{**self.BASE, "formal": [FormalEdge("A", "B", blocked=True)]})
        mood = model_of(**{**self.BASE, "entities": [Entity("A", mood=Mood.SAD), Entity("B")]})
        inactive = model_of(**{**self.BASE, "informal": [InformalEdge("B", "A", active=False)]})
        return [base, power, blocked, mood, inactive]

    def test_each_attribute_changes_both_outputs(self):
        svgs = [to_svg(m) for m in self.variants()]
        dots = [to_dot(m) for m in self.variants()]
        assert len(set(svgs)) == len(svgs)
        assert len(set(dots)) == len(dots)
