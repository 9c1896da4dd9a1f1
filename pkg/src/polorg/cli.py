"""Command line interface.

Exit codes: 0 success, 1 the command ran but found problems (error
diagnostics, or a non-fixpoint termination under --strict), 2 usage errors.
Diagnostics go to stderr as ``path:line:col CODE message``; primary output
goes to stdout. ``--json`` switches reports to the JSON schema shared with
the HTTP API. Set POLORG_NO_COLOR to disable styled terminal output.
"""

from __future__ import annotations

import os
import random
import sys
import threading
from dataclasses import replace

import click

from . import __version__, jsonio
from .analysis import (
    InfluenceMode,
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
from .api import DEFAULT_PORT, ApiSession, make_server
from .dsl import format_model, parse
from .model import (
    Diagnostic,
    Entity,
    FormalEdge,
    InformalEdge,
    Mood,
    OrgError,
    OrgModel,
    Severity,
    canonical_order,
)
from .render import RenderOptions, to_dot, to_svg


def _use_color(stream) -> bool:
    return stream.isatty() and not os.environ.get("POLORG_NO_COLOR")


def _styled(text: str, color: str, stream) -> str:
    if not _use_color(stream):
        return text
    codes = {"red": "31", "yellow": "33", "green": "32", "dim": "2"}
    return f"\x1b[{codes[color]}m{text}\x1b[0m"


def _print_diagnostics(path: str, diags: list[Diagnostic]) -> None:
    for d in diags:
        if d.span is not None:
            loc = f"{path}:{d.span.line}:{d.span.col}"
        else:
            loc = path
        color = "red" if d.severity is Severity.ERROR else "yellow"
        click.echo(f"{loc} {_styled(d.code, color, sys.stderr)} {d.message}", err=True)


def _read_source(path: str) -> str:
    try:
        if path == "-":
            return sys.stdin.read()
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        click.echo(f"{path} E-IO {e.strerror or e}", err=True)
        raise SystemExit(1) from None


def _load_model(path: str) -> OrgModel:
    result = parse(_read_source(path))
    _print_diagnostics(path, result.diagnostics)
    if result.model is None:
        raise SystemExit(1)
    return result.model


def _load_scenario(path: str) -> Scenario:
    result = parse_scenario(_read_source(path))
    _print_diagnostics(path, result.diagnostics)
    if result.scenario is None:
        raise SystemExit(1)
    return result.scenario


def _merge_params(params: PropagationParams, threshold: int | None, mode: str | None) -> PropagationParams:
    if threshold is not None:
        params = replace(params, cascade_threshold=threshold)
    if mode is not None:
        params = replace(params, mode=InfluenceMode(mode))
    return params


@click.group()
@click.version_option(__version__, prog_name="polorg")
def main() -> None:
    """Model and explore power, influence and mood in organisation charts."""


@main.command()
@click.argument("file")
def check(file: str) -> None:
    """Validate a model file; silent when clean."""
    result = parse(_read_source(file))
    _print_diagnostics(file, result.diagnostics)
    if result.model is None:
        raise SystemExit(1)


@main.command()
@click.argument("file")
def fmt(file: str) -> None:
    """Print the canonical form of a model file."""
    model = _load_model(file)
    click.echo(format_model(model), nl=False)


@main.command()
@click.argument("file")
@click.option("--format", "fmt_", type=click.Choice(["dot", "svg"]), default="svg", show_default=True)
@click.option("--no-moods", is_flag=True, help="Hide mood glyphs.")
@click.option("--no-informal", is_flag=True, help="Hide informal influence edges.")
def render(file: str, fmt_: str, no_moods: bool, no_informal: bool) -> None:
    """Render a model as DOT or SVG on stdout."""
    model = _load_model(file)
    opts = RenderOptions(format=fmt_, show_moods=not no_moods, show_informal=not no_informal)
    doc = to_dot(model, opts) if fmt_ == "dot" else to_svg(model, opts)
    click.echo(doc, nl=False)


@main.command(name="propagate")
@click.argument("file")
@click.option("--scenario", "scenario_file", type=str, default=None, help="Scenario file to apply.")
@click.option("--threshold", type=click.IntRange(min=1), default=None, help="Cascade threshold override.")
@click.option("--mode", type=click.Choice(["adopt", "graded"]), default=None, help="Influence mode override.")
@click.option("--json", "as_json", is_flag=True, help="Emit the trace as JSON.")
@click.option("--strict", is_flag=True, help="Exit 1 unless the run reaches a fixpoint.")
def propagate_cmd(file: str, scenario_file: str | None, threshold: int | None, mode: str | None, as_json: bool, strict: bool) -> None:
    """Run mood propagation and report the trace."""
    model = _load_model(file)
    scenario = _load_scenario(scenario_file) if scenario_file else Scenario()
    scenario = replace(scenario, params=_merge_params(scenario.params, threshold, mode))
    try:
        trace = propagate(model, scenario)
    except OrgError as e:
        _print_diagnostics(file, [e.to_diagnostic()])
        raise SystemExit(1) from None
    if as_json:
        click.echo(jsonio.dumps(jsonio.trace_to_json(trace)), nl=False)
    else:
        _print_trace_human(trace)
    if strict and trace.termination.kind is not TerminationKind.FIXPOINT:
        raise SystemExit(1)


def _print_trace_human(trace) -> None:
    for r in trace.rounds:
        click.echo(f"round {r.number}:")
        if not r.changes:
            click.echo("  no changes")
        for c in r.changes:
            res = next(res for res in r.resolutions if res.target == c.entity)
            if res.conflict:
                names = ", ".join(sorted(d.source for d in res.survivors))
                why = f"conflict: {names}"
            else:
                d = res.survivors[0]
                unit = "power" if d.kind.value == "formal" else "strength"
                why = f"{d.kind.value} {d.source}, {unit} {d.strength}"
            click.echo(f"  {c.entity}  {c.before.title} -> {c.after.title}  ({why})")
    click.echo("final:")
    for eid, mood in sorted(trace.final.items()):
        click.echo(f"  {eid}  {mood.title}")
    term = trace.termination
    suffix = f" (period {term.period})" if term.period else ""
    click.echo(f"termination: {term.kind.value}{suffix}")


@main.command(name="whatif")
@click.argument("file")
@click.option("--scenario", "scenario_files", type=str, multiple=True, required=True, help="Scenario file (repeatable).")
@click.option("--json", "as_json", is_flag=True)
def whatif_cmd(file: str, scenario_files: tuple[str, ...], as_json: bool) -> None:
    """Compare the outcomes of several scenarios."""
    model = _load_model(file)
    named = []
    for path in scenario_files:
        name = os.path.splitext(os.path.basename(path))[0]
        named.append((name, _load_scenario(path)))
    try:
        result = whatif(model, named)
    except OrgError as e:
        _print_diagnostics(file, [e.to_diagnostic()])
        raise SystemExit(1) from None
    if as_json:
        click.echo(jsonio.dumps(jsonio.whatif_to_json(result)), nl=False)
        return
    names = [row.name for row in result.rows]
    widths = [max(len(n), 7) for n in names]
    id_width = max([6] + [len(e) for e in result.matrix])
    header = "entity".ljust(id_width) + "  " + "  ".join(n.ljust(w) for n, w in zip(names, widths))
    click.echo(header)
    for eid, row in result.matrix.items():
        cells = []
        for name, w in zip(names, widths):
            mood = row.get(name)
            cells.append((mood.title if mood else "-").ljust(w))
        click.echo(eid.ljust(id_width) + "  " + "  ".join(cells))
    for row in result.rows:
        if row.error is not None:
            click.echo(f"{row.name}: {row.error.code} {row.error.message}", err=True)
        else:
            term = row.trace.termination
            suffix = f" (period {term.period})" if term.period else ""
            click.echo(f"{row.name}: {len(row.changes)} change(s), {term.kind.value}{suffix}")


@main.command()
@click.argument("file")
@click.option("--threshold", type=click.IntRange(min=1), default=None)
@click.option("--mode", type=click.Choice(["adopt", "graded"]), default=None)
@click.option("--json", "as_json", is_flag=True)
def rank(file: str, threshold: int | None, mode: str | None, as_json: bool) -> None:
    """Rank entities by propagation reach."""
    model = _load_model(file)
    ranking = influence_rank(model, _merge_params(PropagationParams(), threshold, mode))
    if as_json:
        click.echo(jsonio.dumps(jsonio.rank_to_json(ranking)), nl=False)
        return
    id_width = max([6] + [len(e.entity) for e in ranking.entries])
    click.echo("entity".ljust(id_width) + "  score  influences")
    for entry in ranking.entries:
        names = ", ".join(entry.influence_set) if entry.influence_set else "-"
        click.echo(f"{entry.entity.ljust(id_width)}  {str(entry.score).ljust(5)}  {names}")


@main.command()
@click.argument("file")
@click.option("--entry", "entry_raw", required=True, help="Comma-separated entry entity ids.")
@click.option("--json", "as_json", is_flag=True)
def access(file: str, entry_raw: str, as_json: bool) -> None:
    """Report elicitation reachability from the given entry entities."""
    model = _load_model(file)
    entries = {e.strip() for e in entry_raw.split(",") if e.strip()}
    try:
        report = access_report(model, entries)
    except OrgError as e:
        _print_diagnostics(file, [e.to_diagnostic()])
        raise SystemExit(1) from None
    if as_json:
        click.echo(jsonio.dumps(jsonio.access_to_json(report)), nl=False)
        return
    for eid, status in report.items():
        if status.path is not None:
            click.echo(f"{eid}  {status.status}: {' -> '.join(status.path)}")
        else:
            click.echo(f"{eid}  {status.status}")


@main.command()
@click.argument("before")
@click.argument("after")
@click.option("--json", "as_json", is_flag=True)
def diff(before: str, after: str, as_json: bool) -> None:
    """Mood differences between two model files."""
    model_a = _load_model(before)
    model_b = _load_model(after)
    try:
        changes = diff_moods(model_a.moods(), model_b.moods())
    except OrgError as e:
        _print_diagnostics(after, [e.to_diagnostic()])
        raise SystemExit(1) from None
    if as_json:
        click.echo(jsonio.dumps(jsonio.diff_to_json(changes)), nl=False)
        return
    for c in changes:
        click.echo(f"{c.entity}  {c.before.title} -> {c.after.title}")


def redaction_map(model: OrgModel, seed: int) -> dict[str, str]:
    """Deterministic pseudonym assignment: canonical order, seeded shuffle."""
    order = canonical_order(model)
    rng = random.Random(seed)
    shuffled = list(order)
    rng.shuffle(shuffled)
    return {eid: f"E{i + 1}" for i, eid in enumerate(shuffled)}


def redact(model: OrgModel, seed: int) -> OrgModel:
    """Pseudonymize a model for sharing.

    Ids become E1..En via a seeded shuffle of the canonical order; labels,
    titles and notes are replaced by the pseudonyms; structure, powers,
    moods, blocks and informal topology are untouched.
    """
    names = redaction_map(model, seed)
    entities = [
        Entity(
            names[e.id],
            names[e.id] if e.label is not None else None,
            names[e.id] if e.title is not None else None,
            e.mood,
        )
        for e in model.entities.values()
    ]
    formal = [
        FormalEdge(names[f.superior], names[f.subordinate], f.power, f.blocked) for f in model.formal
    ]
    informal = [
        InformalEdge(
            names[i.source],
            names[i.target],
            i.strength,
            i.active,
            f"{names[i.source]}~>{names[i.target]}" if i.note is not None else None,
        )
        for i in model.informal
    ]
    return OrgModel.from_parts("REDACTED", entities, formal, informal)


@main.command(name="redact")
@click.argument("file")
@click.option("--seed", type=int, required=True, help="Shuffle seed for pseudonym assignment.")
def redact_cmd(file: str, seed: int) -> None:
    """Print a pseudonymized copy of a model file."""
    model = _load_model(file)
    click.echo(format_model(redact(model, seed)), nl=False)


@main.command()
@click.argument("file", required=False)
@click.option("--port", type=int, default=DEFAULT_PORT, show_default=True)
@click.option("--listen", default="127.0.0.1", show_default=True, help="Bind address.")
@click.option(
    "--acknowledge-exposure",
    is_flag=True,
    help="Required to bind anything other than the loopback interface.",
)
@click.option("--ui-dir", type=str, default=None, help="Directory of UI assets to serve at /.")
def serve(file: str | None, port: int, listen: str, acknowledge_exposure: bool, ui_dir: str | None) -> None:
    """Serve the JSON API (and UI assets) for a model, privately by default."""
    if listen not in ("127.0.0.1", "localhost", "::1") and not acknowledge_exposure:
        raise click.UsageError(
            "binding a non-loopback address exposes the model; pass --acknowledge-exposure to proceed"
        )
    model = _load_model(file) if file else OrgModel("untitled", {})
    if ui_dir is None and os.path.isdir(os.path.join("frontend", "dist")):
        ui_dir = os.path.join("frontend", "dist")
    server = make_server(ApiSession(model), host=listen, port=port, ui_dir=ui_dir)
    host, actual_port = server.server_address[0], server.server_port
    click.echo(f"serving on http://{host}:{actual_port}/ (press Ctrl+C to stop)", err=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()


if __name__ == "__main__":
    main()
