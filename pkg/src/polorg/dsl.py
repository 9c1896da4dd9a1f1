"""Textual surface syntax for organigram models.

One statement per line, ``#`` comments, UTF-8. The grammar:

    file      := header statement*
    header    := "org" QUOTED-STRING
    statement := "entity" ID attrs?
               | "formal" ID "->" ID attrs?
               | "informal" ID "~>" ID attrs?
    attrs     := "[" KEY "=" value ("," KEY "=" value)* "]"

Entity keys: ``label``, ``title`` (quoted), ``mood`` (happy|sad|neutral).
Formal keys: ``power`` (integer >= 1), ``block`` (true|false).
Informal keys: ``strength`` (integer >= 1), ``active`` (true|false),
``note`` (quoted).

Parsing recovers at end of line, so one bad statement never hides the rest
of the file. :func:`format_model` emits the canonical form: statements in
canonical order, attributes in fixed key order, defaults omitted.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .model import (
    Diagnostic,
    Entity,
    FormalEdge,
    InformalEdge,
    Mood,
    OrgModel,
    Severity,
    Span,
    canonical_order,
    check_parts,
    _diag_key,
)

_TOKEN_RE = re.compile(
    r"""(?P<ws>[ \t]+)
      | (?P<arrow>->)
      | (?P<squig>~>)
      | (?P<lbrack>\[)
      | (?P<rbrack>\])
      | (?P<comma>,)
      | (?P<eq>=)
      | (?P<int>[0-9]+)
      | (?P<id>[A-Za-z][A-Za-z0-9_]*)
      | (?P<str>"(?:\\.|[^"\\])*")
    """,
    re.VERBOSE,
)

_ESCAPES = {"\\": "\\", '"': '"', "n": "\n", "t": "\t"}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int

    @property
    def end(self) -> int:
        return self.col + len(self.text)


@dataclass(frozen=True)
class ParseResult:
    """Outcome of :func:`parse`: the model is present iff no errors."""

    model: OrgModel | None
    diagnostics: list[Diagnostic]

    @property
    def ok(self) -> bool:
        return self.model is not None


class _LineError(Exception):
    def __init__(self, diagnostic: Diagnostic):
        super().__init__(diagnostic.message)
        self.diagnostic = diagnostic


def _syntax(message: str, line: int, col: int, length: int = 1) -> _LineError:
    return _LineError(Diagnostic(Severity.ERROR, "E-SYNTAX", message, Span(line, col, length)))


def _tokenize(text: str, line_no: int) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    while pos < len(text):
        if text[pos] == "#":
            break
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            if text[pos] == '"':
                raise _syntax("unterminated string", line_no, pos + 1, len(text) - pos)
            raise _syntax(f"unexpected character {text[pos]!r}", line_no, pos + 1)
        kind = m.lastgroup or ""
        if kind != "ws":
            tokens.append(Token(kind, m.group(), line_no, pos + 1))
        pos = m.end()
    return tokens


def _unquote(tok: Token) -> str:
    body = tok.text[1:-1]
    out: list[str] = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "\\":
            esc = body[i + 1]
            if esc not in _ESCAPES:
                raise _syntax(f"unknown escape \\{esc}", tok.line, tok.col + i + 1, 2)
            out.append(_ESCAPES[esc])
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


class _Cursor:
    def __init__(self, tokens: list[Token], line: int, line_len: int):
        self.tokens = tokens
        self.line = line
        self.line_len = line_len
        self.i = 0

    def peek(self) -> Token | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def take(self, kind: str, what: str) -> Token:
        tok = self.peek()
        if tok is None:
            raise _syntax(f"expected {what}", self.line, self.line_len + 1)
        if tok.kind != kind:
            raise _syntax(f"expected {what}, found {tok.text!r}", self.line, tok.col, len(tok.text))
        self.i += 1
        return tok

    def done(self) -> None:
        tok = self.peek()
        if tok is not None:
            raise _syntax(f"unexpected trailing {tok.text!r}", self.line, tok.col, len(tok.text))


def _parse_attrs(cur: _Cursor) -> tuple[dict[str, tuple[Token, Token]], list[Token]]:
    """Attribute block as key -> (key token, value token), plus repeated keys."""
    first = cur.peek()
    if first is None or first.kind != "lbrack":
        return {}, []
    cur.take("lbrack", "'['")
    attrs: dict[str, tuple[Token, Token]] = {}
    dups: list[Token] = []
    while True:
        key = cur.take("id", "attribute key")
        cur.take("eq", "'='")
        val = cur.peek()
        if val is None or val.kind not in ("id", "int", "str"):
            where = val.col if val else cur.line_len + 1
            raise _syntax("expected attribute value", cur.line, where)
        cur.i += 1
        if key.text in attrs:
            dups.append(key)
        attrs[key.text] = (key, val)
        nxt = cur.peek()
        if nxt is not None and nxt.kind == "comma":
            cur.i += 1
            continue
        cur.take("rbrack", "']' or ','")
        break
    return attrs, dups


@dataclass
class _Stmt:
    span: Span
    value_spans: dict[str, Span]


_MOODS = {"happy": Mood.HAPPY, "sad": Mood.SAD, "neutral": Mood.NEUTRAL}
_BOOLS = {"true": True, "false": False}


def parse(text: str, origin: str | None = None) -> ParseResult:
    """Parse organigram source text.

    Returns the model together with all diagnostics found; the model is only
    present when no error-severity diagnostic was produced. All structural
    rules are applied to the parsed statements, so the diagnostics include
    everything :func:`polorg.model.validate` would report, with spans.
    """
    diagnostics: list[Diagnostic] = []
    name: str | None = None
    entities: list[Entity] = []
    formal: list[FormalEdge] = []
    informal: list[InformalEdge] = []
    spans: dict[tuple[str, int], _Stmt] = {}

    def warn(code: str, message: str, span: Span) -> None:
        diagnostics.append(Diagnostic(Severity.WARNING, code, message, span))

    def attr_value(kind: str, tok: Token, expect: str):
        if expect == "quoted":
            if tok.kind != "str":
                raise _syntax(f"{kind} expects a quoted string", tok.line, tok.col, len(tok.text))
            return _unquote(tok)
        if expect == "int":
            if tok.kind != "int":
                raise _syntax(f"{kind} expects an integer", tok.line, tok.col, len(tok.text))
            return int(tok.text)
        if expect == "mood":
            if tok.kind != "id" or tok.text not in _MOODS:
                raise _syntax(f"{kind} expects happy, sad or neutral", tok.line, tok.col, len(tok.text))
            return _MOODS[tok.text]
        if tok.kind != "id" or tok.text not in _BOOLS:
            raise _syntax(f"{kind} expects true or false", tok.line, tok.col, len(tok.text))
        return _BOOLS[tok.text]

    def consume_attrs(cur: _Cursor, allowed: dict[str, str]) -> tuple[dict, dict[str, Span]]:
        raw, dups = _parse_attrs(cur)
        for d in dups:
            warn("W-DUP-ATTR", f"attribute {d.text} repeated; last value wins", Span(d.line, d.col, len(d.text)))
        values: dict = {}
        value_spans: dict[str, Span] = {}
        for key, (ktok, vtok) in raw.items():
            if key not in allowed:
                warn("W-UNKNOWN-ATTR", f"unknown attribute {key} ignored", Span(ktok.line, ktok.col, len(ktok.text)))
                continue
            values[key] = attr_value(key, vtok, allowed[key])
            value_spans[key] = Span(vtok.line, vtok.col, len(vtok.text))
        return values, value_spans

    for line_no, raw in enumerate(text.splitlines(), start=1):
        try:
            tokens = _tokenize(raw, line_no)
        except _LineError as e:
            diagnostics.append(e.diagnostic)
            continue
        if not tokens:
            continue
        head = tokens[0]
        stmt_span = Span(line_no, head.col, tokens[-1].end - head.col)
        cur = _Cursor(tokens, line_no, len(raw))
        try:
            if head.kind != "id":
                raise _syntax(f"expected a statement, found {head.text!r}", line_no, head.col, len(head.text))
            cur.i = 1
            if head.text == "org":
                tok = cur.take("str", "quoted organisation name")
                cur.done()
                if name is None:
                    name = _unquote(tok)
                else:
                    raise _syntax("duplicate org header", line_no, head.col, len(head.text))
            elif head.text == "entity":
                ident = cur.take("id", "entity id")
                values, vspans = consume_attrs(cur, {"label": "quoted", "title": "quoted", "mood": "mood"})
                cur.done()
                entities.append(
                    Entity(ident.text, values.get("label"), values.get("title"), values.get("mood", Mood.NEUTRAL))
                )
                spans[("entity", len(entities) - 1)] = _Stmt(stmt_span, vspans)
            elif head.text == "formal":
                sup = cur.take("id", "superior id")
                cur.take("arrow", "'->'")
                sub = cur.take("id", "subordinate id")
                values, vspans = consume_attrs(cur, {"power": "int", "block": "bool"})
                cur.done()
                formal.append(FormalEdge(sup.text, sub.text, values.get("power", 1), values.get("block", False)))
                spans[("formal", len(formal) - 1)] = _Stmt(stmt_span, vspans)
            elif head.text == "informal":
                src = cur.take("id", "source id")
                cur.take("squig", "'~>'")
                tgt = cur.take("id", "target id")
                values, vspans = consume_attrs(
                    cur, {"strength": "int", "active": "bool", "note": "quoted"}
                )
                cur.done()
                informal.append(
                    InformalEdge(src.text, tgt.text, values.get("strength", 1), values.get("active", True), values.get("note"))
                )
                spans[("informal", len(informal) - 1)] = _Stmt(stmt_span, vspans)
            else:
                raise _syntax(f"unknown statement {head.text!r}", line_no, head.col, len(head.text))
        except _LineError as e:
            diagnostics.append(e.diagnostic)

    if name is None:
        diagnostics.append(
            Diagnostic(Severity.ERROR, "E-SYNTAX", 'missing file header: org "NAME"', Span(1, 1, 1))
        )

    def span_of(kind: str, index: int, fld: str | None = None) -> Span | None:
        stmt = spans.get((kind, index))
        if stmt is None:
            return None
        if fld is not None and fld in stmt.value_spans:
            return stmt.value_spans[fld]
        return stmt.span

    diagnostics.extend(check_parts(entities, formal, informal, span_of))
    diagnostics.sort(key=_diag_key)

    if any(d.severity is Severity.ERROR for d in diagnostics):
        return ParseResult(None, diagnostics)
    model = OrgModel.from_parts(name or "", entities, formal, informal)
    return ParseResult(model, diagnostics)


def quote(s: str) -> str:
    """Quote a string for the surface syntax."""
    body = (
        s.replace("\\", "\\\\")
        .replace('"', '\\"')
        .replace("\n", "\\n")
        .replace("\t", "\\t")
    )
    return f'"{body}"'


def format_model(model: OrgModel) -> str:
    """Canonical textual form: stable statement and attribute order, defaults
    omitted, single trailing newline. ``format_model`` is idempotent under
    re-parsing."""
    lines = [f"org {quote(model.name)}"]
    for eid in canonical_order(model):
        ent = model.entities[eid]
        attrs: list[str] = []
        if ent.label is not None:
            attrs.append(f"label={quote(ent.label)}")
        if ent.title is not None:
            attrs.append(f"title={quote(ent.title)}")
        if ent.mood is not Mood.NEUTRAL:
            attrs.append(f"mood={ent.mood.value}")
        lines.append(f"entity {eid}" + (f" [{', '.join(attrs)}]" if attrs else ""))
    for fe in model.formal:
        attrs = []
        if fe.power != 1:
            attrs.append(f"power={fe.power}")
        if fe.blocked:
            attrs.append("block=true")
        lines.append(f"formal {fe.superior} -> {fe.subordinate}" + (f" [{', '.join(attrs)}]" if attrs else ""))
    for ie in model.informal:
        attrs = []
        if ie.strength != 1:
            attrs.append(f"strength={ie.strength}")
        if not ie.active:
            attrs.append("active=false")
        if ie.note is not None:
            attrs.append(f"note={quote(ie.note)}")
        lines.append(f"informal {ie.source} ~> {ie.target}" + (f" [{', '.join(attrs)}]" if attrs else ""))
    return "\n".join(lines) + "\n"
