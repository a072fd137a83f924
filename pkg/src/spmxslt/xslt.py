"""Parsing of XSLT core stylesheets.

A stylesheet is reduced to an ordered list of template rules.  Each rule
body becomes a sequence of output items: constant markup (kept byte-for-byte
as written in the stylesheet), ``apply-templates`` over a child path, or
``value-of select="."``.
"""

from __future__ import annotations

import re
import xml.parsers.expat
from dataclasses import dataclass
from typing import Iterator, Union

from .errors import DuplicateRule, StylesheetSyntaxError, UnsupportedConstruct

__all__ = [
    "XSLT_NS",
    "MatchPattern",
    "ROOT",
    "Const",
    "Apply",
    "ValueOfSelf",
    "OutputItem",
    "TemplateRule",
    "XsltProgram",
    "parse_xslt",
]

XSLT_NS = "http://www.w3.org/1999/XSL/Transform"

_NCNAME_RE = re.compile(r"[^\W\d][\w.\-]*\Z")
_WRAPPER_RE = re.compile(r"\s*(?:<\?xml[^>]*\?>\s*)?(?:<!--.*?-->\s*)*<(?:[\w.\-]+:)?(stylesheet|transform)\b", re.S)
_XSLT_WS = " \t\r\n"


@dataclass(frozen=True)
class MatchPattern:
    """``element is None`` means the root pattern ``/``."""

    element: str | None = None

    @property
    def is_root(self) -> bool:
        return self.element is None

    def __str__(self):
        return "/" if self.element is None else self.element


ROOT = MatchPattern()


@dataclass(frozen=True)
class Const:
    text: str


@dataclass(frozen=True)
class Apply:
    select: tuple[str, ...]

    def __post_init__(self):
        if not self.select:
            raise ValueError("apply-templates needs at least one step")

    def __str__(self):
        return "/".join(self.select)


@dataclass(frozen=True)
class ValueOfSelf:
    pass


OutputItem = Union[Const, Apply, ValueOfSelf]


@dataclass(frozen=True)
class TemplateRule:
    pattern: MatchPattern
    template: tuple[OutputItem, ...]

    @property
    def emits_pcdata(self) -> bool:
        return any(isinstance(item, ValueOfSelf) for item in self.template)

    def applies(self) -> Iterator[tuple[int, Apply]]:
        for i, item in enumerate(self.template):
            if isinstance(item, Apply):
                yield i, item


@dataclass(frozen=True)
class XsltProgram:
    rules: tuple[TemplateRule, ...]

    def rule_for(self, pattern: MatchPattern) -> TemplateRule | None:
        for rule in self.rules:
            if rule.pattern == pattern:
                return rule
        return None

    @property
    def root_rule(self) -> TemplateRule:
        rule = self.rule_for(ROOT)
        assert rule is not None
        return rule

    def constants(self) -> Iterator[str]:
        for rule in self.rules:
            for item in rule.template:
                if isinstance(item, Const):
                    yield item.text


# -- event capture ---------------------------------------------------------

@dataclass
class _Event:
    kind: str  # "start", "end", "text", "skip"
    raw: str = ""
    name: tuple[str | None, str] = (None, "")
    attrs: dict | None = None
    data: str = ""
    line: int = 0


def _split_name(qname: str) -> tuple[str | None, str]:
    if " " in qname:
        uri, local = qname.split(" ", 1)
        return uri, local
    return None, qname


def _capture(source: bytes) -> list[_Event]:
    """Run expat over ``source``, recording each event with its raw bytes."""
    parser = xml.parsers.expat.ParserCreate(namespace_separator=" ")
    marks: list[tuple[int, _Event]] = []

    def mark(ev: _Event):
        ev.line = parser.CurrentLineNumber
        marks.append((parser.CurrentByteIndex, ev))

    def start(name, attrs):
        mark(_Event("start", name=_split_name(name), attrs=attrs))

    def end(name):
        mark(_Event("end", name=_split_name(name)))

    parser.StartElementHandler = start
    parser.EndElementHandler = end
    parser.CharacterDataHandler = lambda data: mark(_Event("text", data=data))
    parser.CommentHandler = lambda data: mark(_Event("skip"))
    parser.ProcessingInstructionHandler = lambda target, data: mark(_Event("skip"))
    # CDATA delimiters are kept as raw constant text
    parser.StartCdataSectionHandler = lambda: mark(_Event("text", data="\0cdata"))
    parser.EndCdataSectionHandler = lambda: mark(_Event("text", data="\0cdata"))
    try:
        parser.Parse(source, True)
    except xml.parsers.expat.ExpatError as exc:
        raise StylesheetSyntaxError(f"stylesheet is not well-formed: {exc}") from None

    events = []
    for k, (offset, ev) in enumerate(marks):
        stop = marks[k + 1][0] if k + 1 < len(marks) else len(source)
        ev.raw = source[offset:stop].decode("utf-8")
        events.append(ev)
    return events


def _wrap_bare(text: str) -> str:
    if _WRAPPER_RE.match(text):
        return text
    decl = re.match(r"\s*<\?xml[^>]*\?>", text)
    head, body = (text[:decl.end()], text[decl.end():]) if decl else ("", text)
    return f'{head}<xsl:stylesheet xmlns:xsl="{XSLT_NS}" version="1.0">{body}</xsl:stylesheet>'


# -- rule construction -----------------------------------------------------

def _parse_pattern(match: str, line: int) -> MatchPattern:
    match = match.strip()
    if match == "/":
        return ROOT
    if _NCNAME_RE.match(match):
        return MatchPattern(match)
    raise UnsupportedConstruct(f"line {line}: match pattern {match!r} is not '/' or a single element name")


def _parse_select(select: str | None, line: int) -> Apply:
    if select is None:
        raise UnsupportedConstruct(f"line {line}: apply-templates without select")
    steps = select.strip().split("/")
    for step in steps:
        if not _NCNAME_RE.match(step):
            raise UnsupportedConstruct(f"line {line}: select {select!r} is not a child-name path")
    return Apply(tuple(steps))


def _check_attrs(attrs: dict, allowed: set[str], what: str, line: int):
    for key in attrs:
        if " " in key:
            continue  # foreign-namespace attributes are ignored by XSLT
        if key not in allowed:
            raise UnsupportedConstruct(f"line {line}: attribute {key!r} on {what} is not supported")


class _BodyBuilder:
    def __init__(self, pattern: MatchPattern, line: int):
        self.pattern = pattern
        self.line = line
        self.items: list[OutputItem] = []
        self.pending_text: list[_Event] = []

    def add_const(self, raw: str):
        if not raw:
            return
        if self.items and isinstance(self.items[-1], Const):
            self.items[-1] = Const(self.items[-1].text + raw)
        else:
            self.items.append(Const(raw))

    def flush_text(self):
        if not self.pending_text:
            return
        data = "".join(ev.data for ev in self.pending_text if ev.data != "\0cdata")
        in_cdata = any(ev.data == "\0cdata" for ev in self.pending_text)
        if in_cdata or data.strip(_XSLT_WS):
            self.add_const("".join(ev.raw for ev in self.pending_text))
        self.pending_text = []

    def finish(self) -> TemplateRule:
        self.flush_text()
        template = tuple(self.items)
        if any(isinstance(item, ValueOfSelf) for item in template):
            kinds = [type(item) for item in template]
            ok = kinds in (
                [ValueOfSelf],
                [Const, ValueOfSelf],
                [ValueOfSelf, Const],
                [Const, ValueOfSelf, Const],
            )
            if not ok:
                raise UnsupportedConstruct(
                    f"line {self.line}: rule match={str(self.pattern)!r} mixes value-of with "
                    "other instructions; only CONST? value-of CONST? is supported"
                )
        return TemplateRule(self.pattern, template)


def _rules(events: list[_Event]) -> Iterator[TemplateRule]:
    it = iter(events)
    root = next(ev for ev in it if ev.kind == "start")
    if root.name != (XSLT_NS, "stylesheet") and root.name != (XSLT_NS, "transform"):
        raise UnsupportedConstruct(f"document element {root.name[1]!r} is not xsl:stylesheet")
    builder: _BodyBuilder | None = None
    for ev in it:
        if builder is None:
            if ev.kind == "text":
                if ev.data.strip(_XSLT_WS) and ev.data != "\0cdata":
                    raise UnsupportedConstruct(f"line {ev.line}: text outside xsl:template")
                continue
            if ev.kind == "skip":
                continue
            if ev.kind == "end":
                return  # closes the stylesheet element
            uri, local = ev.name
            if uri != XSLT_NS or local != "template":
                shown = f"xsl:{local}" if uri == XSLT_NS else local
                raise UnsupportedConstruct(f"line {ev.line}: top-level element {shown!r} is not supported")
            _check_attrs(ev.attrs, {"match"}, "xsl:template", ev.line)
            if "match" not in ev.attrs:
                raise UnsupportedConstruct(f"line {ev.line}: named templates are not supported")
            builder = _BodyBuilder(_parse_pattern(ev.attrs["match"], ev.line), ev.line)
            continue

        if ev.kind == "text":
            builder.pending_text.append(ev)
            continue
        if ev.kind == "skip":
            continue
        builder.flush_text()
        uri, local = ev.name
        if uri == XSLT_NS:
            if ev.kind == "end":
                if local == "template":
                    yield builder.finish()
                    builder = None
                continue
            _instruction(builder, local, ev, it)
        else:
            builder.add_const(ev.raw)


def _instruction(builder: _BodyBuilder, local: str, ev: _Event, it: Iterator[_Event]):
    if local == "apply-templates":
        _check_attrs(ev.attrs, {"select"}, "xsl:apply-templates", ev.line)
        builder.items.append(_parse_select(ev.attrs.get("select"), ev.line))
    elif local == "value-of":
        _check_attrs(ev.attrs, {"select"}, "xsl:value-of", ev.line)
        if ev.attrs.get("select", "").strip() != ".":
            raise UnsupportedConstruct(f"line {ev.line}: only value-of select=\".\" is supported")
        builder.items.append(ValueOfSelf())
    else:
        raise UnsupportedConstruct(f"line {ev.line}: xsl:{local} is not supported")
    # the instruction must be empty apart from whitespace
    for inner in it:
        if inner.kind == "end":
            return
        if inner.kind == "text" and not inner.data.strip(_XSLT_WS):
            continue
        if inner.kind == "skip":
            continue
        raise UnsupportedConstruct(f"line {inner.line}: content inside xsl:{local} is not supported")


def parse_xslt(text: str | bytes) -> XsltProgram:
    """Parse stylesheet source into an :class:`XsltProgram`.

    The ``xsl:stylesheet`` wrapper may be omitted, in which case the text is
    treated as a bare list of ``xsl:template`` elements.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    text = text.lstrip("\ufeff")
    events = _capture(_wrap_bare(text).encode("utf-8"))

    rules: list[TemplateRule] = []
    seen: set[MatchPattern] = set()
    for rule in _rules(events):
        if rule.pattern in seen:
            raise DuplicateRule(f"more than one rule with match={str(rule.pattern)!r}")
        seen.add(rule.pattern)
        rules.append(rule)
    if ROOT not in seen:
        raise UnsupportedConstruct('stylesheet has no match="/" rule')
    return XsltProgram(tuple(rules))
