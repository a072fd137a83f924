"""Parsing of simple DTDs into element-type trees.

Only a narrow slice of DTD syntax is accepted: ``<!ELEMENT>`` declarations
whose content model is ``(#PCDATA)`` or a flat sequence of child names,
each optionally marked ``*`` or ``+``.  The declarations must form a tree:
one root, every other element type declared as the child of exactly one
parent, no cycles.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType
from typing import Iterator, Mapping

from .errors import DtdSyntaxError, NotSimpleDtd

__all__ = ["Occurrence", "ElementDecl", "DtdTree", "parse_dtd"]


class Occurrence(enum.Enum):
    ONE = ""
    STAR = "*"


@dataclass(frozen=True)
class ElementDecl:
    name: str
    pcdata: bool = False
    children: tuple[tuple[str, Occurrence], ...] = ()

    def __post_init__(self):
        if self.pcdata and self.children:
            raise ValueError(f"PCDATA element {self.name!r} cannot have children")
        names = [c for c, _ in self.children]
        if len(set(names)) != len(names):
            raise NotSimpleDtd(f"element {self.name!r} lists a child type more than once")

    @property
    def child_names(self) -> tuple[str, ...]:
        return tuple(c for c, _ in self.children)

    def to_text(self) -> str:
        if self.pcdata:
            model = "(#PCDATA)"
        elif not self.children:
            # not produced by the parser; kept so to_text() is total
            model = "EMPTY"
        else:
            model = "(" + ",".join(c + occ.value for c, occ in self.children) + ")"
        return f"<!ELEMENT {self.name} {model}>"


@dataclass(frozen=True)
class DtdTree:
    root: str
    decls: Mapping[str, ElementDecl] = field(compare=False)

    def __post_init__(self):
        object.__setattr__(self, "decls", MappingProxyType(dict(self.decls)))

    def __eq__(self, other):
        if not isinstance(other, DtdTree):
            return NotImplemented
        return self.root == other.root and dict(self.decls) == dict(other.decls)

    def __hash__(self):
        return hash((self.root, tuple(sorted(self.decls))))

    @cached_property
    def parent_of(self) -> Mapping[str, str | None]:
        parents: dict[str, str | None] = {self.root: None}
        for decl in self.decls.values():
            for child, _ in decl.children:
                parents[child] = decl.name
        return MappingProxyType(parents)

    def is_leaf(self, name: str) -> bool:
        return self.decls[name].pcdata

    def occurrence(self, name: str) -> Occurrence:
        """Occurrence label of the edge from ``name``'s parent to ``name``."""
        parent = self.parent_of[name]
        if parent is None:
            return Occurrence.ONE
        return dict(self.decls[parent].children)[name]

    def preorder(self) -> Iterator[str]:
        stack = [self.root]
        while stack:
            name = stack.pop()
            yield name
            stack.extend(reversed(self.decls[name].child_names))

    def max_depth(self) -> int:
        depth = {self.root: 1}
        for name in self.preorder():
            for child in self.decls[name].child_names:
                depth[child] = depth[name] + 1
        return max(depth.values())

    def to_text(self) -> str:
        return "\n".join(self.decls[name].to_text() for name in self.preorder()) + "\n"


_NAME = r"[^\W\d][\w.\-]*"
_NAME_RE = re.compile(_NAME)
_SPACE_RE = re.compile(r"\s*")
_ELEMENT_RE = re.compile(r"<!ELEMENT\s+(" + _NAME + r")\s+")
_COMMENT_RE = re.compile(r"<!--.*?-->", re.S)
_PI_RE = re.compile(r"<\?.*?\?>", re.S)
_OTHER_DECL_RE = re.compile(r"<!(ATTLIST|ENTITY|NOTATION)\b")


def _model_error(name: str, detail: str) -> NotSimpleDtd:
    return NotSimpleDtd(f"content model of {name!r}: {detail}")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, msg: str) -> DtdSyntaxError:
        line = self.text.count("\n", 0, self.pos) + 1
        return DtdSyntaxError(f"line {line}: {msg}")

    def skip_space(self):
        self.pos = _SPACE_RE.match(self.text, self.pos).end()

    def peek(self, s: str) -> bool:
        return self.text.startswith(s, self.pos)

    def expect(self, s: str):
        if not self.peek(s):
            found = self.text[self.pos:self.pos + 10] or "end of input"
            raise self.error(f"expected {s!r}, found {found!r}")
        self.pos += len(s)

    def name(self) -> str:
        m = _NAME_RE.match(self.text, self.pos)
        if not m:
            raise self.error("expected an element name")
        self.pos = m.end()
        if self.peek(":"):
            raise self.error("qualified names are not supported")
        return m.group()

    def declarations(self) -> list[ElementDecl]:
        decls = []
        while True:
            self.skip_space()
            if self.pos >= len(self.text):
                return decls
            if self.peek("%"):
                raise NotSimpleDtd("parameter entities are not supported")
            for skip in (_COMMENT_RE, _PI_RE):
                m = skip.match(self.text, self.pos)
                if m:
                    self.pos = m.end()
                    break
            else:
                m = _OTHER_DECL_RE.match(self.text, self.pos)
                if m:
                    if m.group(1) == "ATTLIST":
                        raise NotSimpleDtd("attribute declarations are not supported")
                    raise NotSimpleDtd(f"{m.group(1)} declarations are not supported")
                if self.peek("<!["):
                    raise NotSimpleDtd("conditional sections are not supported")
                m = _ELEMENT_RE.match(self.text, self.pos)
                if not m:
                    if self.peek("<!ELEMENT"):
                        raise self.error("malformed <!ELEMENT declaration")
                    raise self.error(f"unexpected text {self.text[self.pos:self.pos + 20]!r}")
                self.pos = m.end()
                decls.append(self.content(m.group(1)))

    def content(self, name: str) -> ElementDecl:
        if self.peek("%"):
            raise NotSimpleDtd("parameter entities are not supported")
        for keyword in ("EMPTY", "ANY"):
            if self.peek(keyword):
                self.pos += len(keyword)
                self.close()
                raise _model_error(name, f"{keyword} content is not supported")
        group, occ = self.group(name)
        self.close()
        if group == "#PCDATA":
            if occ not in ("", "*"):
                raise self.error(f"invalid occurrence on (#PCDATA) of {name!r}")
            return ElementDecl(name, pcdata=True)
        sep, items = group
        if occ:
            raise _model_error(name, f"occurrence {occ!r} on a whole group is not supported")
        if sep == "|":
            raise _model_error(name, "choice groups are not supported")
        children = []
        for item, item_occ in items:
            if not isinstance(item, str):
                raise _model_error(name, "nested groups are not supported")
            if item_occ == "?":
                raise _model_error(name, f"optional child {item!r}? is not supported")
            children.append((item, Occurrence.ONE if not item_occ else Occurrence.STAR))
        return ElementDecl(name, children=tuple(children))

    def close(self):
        self.skip_space()
        self.expect(">")

    def occurrence(self) -> str:
        if self.pos < len(self.text) and self.text[self.pos] in "*+?":
            self.pos += 1
            return self.text[self.pos - 1]
        return ""

    def group(self, owner: str):
        self.expect("(")
        self.skip_space()
        if self.peek("#PCDATA"):
            self.pos += len("#PCDATA")
            self.skip_space()
            if self.peek("|"):
                raise _model_error(owner, "mixed content is not supported")
            self.expect(")")
            return "#PCDATA", self.occurrence()
        items = []
        sep = None
        while True:
            self.skip_space()
            if self.peek("("):
                item = self.group(owner)
            else:
                item = (self.name(), self.occurrence())
            items.append(item)
            self.skip_space()
            if self.peek(")"):
                self.pos += 1
                return ((sep or ","), items), self.occurrence()
            ch = self.text[self.pos:self.pos + 1]
            if ch not in (",", "|"):
                raise self.error(f"expected ',', '|' or ')' in content model of {owner!r}")
            if sep is not None and ch != sep:
                raise self.error(f"content model of {owner!r} mixes ',' and '|'")
            sep = ch
            self.pos += 1


def parse_dtd(text: str) -> DtdTree:
    """Parse DTD source text into a validated :class:`DtdTree`."""
    if text.startswith("\ufeff"):
        text = text[1:]
    decls: dict[str, ElementDecl] = {}
    for decl in _Parser(text).declarations():
        if decl.name in decls:
            raise NotSimpleDtd(f"element {decl.name!r} is declared twice")
        decls[decl.name] = decl
    if not decls:
        raise DtdSyntaxError("no element declarations found")

    parents: dict[str, list[str]] = {name: [] for name in decls}
    for decl in decls.values():
        for child in decl.child_names:
            if child not in decls:
                raise NotSimpleDtd(f"{decl.name!r} references undeclared element {child!r}")
            parents[child].append(decl.name)
    for name, ps in parents.items():
        if len(ps) > 1:
            raise NotSimpleDtd(f"element {name!r} has more than one parent: {', '.join(ps)}")
    roots = [name for name, ps in parents.items() if not ps]
    if len(roots) > 1:
        raise NotSimpleDtd(f"multiple root elements: {', '.join(roots)}")
    if not roots:
        raise NotSimpleDtd("element declarations are cyclic")

    tree = DtdTree(roots[0], decls)
    seen = set(tree.preorder())
    if len(seen) != len(decls):
        stuck = sorted(set(decls) - seen)
        raise NotSimpleDtd(f"element declarations are cyclic: {', '.join(stuck)}")
    return tree
