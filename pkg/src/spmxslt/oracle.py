"""In-memory reference evaluator.

Documents are parsed into a full tree first and templates are applied by
plain recursion, the way a DOM-based XSLT processor would.  Used as ground
truth for the streaming engine and as the baseline in benchmarks.
"""

from __future__ import annotations

import sys
import xml.parsers.expat
from typing import BinaryIO

from .dtd import DtdTree, Occurrence
from .errors import MalformedXml, MissingRule, PathMismatch
from .xslt import Apply, Const, MatchPattern, XsltProgram

__all__ = ["DocNode", "parse_document", "parse_document_file", "transform_dom", "tree_footprint", "escape_text"]


class DocNode:
    __slots__ = ("name", "children", "text")

    def __init__(self, name: str, children: list[DocNode] | None = None, text: str | None = None):
        self.name = name
        self.children = children if children is not None else []
        self.text = text

    def __repr__(self):
        return f"DocNode({self.name!r}, {len(self.children)} children, text={self.text!r})"

    def __eq__(self, other):
        if not isinstance(other, DocNode):
            return NotImplemented
        return self.name == other.name and self.text == other.text and self.children == other.children

    def count(self) -> int:
        total, stack = 0, [self]
        while stack:
            node = stack.pop()
            total += 1
            stack.extend(node.children)
        return total


def escape_text(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _builder():
    parser = xml.parsers.expat.ParserCreate()
    parser.buffer_text = True
    parser.buffer_size = 1 << 16
    stack: list[tuple[DocNode, list[str]]] = []
    result: list[DocNode] = []
    names: dict[str, str] = {}

    def start(name, attrs):
        node = DocNode(names.setdefault(name, name))
        if stack:
            stack[-1][0].children.append(node)
        else:
            result.append(node)
        stack.append((node, []))

    def end(name):
        node, chunks = stack.pop()
        if chunks:
            text = "".join(chunks)
            if not node.children or text.strip(" \t\r\n"):
                node.text = text

    def chars(data):
        if stack:
            stack[-1][1].append(data)

    parser.StartElementHandler = start
    parser.EndElementHandler = end
    parser.CharacterDataHandler = chars
    return parser, result


def parse_document(text: str | bytes) -> DocNode:
    """Parse a whole document into a :class:`DocNode` tree."""
    if isinstance(text, str):
        text = text.encode("utf-8")
    parser, result = _builder()
    try:
        parser.Parse(text, True)
    except xml.parsers.expat.ExpatError as exc:
        raise MalformedXml(str(exc)) from None
    return result[0]


def parse_document_file(fp: BinaryIO) -> DocNode:
    parser, result = _builder()
    try:
        parser.ParseFile(fp)
    except xml.parsers.expat.ExpatError as exc:
        raise MalformedXml(str(exc)) from None
    return result[0]


def tree_footprint(doc: DocNode) -> int:
    """Rough byte count of the in-memory tree (node objects, child lists, text)."""
    total, stack = 0, [doc]
    getsizeof = sys.getsizeof
    while stack:
        node = stack.pop()
        total += getsizeof(node) + getsizeof(node.children)
        if node.text is not None:
            total += getsizeof(node.text)
        stack.extend(node.children)
    return total


def transform_dom(program: XsltProgram, doc: DocNode, dtd: DtdTree | None = None) -> str:
    """Evaluate ``program`` on ``doc`` by direct template application.

    With ``dtd`` given, every non-repeating step of a select path must be
    present exactly once, else :class:`PathMismatch`.
    """
    rules = {rule.pattern: rule for rule in program.rules}
    out: list[str] = []

    def select(context: list[DocNode], apply: Apply) -> list[DocNode]:
        nodes = context
        for step in apply.select:
            found = []
            for node in nodes:
                matches = [c for c in node.children if c.name == step]
                if dtd is not None and step in dtd.decls and dtd.occurrence(step) is Occurrence.ONE \
                        and len(matches) != 1:
                    raise PathMismatch(
                        f"<{node.name}> has {len(matches)} <{step}> children where the DTD requires one"
                    )
                found += matches
            nodes = found
        return nodes

    def apply_rule(pattern: MatchPattern, context: list[DocNode], current: DocNode | None):
        for item in rules[pattern].template:
            if isinstance(item, Const):
                out.append(item.text)
            elif isinstance(item, Apply):
                for target in select(context, item):
                    key = MatchPattern(target.name)
                    if key not in rules:
                        raise MissingRule(f"no rule matches selected element {target.name!r}")
                    apply_rule(key, [target], target)
            else:
                out.append(escape_text(_string_value(current)))

    # the "/" rule runs at the document node, whose only child is the root element
    apply_rule(MatchPattern(None), [DocNode("#document", [doc])], None)
    return "".join(out)


def _string_value(node: DocNode | None) -> str:
    if node is None:
        return ""
    if not node.children:
        return node.text or ""
    return (node.text or "") + "".join(_string_value(c) for c in node.children)
