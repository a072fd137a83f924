"""Transformation trees: the DTD tree annotated with template rules.

Every element type gets a :class:`TTNode`.  A node whose element type is
matched by a rule carries that rule plus the rule's body as a list of
:class:`ConstNode` and :class:`CallEdge` items, where each call edge points
at the node its ``apply-templates`` selects.

The ``/`` rule sits on a virtual document node above the DTD root, exactly
as XSLT sees it: its select paths start with the root element's name.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Union

from .dtd import DtdTree, Occurrence
from .errors import LeafMismatch, MissingRule, NoSuchElement
from .xslt import Apply, Const, TemplateRule, ValueOfSelf, XsltProgram

__all__ = ["TTNode", "ConstNode", "CallEdge", "ValueNode", "TransformationTree", "build_ttree"]


@dataclass(eq=False)
class TTNode:
    element: str
    occurrence: Occurrence = Occurrence.ONE
    parent: TTNode | None = None
    index: int = 0  # position among the parent's DTD children
    pcdata: bool = False
    dtd_children: list[TTNode] = field(default_factory=list)
    rule: TemplateRule | None = None
    xslt_children: list[TTItem] = field(default_factory=list)
    reachable: bool = False
    is_document: bool = False

    def __repr__(self):
        return f"TTNode({self.element!r})"

    def child(self, name: str) -> TTNode | None:
        for c in self.dtd_children:
            if c.element == name:
                return c
        return None

    def walk(self) -> Iterator[TTNode]:
        yield self
        for c in self.dtd_children:
            yield from c.walk()


@dataclass(frozen=True, eq=False)
class ConstNode:
    text: str


@dataclass(frozen=True, eq=False)
class ValueNode:
    """``value-of select="."`` inside a leaf rule."""


@dataclass(frozen=True, eq=False)
class CallEdge:
    target: TTNode
    path: tuple[TTNode, ...]  # owner's child first, target last
    path_starred: bool
    item_index: int  # position of the apply-templates in the rule body

    @property
    def first_step(self) -> TTNode:
        return self.path[0]


TTItem = Union[ConstNode, CallEdge, ValueNode]


DOCUMENT = "#document"


@dataclass(eq=False)
class TransformationTree:
    document: TTNode  # virtual parent of the root element; carries the "/" rule
    root: TTNode
    nodes: dict[str, TTNode]
    # rules that can never fire: unreached, or shadowed by the "/" rule
    dead_rules: list[TemplateRule] = field(default_factory=list)

    def node(self, name: str) -> TTNode:
        return self.nodes[name]

    def call_edges(self) -> Iterator[tuple[TTNode, CallEdge]]:
        for n in self.document.walk():
            if n.reachable:
                for item in n.xslt_children:
                    if isinstance(item, CallEdge):
                        yield n, item

    def dump(self) -> str:
        lines: list[str] = []

        def visit(n: TTNode, depth: int):
            pad = "  " * depth
            star = "*" if n.occurrence is Occurrence.STAR else ""
            flags = []
            if n.pcdata:
                flags.append("#PCDATA")
            if n.rule is not None:
                flags.append(f"rule match={str(n.rule.pattern)!r}")
                if not n.reachable:
                    flags.append("unreached")
            lines.append(f"{pad}{n.element}{star}" + (f"  [{', '.join(flags)}]" if flags else ""))
            for item in n.xslt_children:
                if isinstance(item, ConstNode):
                    lines.append(f"{pad}  | const {item.text!r}")
                elif isinstance(item, ValueNode):
                    lines.append(f"{pad}  | value-of .")
                else:
                    route = "/".join(p.element for p in item.path)
                    lines.append(f"{pad}  | call {route}{' (starred)' if item.path_starred else ''}")
            for c in n.dtd_children:
                visit(c, depth + 1)

        visit(self.document, 0)
        return "\n".join(lines) + "\n"


def _mirror(dtd: DtdTree) -> dict[str, TTNode]:
    nodes = {name: TTNode(name, pcdata=dtd.is_leaf(name)) for name in dtd.decls}
    for name, decl in dtd.decls.items():
        parent = nodes[name]
        for i, (child, occ) in enumerate(decl.children):
            node = nodes[child]
            node.parent, node.index, node.occurrence = parent, i, occ
            parent.dtd_children.append(node)
    return nodes


def _resolve(owner: TTNode, rule: TemplateRule, item_index: int, apply: Apply) -> CallEdge:
    path = []
    here = owner
    for step in apply.select:
        nxt = here.child(step)
        if nxt is None:
            raise NoSuchElement(
                f"rule match={str(rule.pattern)!r} item {item_index}: {step!r} is not "
                f"a child of {here.element!r} (select {str(apply)!r})"
            )
        path.append(nxt)
        here = nxt
    starred = any(p.occurrence is Occurrence.STAR for p in path)
    return CallEdge(here, tuple(path), starred, item_index)


def _attach_items(node: TTNode):
    rule = node.rule
    if rule.emits_pcdata and not node.pcdata:
        raise LeafMismatch(
            f"rule match={str(rule.pattern)!r} uses value-of on {node.element!r}, "
            "which is not a #PCDATA element"
        )
    items: list[TTItem] = []
    for i, item in enumerate(rule.template):
        if isinstance(item, Const):
            items.append(ConstNode(item.text))
        elif isinstance(item, ValueOfSelf):
            items.append(ValueNode())
        else:
            items.append(_resolve(node, rule, i, item))
    node.xslt_children = items


def build_ttree(dtd: DtdTree, program: XsltProgram) -> TransformationTree:
    """Combine a DTD tree and a program into a transformation tree."""
    nodes = _mirror(dtd)
    root = nodes[dtd.root]
    document = TTNode(DOCUMENT, dtd_children=[root], is_document=True)
    root.parent = document
    tree = TransformationTree(document, root, nodes)

    for rule in program.rules:
        if rule.pattern.is_root:
            document.rule = rule
            continue
        name = rule.pattern.element
        if name not in nodes:
            raise NoSuchElement(f"rule match={name!r}: no such element type in the DTD")
        nodes[name].rule = rule

    # least fixed point of call-edge traversal from the "/" rule
    work = [document]
    document.reachable = True
    while work:
        node = work.pop()
        _attach_items(node)
        for item in node.xslt_children:
            if not isinstance(item, CallEdge):
                continue
            target = item.target
            if target.rule is None:
                where = f"rule match={str(node.rule.pattern)!r} item {item.item_index}"
                if target.pcdata:
                    raise LeafMismatch(f"{where}: selected #PCDATA element {target.element!r} has no rule")
                raise MissingRule(f"{where}: selected element {target.element!r} has no rule")
            if not target.reachable:
                target.reachable = True
                work.append(target)

    for node in nodes.values():
        if node.rule is not None and not node.reachable:
            tree.dead_rules.append(node.rule)
            try:
                _attach_items(node)
            except (NoSuchElement, LeafMismatch):
                node.xslt_children = []
    return tree
