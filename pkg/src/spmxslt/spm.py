"""Compilation of a transformation tree into a streaming processing model.

The model attaches an output fragment to the start and end event of every
element type.  Evaluating the program on a document is then a matter of
concatenating fragments in event order, with the character data of marked
leaves spliced into their end fragment.

Placement of a rule's constants, for a rule on element type ``n`` whose
body is ``C0 A1 C1 A2 ... Ak Ck`` (``Ci`` constants, possibly empty, ``Ai``
apply-templates):

* ``C0`` is appended to ``start(n)``.
* ``Ci`` between ``Ai`` and ``Ai+1``: the two select paths share a prefix
  (which must never repeat) and then fork into children ``u`` and ``v`` of
  some element type ``m``, with ``u`` before ``v``.  ``Ci`` goes to the end
  of ``u`` if ``u`` occurs once, otherwise to the start of ``v`` if ``v``
  occurs once, otherwise to the start of a non-repeating child of ``m``
  sitting between them.  If none exists the program is rejected.
* ``Ck`` goes to the end of ``Ak``'s first step if that step occurs once,
  otherwise to ``end(n)``.
* A leaf rule ``C? value-of C?`` fills the leaf's end tri-tuple.

The ``/`` rule is placed on a virtual document node whose only child is the
root element; whatever lands on that node is folded into the root's
fragments at the end.

Constants placed by a parent rule wrap the element's own fragments: they
are prepended to its start and appended to its end.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping

from .dtd import DtdTree, Occurrence
from .errors import NotStreamable
from .ttree import CallEdge, ConstNode, TransformationTree, TTNode, ValueNode, build_ttree
from .xslt import XsltProgram

__all__ = ["EventActions", "SpmModel", "convert", "convert_tree", "build_spm"]


@dataclass(frozen=True)
class EventActions:
    start: str = ""
    end_pre: str = ""
    emit_pcdata: bool = False
    end_post: str = ""

    @property
    def is_empty(self) -> bool:
        return not (self.start or self.end_pre or self.emit_pcdata or self.end_post)

    def to_json_obj(self) -> dict:
        return {
            "start": self.start,
            "endPre": self.end_pre,
            "emitPcdata": self.emit_pcdata,
            "endPost": self.end_post,
        }


@dataclass(frozen=True)
class SpmModel:
    root: str
    actions: Mapping[str, EventActions]
    dtd: DtdTree = field(compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "actions", MappingProxyType(dict(self.actions)))

    def __eq__(self, other):
        if not isinstance(other, SpmModel):
            return NotImplemented
        return self.root == other.root and dict(self.actions) == dict(other.actions)

    def __hash__(self):
        return hash(self.root)

    def fragments(self) -> list[str]:
        out = []
        for act in self.actions.values():
            out += [act.start, act.end_pre, act.end_post]
        return out

    def to_json_obj(self) -> dict:
        return {
            "root": self.root,
            "actions": {name: self.actions[name].to_json_obj() for name in sorted(self.actions)},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), indent=2, ensure_ascii=False) + "\n"

    @classmethod
    def from_json_obj(cls, obj: dict, dtd: DtdTree) -> SpmModel:
        if obj["root"] != dtd.root:
            raise ValueError(f"model root {obj['root']!r} does not match DTD root {dtd.root!r}")
        actions = {}
        for name, act in obj["actions"].items():
            if name not in dtd.decls:
                raise ValueError(f"model mentions unknown element type {name!r}")
            actions[name] = EventActions(act["start"], act["endPre"], bool(act["emitPcdata"]), act["endPost"])
        for name in dtd.decls:
            actions.setdefault(name, EventActions())
        return cls(obj["root"], actions, dtd)


@dataclass
class _Slots:
    prefix: str = ""  # from the parent's rule, before start(n)'s own text
    own_start: str = ""
    end_pre: str = ""
    emit: bool = False
    own_end: str = ""
    suffix: str = ""  # from the parent's rule, after end(n)'s own text


def _place_between(owner: TTNode, a: CallEdge, b: CallEdge, const: ConstNode | None,
                   table: dict[TTNode, _Slots]):
    pattern = str(owner.rule.pattern)
    pa, pb = a.path, b.path
    k = 0
    while k < len(pa) and k < len(pb) and pa[k] is pb[k]:
        k += 1
    if k == len(pa) or k == len(pb):
        raise NotStreamable(
            NotStreamable.ORDER_VIOLATION, pattern, b.item_index,
            f"selected elements {a.target.element!r} and {b.target.element!r} overlap",
        )
    for shared in pa[:k]:
        if shared.occurrence is Occurrence.STAR:
            raise NotStreamable(
                NotStreamable.SHARED_STAR_CHILD, pattern, b.item_index,
                f"{a.target.element!r} and {b.target.element!r} are both selected through "
                f"repeated element {shared.element!r}",
            )
    u, v = pa[k], pb[k]
    if u.index > v.index:
        raise NotStreamable(
            NotStreamable.ORDER_VIOLATION, pattern, b.item_index,
            f"{b.target.element!r} is output after {a.target.element!r} but precedes it in the document",
        )
    if const is None:
        return
    if u.occurrence is Occurrence.ONE:
        table[u].suffix += const.text
    elif v.occurrence is Occurrence.ONE:
        table[v].prefix = const.text + table[v].prefix
    else:
        parent = u.parent
        for w in parent.dtd_children[u.index + 1:v.index]:
            if w.occurrence is Occurrence.ONE:
                table[w].prefix += const.text
                return
        raise NotStreamable(
            NotStreamable.STAR_CONST_STAR, pattern, b.item_index - 1,
            f"constant between repeated {u.element!r} and repeated {v.element!r} has no event to attach to",
        )


def build_spm(node: TTNode, table: dict[TTNode, _Slots]):
    """Place the constants of ``node``'s rule, then recurse into its targets."""
    items = node.xslt_children
    mine = table[node]
    if any(isinstance(item, ValueNode) for item in items):
        k = next(i for i, item in enumerate(items) if isinstance(item, ValueNode))
        mine.end_pre = items[0].text if k == 1 else ""
        mine.emit = True
        mine.own_end = items[k + 1].text if k + 1 < len(items) else ""
        return

    rest = list(items)
    if rest and isinstance(rest[0], ConstNode):
        mine.own_start += rest.pop(0).text
    calls: list[CallEdge] = []
    after: list[ConstNode | None] = []
    for item in rest:
        if isinstance(item, CallEdge):
            calls.append(item)
            after.append(None)
        else:
            after[-1] = item

    for j in range(len(calls) - 1):
        _place_between(node, calls[j], calls[j + 1], after[j], table)
    if calls and after[-1] is not None:
        last = calls[-1].first_step
        if last.occurrence is Occurrence.ONE:
            table[last].suffix += after[-1].text
        else:
            mine.own_end += after[-1].text

    for call in calls:
        build_spm(call.target, table)


def convert_tree(tree: TransformationTree, dtd: DtdTree) -> SpmModel:
    table = {node: _Slots() for node in tree.document.walk()}
    build_spm(tree.document, table)
    # the document node has no events of its own: its fragments wrap the root's
    doc = table.pop(tree.document)
    top = table[tree.root]
    top.prefix = doc.prefix + doc.own_start + top.prefix
    top.suffix += doc.own_end + doc.suffix
    actions = {}
    for node, s in table.items():
        actions[node.element] = EventActions(
            start=s.prefix + s.own_start,
            end_pre=s.end_pre,
            emit_pcdata=s.emit,
            end_post=s.own_end + s.suffix,
        )
    return SpmModel(tree.root.element, actions, dtd)


def convert(dtd: DtdTree, program: XsltProgram) -> SpmModel:
    """Compile ``program`` against ``dtd``; raise :class:`NotStreamable` if it
    cannot run without buffering."""
    return convert_tree(build_ttree(dtd, program), dtd)
