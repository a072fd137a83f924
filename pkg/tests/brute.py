"""Exhaustive search for a zero-buffer event/fragment table.

Used to check that every program the compiler rejects really has no
single-pass evaluation.  The search is confined to a program class where
rejection is meaningful: every reached rule outputs something that depends
on the document (non-leaf rules apply templates, leaf rules emit their
text), constants are distinct single characters, and leaf texts are
distinct characters that differ between the two instances used.

Within one rule no select path may be a prefix of another.  Nested
selections are rejected by the compiler without an exact analysis (some of
them are streamable), so they are outside the class checked here.
"""

from __future__ import annotations

import itertools
import random

from spmxslt.dtd import DtdTree, Occurrence

CONST_CHARS = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"
TEXT_CHARS = "abcdefghijklmnopqrstuvwxyz0123456789"


def _related(p: tuple, q: tuple) -> bool:
    n = min(len(p), len(q))
    return p[:n] == q[:n]


def class_program(rng: random.Random, dtd: DtdTree, nested: bool = False) -> str:
    consts = iter(CONST_CHARS)

    def maybe_const(body):
        if rng.random() < 0.5:
            body.append(("c", next(consts)))

    def paths_below(name, max_len):
        out, stack = [], [(name, ())]
        while stack:
            here, path = stack.pop()
            if len(path) == max_len:
                continue
            for child in dtd.decls[here].child_names:
                out.append(path + (child,))
                stack.append((child, path + (child,)))
        return out

    rules, work = {}, ["/"]
    while work:
        owner = work.pop()
        body = []
        if owner != "/" and dtd.is_leaf(owner):
            maybe_const(body)
            body.append(("v",))
            maybe_const(body)
            rules[owner] = body
            continue
        if owner == "/":
            paths = [(dtd.root,) + p for p in paths_below(dtd.root, 2)] + [(dtd.root,)]
        else:
            paths = paths_below(owner, 3)
        want = rng.choice([1, 2, 2, 3])
        picked = []
        for p in rng.sample(paths, len(paths)):
            if len(picked) < want and (nested or not any(_related(p, q) for q in picked)):
                picked.append(p)
        for p in picked:
            maybe_const(body)
            body.append(("a", "/".join(p)))
            if p[-1] not in rules and p[-1] not in work:
                work.append(p[-1])
        maybe_const(body)
        rules[owner] = body

    out = ['<xsl:stylesheet version="1.0" xmlns:xsl="http://www.w3.org/1999/XSL/Transform">']
    for owner, body in rules.items():
        out.append(f'<xsl:template match="{owner}">')
        for item in body:
            if item[0] == "c":
                out.append(item[1])
            elif item[0] == "a":
                out.append(f'<xsl:apply-templates select="{item[1]}"/>')
            else:
                out.append('<xsl:value-of select="."/>')
        out.append("</xsl:template>")
    out.append("</xsl:stylesheet>")
    return "".join(out)


def instance(dtd: DtdTree, stars: int, texts) -> tuple[str, list[tuple]]:
    """Document with every starred child repeated ``stars`` times, plus its
    event list: ``("s", name)`` and ``("e", name, text_or_None)``."""
    parts, events = [], []

    def visit(name):
        parts.append(f"<{name}>")
        events.append(("s", name))
        text = None
        if dtd.is_leaf(name):
            text = next(texts)
            parts.append(text)
        for child, occ in dtd.decls[name].children:
            for _ in range(1 if occ is Occurrence.ONE else stars):
                visit(child)
        parts.append(f"</{name}>")
        events.append(("e", name, text))

    visit(dtd.root)
    return "".join(parts), events


def _emit(events, table) -> str:
    out = []
    for ev in events:
        if ev[0] == "s":
            out.append(table["start", ev[1]])
        else:
            name, text = ev[1], ev[2]
            if text is not None:
                out.append(table["pre", name])
                if table["emit", name]:
                    out.append(text)
            out.append(table["post", name])
    return "".join(out)


def find_table(events1, target1: str, events2, target2: str) -> dict | None:
    """Search all fragment tables that reproduce ``target1`` on ``events1``
    and return one that also reproduces ``target2`` on ``events2``."""
    consts = set(CONST_CHARS)
    table: dict = {}

    def runs(pos):
        # candidate fragments at pos: every constant-only prefix of target1[pos:]
        end = pos
        while end < len(target1) and target1[end] in consts:
            end += 1
        return range(end - pos + 1)

    def slots(ev):
        if ev[0] == "s":
            return [("start", ev[1])]
        if ev[2] is not None:
            return [("pre", ev[1]), ("emit", ev[1]), ("post", ev[1])]
        return [("post", ev[1])]

    plan = [(key, ev) for ev in events1 for key in slots(ev)]

    def search(i, pos):
        if i == len(plan):
            if pos == len(target1) and _emit(events2, table) == target2:
                return dict(table)
            return None
        key, ev = plan[i]
        if key in table:
            val = table[key]
            if key[0] == "emit":
                piece = ev[2] if val else ""
            else:
                piece = val
            if target1.startswith(piece, pos):
                return search(i + 1, pos + len(piece))
            return None
        if key[0] == "emit":
            options = [(True, ev[2]), (False, "")]
        else:
            options = [(target1[pos:pos + n],) * 2 for n in runs(pos)]
        for val, piece in options:
            if not target1.startswith(piece, pos):
                continue
            table[key] = val
            found = search(i + 1, pos + len(piece))
            del table[key]
            if found is not None:
                return found
        return None

    return search(0, 0)


def two_instances(dtd: DtdTree):
    """One instance with every star taken once, one with every star taken
    twice; no text character is shared between or within them."""
    texts = itertools.chain(TEXT_CHARS, (chr(0x4E00 + i) for i in itertools.count()))
    return instance(dtd, 1, texts), instance(dtd, 2, texts)
