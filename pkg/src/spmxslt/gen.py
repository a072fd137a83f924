"""Seeded synthetic documents for a DTD tree.

The document is split into a fixed *frame* and a run of *driver* subtrees.
The driver is the first repeatable child edge met in preorder; everything
on the path to it occurs exactly once, so the frame is one fixed prefix and
suffix.  Driver subtrees are drawn from their own random stream and written
one at a time until the target size is reached, which keeps memory flat and
makes output size monotone in ``target_bytes``.
"""

from __future__ import annotations

import io
import math
import random
import re
from dataclasses import dataclass
from typing import BinaryIO

from .dtd import DtdTree, Occurrence

__all__ = ["GenConfig", "generate", "generate_bytes", "parse_size"]

_PRINTABLE = "".join(chr(c) for c in range(0x20, 0x7F) if chr(c) not in "<&>")
_POOL_SIZE = 1 << 16
_SIZE_RE = re.compile(r"\s*(\d+(?:\.\d*)?)\s*([kKmMgG]?)[bB]?\s*\Z")
_UNITS = {"": 1, "k": 10**3, "m": 10**6, "g": 10**9}


def parse_size(text: str | int) -> int:
    """``"10M"`` -> 10_000_000.  Suffixes are decimal (K=10^3, M=10^6, G=10^9)."""
    if isinstance(text, int):
        return text
    m = _SIZE_RE.match(text)
    if m is None:
        raise ValueError(f"bad size {text!r}; expected an integer with optional K/M/G suffix")
    return int(float(m.group(1)) * _UNITS[m.group(2).lower()])


@dataclass(frozen=True)
class GenConfig:
    target_bytes: int
    seed: int = 0
    star_fanout: float = 8.0
    text_len: int = 32

    def __post_init__(self):
        if self.target_bytes < 1:
            raise ValueError("target_bytes must be at least 1")
        if self.star_fanout < 1 or self.text_len < 1:
            raise ValueError("star_fanout and text_len must be at least 1")


class _Writer:
    def __init__(self, dtd: DtdTree, config: GenConfig):
        self.dtd = dtd
        self.config = config
        pool_rng = random.Random(f"{config.seed}:text")
        self.pool = "".join(pool_rng.choices(_PRINTABLE, k=_POOL_SIZE))
        self.log_q = math.log(config.star_fanout / (1.0 + config.star_fanout))
        self.max_text = 2 * config.text_len - 1

    def count(self, rng: random.Random) -> int:
        # geometric on {0, 1, ...} with mean star_fanout
        u = 1.0 - rng.random()
        return int(math.log(u) / self.log_q)

    def text(self, rng: random.Random) -> str:
        n = rng.randint(1, self.max_text)
        at = rng.randrange(_POOL_SIZE - n)
        return self.pool[at:at + n]

    def element(self, name: str, rng: random.Random, parts: list[str], hole=None):
        """Append ``name``'s subtree to ``parts``.  At the driver edge
        ``hole = (parent, child)`` the child's repetitions are left out and
        the index in ``parts`` is returned instead."""
        decl = self.dtd.decls[name]
        parts.append(f"<{name}>")
        at = None
        if decl.pcdata:
            parts.append(self.text(rng))
        for child, occ in decl.children:
            if hole is not None and hole == (name, child):
                at = len(parts)
                continue
            reps = 1 if occ is Occurrence.ONE else self.count(rng)
            for _ in range(reps):
                found = self.element(child, rng, parts, hole)
                if found is not None:
                    at = found
        parts.append(f"</{name}>")
        return at


def _driver(dtd: DtdTree) -> tuple[str, str] | None:
    for name in dtd.preorder():
        for child, occ in dtd.decls[name].children:
            if occ is Occurrence.STAR:
                return name, child
    return None


def generate(dtd: DtdTree, config: GenConfig, out: BinaryIO) -> int:
    """Write a valid instance of ``dtd`` to ``out``; return the byte count."""
    w = _Writer(dtd, config)
    hole = _driver(dtd)
    parts = ['<?xml version="1.0" encoding="UTF-8"?>\n']
    at = w.element(dtd.root, random.Random(f"{config.seed}:frame"), parts, hole)
    if at is None:
        data = ("".join(parts) + "\n").encode("utf-8")
        out.write(data)
        return len(data)

    prefix = "".join(parts[:at]).encode("utf-8")
    suffix = ("".join(parts[at:]) + "\n").encode("utf-8")
    out.write(prefix)
    total = len(prefix) + len(suffix)
    rng = random.Random(f"{config.seed}:driver")
    child = hole[1]
    while total < config.target_bytes:
        sub: list[str] = []
        w.element(child, rng, sub)
        data = "".join(sub).encode("utf-8")
        out.write(data)
        total += len(data)
    out.write(suffix)
    return total


def generate_bytes(dtd: DtdTree, config: GenConfig) -> bytes:
    buf = io.BytesIO()
    generate(dtd, config, buf)
    return buf.getvalue()
