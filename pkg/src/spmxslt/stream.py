"""Single-pass evaluation of a compiled model over an XML byte stream.

The scanner itself lives in a kernel module: the compiled
``spmxslt._speedups`` when it was built, else the pure-Python
``spmxslt._pykernel``.  Set ``SPMXSLT_KERNEL=python`` (or ``cython``) to
force one.
"""

from __future__ import annotations

import io
import os
from dataclasses import dataclass
from typing import BinaryIO, Callable

from . import _pykernel
from .spm import SpmModel

try:
    from . import _speedups
except ImportError:  # extension not built
    _speedups = None

__all__ = ["Plan", "TransformStats", "KERNELS", "default_kernel", "transform_stream", "transform_stream_bytes"]

KERNELS = {"python": _pykernel}
if _speedups is not None:
    KERNELS["cython"] = _speedups


def default_kernel() -> str:
    wanted = os.environ.get("SPMXSLT_KERNEL", "").strip().lower()
    if wanted and wanted != "auto":
        if wanted not in KERNELS:
            raise RuntimeError(f"SPMXSLT_KERNEL={wanted!r} is not available (have {', '.join(sorted(KERNELS))})")
        return wanted
    return "cython" if "cython" in KERNELS else "python"


class Plan:
    """Flat, id-indexed view of a model, as the kernels consume it."""

    def __init__(self, model: SpmModel):
        dtd = model.dtd
        names = sorted(dtd.decls)
        self.ids = {name.encode("utf-8"): i for i, name in enumerate(names)}
        self.names = [name.encode("utf-8") for name in names]
        self.name_len = [len(n) for n in self.names]
        acts = [model.actions[name] for name in names]
        self.start = [a.start.encode("utf-8") for a in acts]
        self.end_pre = [a.end_pre.encode("utf-8") for a in acts]
        self.end_post = [a.end_post.encode("utf-8") for a in acts]
        self.emit = [a.emit_pcdata for a in acts]
        self.leaf = [dtd.is_leaf(name) for name in names]
        index = {name: i for i, name in enumerate(names)}
        parents = dtd.parent_of
        self.parent = [index[parents[name]] if parents.get(name) else -1 for name in names]
        self.root = index[dtd.root]


@dataclass(frozen=True)
class TransformStats:
    bytes_in: int
    bytes_out: int
    events: int
    peak_aux_bytes: int
    kernel: str = "python"

    def lines(self) -> str:
        return (
            f"bytesIn={self.bytes_in}\nbytesOut={self.bytes_out}\nevents={self.events}\n"
            f"peakAuxBytes={self.peak_aux_bytes}\nkernel={self.kernel}\n"
        )


def transform_stream(
    model: SpmModel | Plan,
    source: BinaryIO | Callable[[int], bytes],
    sink: BinaryIO | Callable[[bytes], object],
    *,
    kernel: str | None = None,
    chunk_size: int = 1 << 16,
    flush_bytes: int = 1 << 16,
) -> TransformStats:
    """Run ``model`` over ``source`` in one forward pass, writing to ``sink``.

    ``source`` is a binary file or a ``read(n)`` callable; ``sink`` is a
    binary file or a ``write(bytes)`` callable.
    """
    plan = model if isinstance(model, Plan) else Plan(model)
    kernel = kernel or default_kernel()
    if kernel not in KERNELS:
        raise ValueError(f"unknown kernel {kernel!r}")
    read = source if callable(source) else source.read
    write = sink if callable(sink) else sink.write
    stats = KERNELS[kernel].run(plan, read, write, chunk_size, flush_bytes)
    return TransformStats(*stats, kernel=kernel)


def transform_stream_bytes(model: SpmModel | Plan, document: bytes | str, **kw) -> tuple[bytes, TransformStats]:
    if isinstance(document, str):
        document = document.encode("utf-8")
    out = io.BytesIO()
    stats = transform_stream(model, io.BytesIO(document), out, **kw)
    return out.getvalue(), stats
