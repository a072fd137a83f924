"""Command-line frontend: ``spmxslt {check,compile,transform,gen,bench}``.

Exit status is 0 on success, 2 when the stylesheet is not streamable and 1
for any other error.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
import tempfile
import time
from pathlib import Path

from .dtd import DtdTree, parse_dtd
from .errors import NotStreamable, SpmError
from .gen import GenConfig, generate, parse_size
from .oracle import parse_document_file, transform_dom, tree_footprint
from .spm import SpmModel, convert, convert_tree
from .stream import KERNELS, Plan, default_kernel, transform_stream
from .ttree import build_ttree
from .xslt import XsltProgram, parse_xslt

EXIT_OK, EXIT_ERROR, EXIT_NOT_STREAMABLE = 0, 1, 2
BENCH_FIELDS = ["engine", "inputBytes", "wallMillis", "peakAuxBytes", "throughputMBps"]


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def _load(args) -> tuple[DtdTree, XsltProgram]:
    return parse_dtd(_read_text(args.dtd)), parse_xslt(_read_text(args.stylesheet))


def _open_in(path: str):
    return sys.stdin.buffer if path == "-" else open(path, "rb")


def _open_out(path: str):
    return sys.stdout.buffer if path == "-" else open(path, "wb")


def _compile(args) -> SpmModel:
    dtd, program = _load(args)
    tree = build_ttree(dtd, program)
    if getattr(args, "dump_ttree", False):
        sys.stderr.write(tree.dump())
    for rule in tree.dead_rules:
        print(f"warning: rule match={str(rule.pattern)!r} is never applied", file=sys.stderr)
    return convert_tree(tree, dtd)


def cmd_check(args) -> int:
    _compile(args)
    print("STREAMABLE")
    return EXIT_OK


def cmd_compile(args) -> int:
    text = _compile(args).to_json()
    if args.output == "-":
        sys.stdout.write(text)
    else:
        Path(args.output).write_text(text, encoding="utf-8")
    return EXIT_OK


def _run_oracle(dtd: DtdTree, program: XsltProgram, src) -> tuple[bytes, int]:
    doc = parse_document_file(src)
    return transform_dom(program, doc, dtd).encode("utf-8"), tree_footprint(doc)


def cmd_transform(args) -> int:
    dtd, program = _load(args)
    if args.engine == "stream":
        model = convert(dtd, program)
        with _open_in(args.input) as src, _open_out(args.output) as dst:
            stats = transform_stream(model, src, dst, kernel=args.kernel)
        sys.stderr.write(f"engine=stream\n{stats.lines()}")
    else:
        build_ttree(dtd, program)
        with _open_in(args.input) as src:
            result, footprint = _run_oracle(dtd, program, src)
            bytes_in = src.tell() if src.seekable() else -1
        with _open_out(args.output) as dst:
            dst.write(result)
        sys.stderr.write(
            f"engine=oracle\nbytesIn={bytes_in}\nbytesOut={len(result)}\npeakTreeBytes={footprint}\n"
        )
    return EXIT_OK


def cmd_gen(args) -> int:
    dtd = parse_dtd(_read_text(args.dtd))
    config = GenConfig(parse_size(args.size), args.seed, args.fanout, args.text_len)
    with _open_out(args.output) as out:
        generate(dtd, config, out)
    return EXIT_OK


def _bench_cell(engine: str, dtd: DtdTree, program: XsltProgram, plan: Plan | None, path: str,
                kernel: str | None) -> tuple[float, int]:
    if engine == "stream":
        with open(path, "rb") as src:
            t0 = time.perf_counter()
            stats = transform_stream(plan, src, lambda data: None, kernel=kernel)
            return (time.perf_counter() - t0) * 1000.0, stats.peak_aux_bytes
    with open(path, "rb") as src:
        t0 = time.perf_counter()
        _, footprint = _run_oracle(dtd, program, src)
        return (time.perf_counter() - t0) * 1000.0, footprint


def run_bench(dtd: DtdTree, program: XsltProgram, sizes: list[int], engines: list[str], repeat: int,
              seed: int, kernel: str | None = None, workdir: str | None = None) -> list[dict]:
    """Time every (engine, size) cell ``repeat`` times and keep the fastest run."""
    try:
        plan = Plan(convert(dtd, program))
        plan_error = None
    except NotStreamable as exc:
        plan, plan_error = None, exc
    rows = []
    with tempfile.TemporaryDirectory(dir=workdir) as tmp:
        for size in sizes:
            path = os.path.join(tmp, f"doc-{size}.xml")
            with open(path, "wb") as out:
                generate(dtd, GenConfig(size, seed), out)
            input_bytes = os.path.getsize(path)
            for engine in engines:
                best, peak = None, 0
                try:
                    if engine == "stream" and plan_error is not None:
                        raise plan_error
                    for _ in range(repeat):
                        ms, peak_now = _bench_cell(engine, dtd, program, plan, path, kernel)
                        peak = max(peak, peak_now)
                        best = ms if best is None else min(best, ms)
                except (SpmError, OSError, MemoryError) as exc:
                    print(f"bench: {engine} at {input_bytes} bytes failed: {exc}", file=sys.stderr)
                    best, peak = None, 0
                if best is None:
                    rows.append(dict(engine=engine, inputBytes=input_bytes, wallMillis=-1,
                                     peakAuxBytes=0, throughputMBps=0.0))
                else:
                    mbps = input_bytes / 1e6 / (best / 1000.0) if best > 0 else 0.0
                    rows.append(dict(engine=engine, inputBytes=input_bytes, wallMillis=round(best, 3),
                                     peakAuxBytes=peak, throughputMBps=round(mbps, 3)))
    return rows


def cmd_bench(args) -> int:
    dtd, program = _load(args)
    sizes = [parse_size(s) for s in args.sizes.split(",") if s.strip()]
    engines = [e.strip() for e in args.engines.split(",") if e.strip()]
    for engine in engines:
        if engine not in ("stream", "oracle"):
            raise ValueError(f"unknown engine {engine!r}")
    rows = run_bench(dtd, program, sizes, engines, args.repeat, args.seed, args.kernel)
    out = sys.stdout if args.output == "-" else open(args.output, "w", newline="", encoding="utf-8")
    try:
        writer = csv.DictWriter(out, fieldnames=BENCH_FIELDS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spmxslt", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def inputs(p, stylesheet=True):
        p.add_argument("-d", "--dtd", required=True, help="DTD file")
        if stylesheet:
            p.add_argument("-s", "--stylesheet", required=True, help="XSLT stylesheet")

    p = sub.add_parser("check", help="report whether a stylesheet is streamable")
    inputs(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("compile", help="write the streaming model as JSON")
    inputs(p)
    p.add_argument("-o", "--output", default="-")
    p.add_argument("--dump-ttree", action="store_true", help="print the transformation tree to stderr")
    p.set_defaults(func=cmd_compile)

    kernels = sorted(KERNELS)
    p = sub.add_parser("transform", help="run a transformation")
    inputs(p)
    p.add_argument("-i", "--input", default="-")
    p.add_argument("-o", "--output", default="-")
    p.add_argument("--engine", choices=["stream", "oracle"], default="stream")
    p.add_argument("--kernel", choices=kernels, default=None, help=f"stream kernel (default {default_kernel()})")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("gen", help="generate a synthetic document")
    inputs(p, stylesheet=False)
    p.add_argument("--size", required=True, help="target size, e.g. 1500, 10K, 100M (decimal units)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fanout", type=float, default=8.0, help="mean repetitions of starred children")
    p.add_argument("--text-len", type=int, default=32, help="mean text length in bytes")
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="time engines over generated documents, CSV output")
    inputs(p)
    p.add_argument("--sizes", default="1M,10M")
    p.add_argument("--engines", default="stream,oracle")
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--kernel", choices=kernels, default=None)
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NotStreamable as exc:
        print(str(exc))
        return EXIT_NOT_STREAMABLE
    except (SpmError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
