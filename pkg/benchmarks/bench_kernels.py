"""Compare the compiled and pure-Python streaming kernels.

    python benchmarks/bench_kernels.py --size 10M --repeat 3

Generates a document over the bundled books DTD, runs every available
kernel on it and prints one CSV row per kernel.
"""

import argparse
import csv
import io
import sys
import time
from pathlib import Path

from spmxslt import GenConfig, convert, generate_bytes, parse_dtd, parse_xslt
from spmxslt.gen import parse_size
from spmxslt.stream import KERNELS, Plan, transform_stream

DATA = Path(__file__).resolve().parent.parent / "tests" / "data"


def time_kernel(plan: Plan, doc: bytes, kernel: str, repeat: int) -> tuple[float, int]:
    best, peak = float("inf"), 0
    for _ in range(repeat):
        src = io.BytesIO(doc)
        t0 = time.perf_counter()
        stats = transform_stream(plan, src, lambda data: None, kernel=kernel)
        best = min(best, time.perf_counter() - t0)
        peak = stats.peak_aux_bytes
    return best, peak


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--size", default="10M")
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("-d", "--dtd", default=str(DATA / "books.dtd"))
    parser.add_argument("-s", "--stylesheet", default=str(DATA / "books.xsl"))
    args = parser.parse_args(argv)

    dtd = parse_dtd(Path(args.dtd).read_text())
    plan = Plan(convert(dtd, parse_xslt(Path(args.stylesheet).read_text())))
    doc = generate_bytes(dtd, GenConfig(parse_size(args.size), args.seed))

    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["kernel", "inputBytes", "wallMillis", "throughputMBps", "peakAuxBytes", "speedup"])
    results = {k: time_kernel(plan, doc, k, args.repeat) for k in sorted(KERNELS)}
    base = results["python"][0]
    for kernel, (secs, peak) in results.items():
        writer.writerow([kernel, len(doc), f"{secs * 1000:.1f}", f"{len(doc) / 1e6 / secs:.1f}", peak,
                         f"{base / secs:.2f}"])
    return 0


if __name__ == "__main__":
    sys.exit(main())
