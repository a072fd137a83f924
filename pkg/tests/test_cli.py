import csv
import io
import json
import subprocess
import sys

import pytest

from conftest import BOOKS_HTML, DATA
from spmxslt import parse_dtd, parse_xslt
from spmxslt.cli import BENCH_FIELDS, main, run_bench

BOOKS = ["-d", str(DATA / "books.dtd"), "-s", str(DATA / "books.xsl")]


def _inputs(dtd, xsl):
    return ["-d", str(DATA / dtd), "-s", str(DATA / xsl)]


def test_check_streamable(capsys):
    assert main(["check", *BOOKS]) == 0
    assert capsys.readouterr().out == "STREAMABLE\n"


@pytest.mark.parametrize("dtd,xsl,code,reason", [
    ("pair.dtd", "pair_in_order.xsl", 0, None),
    ("pair.dtd", "pair_reversed.xsl", 2, "OrderViolation"),
    ("chain.dtd", "chain.xsl", 0, None),
    ("chain_star.dtd", "chain_star.xsl", 2, "SharedStarChild"),
])
def test_exit_codes_by_class(capsys, dtd, xsl, code, reason):
    assert main(["check", *_inputs(dtd, xsl)]) == code
    out = capsys.readouterr().out
    if reason is None:
        assert out == "STREAMABLE\n"
    else:
        assert out.startswith(reason + ": rule match=")
        assert " item " in out


def test_missing_file(capsys):
    assert main(["check", "-d", str(DATA / "nope.dtd"), "-s", str(DATA / "books.xsl")]) == 1
    assert capsys.readouterr().err.startswith("error: ")


def test_bad_dtd_is_exit_1(tmp_path, capsys):
    bad = tmp_path / "bad.dtd"
    bad.write_text("<!ELEMENT A (B)> <!ELEMENT B (A)>")
    assert main(["check", "-d", str(bad), "-s", str(DATA / "books.xsl")]) == 1


def test_compile_golden(tmp_path, capsys):
    out = tmp_path / "m.json"
    assert main(["compile", *BOOKS, "-o", str(out)]) == 0
    assert out.read_text() == (DATA / "books.spm.json").read_text()
    assert main(["compile", *BOOKS]) == 0
    assert capsys.readouterr().out == (DATA / "books.spm.json").read_text()


def test_compile_keys_sorted(capsys):
    main(["compile", *BOOKS])
    actions = json.loads(capsys.readouterr().out)["actions"]
    assert list(actions) == sorted(actions)


def test_compile_constant_only(tmp_path, capsys):
    xsl = tmp_path / "c.xsl"
    xsl.write_text('<xsl:stylesheet version="1.0" xmlns:xsl="http://www.w3.org/1999/XSL/Transform">'
                   '<xsl:template match="/"></xsl:template></xsl:stylesheet>')
    assert main(["compile", "-d", str(DATA / "books.dtd"), "-s", str(xsl)]) == 0
    model = json.loads(capsys.readouterr().out)
    assert all(a == {"start": "", "endPre": "", "emitPcdata": False, "endPost": ""}
               for a in model["actions"].values())


def test_compile_not_streamable(capsys):
    assert main(["compile", *_inputs("chain_star.dtd", "chain_star.xsl")]) == 2


def test_dump_ttree_goes_to_stderr(capsys):
    assert main(["compile", *BOOKS, "--dump-ttree"]) == 0
    captured = capsys.readouterr()
    assert "publication" in captured.err
    assert json.loads(captured.out)["root"] == "publication"


@pytest.mark.parametrize("engine", ["stream", "oracle"])
def test_transform(tmp_path, capsys, engine):
    out = tmp_path / "o.html"
    assert main(["transform", *BOOKS, "-i", str(DATA / "books.xml"), "-o", str(out), "--engine", engine]) == 0
    assert out.read_text() == BOOKS_HTML
    stats = dict(line.split("=", 1) for line in capsys.readouterr().err.splitlines())
    assert stats["engine"] == engine
    assert int(stats["bytesOut"]) == len(BOOKS_HTML)
    assert int(stats["bytesIn"]) == (DATA / "books.xml").stat().st_size
    if engine == "stream":
        assert int(stats["events"]) == 12 and int(stats["peakAuxBytes"]) > 0
    else:
        assert int(stats["peakTreeBytes"]) > 0


@pytest.mark.parametrize("engine", ["stream", "oracle"])
def test_transform_malformed(tmp_path, capsys, engine):
    doc = tmp_path / "bad.xml"
    doc.write_bytes(b"<publication><book>")
    assert main(["transform", *BOOKS, "-i", str(doc), "-o", str(tmp_path / "o"), "--engine", engine]) == 1


def test_gen_then_transform_both_engines_agree(tmp_path):
    doc = tmp_path / "g.xml"
    assert main(["gen", "-d", str(DATA / "books.dtd"), "--size", "50K", "--seed", "4", "-o", str(doc)]) == 0
    assert doc.stat().st_size >= 50_000
    outs = []
    for engine in ("stream", "oracle"):
        out = tmp_path / f"{engine}.html"
        assert main(["transform", *BOOKS, "-i", str(doc), "-o", str(out), "--engine", engine]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_gen_is_deterministic(tmp_path):
    a, b = tmp_path / "a.xml", tmp_path / "b.xml"
    for p in (a, b):
        main(["gen", "-d", str(DATA / "books.dtd"), "--size", "5000", "--seed", "11", "-o", str(p)])
    assert a.read_bytes() == b.read_bytes()


def test_gen_bad_size(capsys):
    assert main(["gen", "-d", str(DATA / "books.dtd"), "--size", "lots", "-o", "-"]) == 1


def test_bench_csv_shape(tmp_path):
    out = tmp_path / "b.csv"
    assert main(["bench", *BOOKS, "--sizes", "20K,60K", "--repeat", "2", "-o", str(out)]) == 0
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert out.read_text().splitlines()[0] == ",".join(BENCH_FIELDS)
    assert [r["engine"] for r in rows] == ["stream", "oracle", "stream", "oracle"]
    for r in rows:
        assert float(r["wallMillis"]) > 0 and int(r["peakAuxBytes"]) > 0
        ms, n = float(r["wallMillis"]), int(r["inputBytes"])
        assert float(r["throughputMBps"]) == pytest.approx(n / 1e6 / (ms / 1000), rel=0.01)
    assert int(rows[0]["inputBytes"]) >= 20_000 and int(rows[2]["inputBytes"]) >= 60_000


def test_bench_records_failed_cells():
    dtd = parse_dtd((DATA / "chain_star.dtd").read_text())
    program = parse_xslt((DATA / "chain_star.xsl").read_text())
    rows = run_bench(dtd, program, [2_000], ["stream", "oracle"], repeat=1, seed=1)
    assert rows[0]["engine"] == "stream" and rows[0]["wallMillis"] == -1
    assert rows[1]["engine"] == "oracle" and rows[1]["wallMillis"] > 0


def test_bench_unknown_engine(capsys):
    assert main(["bench", *BOOKS, "--sizes", "1K", "--engines", "saxon"]) == 1


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "spmxslt", "check", *BOOKS], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout == "STREAMABLE\n"
