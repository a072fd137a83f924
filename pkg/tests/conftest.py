import random
from pathlib import Path

import pytest

from spmxslt import parse_dtd, parse_xslt

DATA = Path(__file__).parent / "data"

# criterion number -> (passed, detail); filled in by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"criterion {num}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def rng():
    return random.Random(20240611)


@pytest.fixture(scope="session")
def books_dtd():
    return parse_dtd((DATA / "books.dtd").read_text())


@pytest.fixture(scope="session")
def books_program():
    return parse_xslt((DATA / "books.xsl").read_text())


@pytest.fixture(scope="session")
def books_xml():
    return (DATA / "books.xml").read_bytes()


BOOKS_HTML = (
    "<html><head><title>Books Information</title></head><body><table><tr><td>"
    "A Complete Guide to DB2 Universal Database</td><td><table><tr><td>Don Chamberlin"
    "</td></tr></table></td></tr></table></body></html>"
)
