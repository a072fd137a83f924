import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from randgen import random_dtd, random_program
from spmxslt import DuplicateRule, StylesheetSyntaxError, UnsupportedConstruct, parse_xslt
from spmxslt.xslt import ROOT, Apply, Const, MatchPattern, ValueOfSelf

WRAP = '<xsl:stylesheet version="1.0" xmlns:xsl="http://www.w3.org/1999/XSL/Transform">{}</xsl:stylesheet>'


def test_books_program(books_program):
    rules = {str(r.pattern): r.template for r in books_program.rules}
    assert list(rules) == ["/", "book", "author", "title", "name"]
    assert rules["/"] == (
        Const("<html><head><title>Books Information</title></head><body><table>"),
        Apply(("publication", "book")),
        Const("</table></body></html>"),
    )
    assert rules["book"] == (
        Const("<tr><td>"), Apply(("title",)), Const("</td><td><table>"), Apply(("author",)),
        Const("</table></td></tr>"),
    )
    assert rules["author"] == (Const("<tr><td>"), Apply(("name",)), Const("</td></tr>"))
    assert rules["title"] == rules["name"] == (ValueOfSelf(),)


def test_single_constant():
    p = parse_xslt(WRAP.format('<xsl:template match="/">X</xsl:template>'))
    assert len(p.rules) == 1
    assert p.root_rule.pattern == ROOT and p.root_rule.template == (Const("X"),)


def test_transform_wrapper_and_xml_declaration():
    text = ('<?xml version="1.0"?>\n<xsl:transform version="1.0" '
            'xmlns:xsl="http://www.w3.org/1999/XSL/Transform">'
            '<xsl:template match="/">X</xsl:template></xsl:transform>')
    assert parse_xslt(text).root_rule.template == (Const("X"),)


def test_literal_markup_is_kept_verbatim():
    body = ('<xsl:template match="/"><p class=\'a\'  id="b">x &amp; y<br/><![CDATA[<z>]]>'
            '<xsl:apply-templates select="A/B"/></p></xsl:template>')
    t = parse_xslt(WRAP.format(body)).root_rule.template
    assert t == (Const("<p class='a'  id=\"b\">x &amp; y<br/><![CDATA[<z>]]>"), Apply(("A", "B")), Const("</p>"))


def test_whitespace_between_instructions_is_dropped():
    body = '<xsl:template match="/">\n  <xsl:apply-templates select="A"/>\n  <xsl:apply-templates select="A/B"/>\n</xsl:template>'
    assert parse_xslt(WRAP.format(body)).root_rule.template == (Apply(("A",)), Apply(("A", "B")))


def test_leaf_rule_with_constants():
    body = '<xsl:template match="/"/><xsl:template match="t">[<xsl:value-of select="."/>]</xsl:template>'
    rule = parse_xslt(WRAP.format(body)).rule_for(MatchPattern("t"))
    assert rule.template == (Const("["), ValueOfSelf(), Const("]")) and rule.emits_pcdata


def test_adjacent_constants_are_merged():
    body = '<xsl:template match="/">a<!-- c -->b<?pi?><i/>c</xsl:template>'
    assert parse_xslt(WRAP.format(body)).root_rule.template == (Const("ab<i/>c"),)


@pytest.mark.parametrize(
    "body, exc",
    [
        ('<xsl:template match="/"><xsl:for-each select="A"/></xsl:template>', UnsupportedConstruct),
        ('<xsl:template match="/"><xsl:value-of select="A"/></xsl:template>', UnsupportedConstruct),
        ('<xsl:template match="/"><xsl:apply-templates/></xsl:template>', UnsupportedConstruct),
        ('<xsl:template match="/"><xsl:apply-templates select="A" mode="m"/></xsl:template>', UnsupportedConstruct),
        ('<xsl:template match="/"><xsl:apply-templates select="A//B"/></xsl:template>', UnsupportedConstruct),
        ('<xsl:template match="/"><xsl:apply-templates select="A[1]"/></xsl:template>', UnsupportedConstruct),
        ('<xsl:template match="/"/><xsl:template match="A/B"/>', UnsupportedConstruct),
        ('<xsl:template match="/"/><xsl:template match="A" priority="2"/>', UnsupportedConstruct),
        ('<xsl:template match="/"/><xsl:template name="n"/>', UnsupportedConstruct),
        ('<xsl:template match="A"/>', UnsupportedConstruct),
        ('<xsl:output method="xml"/><xsl:template match="/"/>', UnsupportedConstruct),
        ('<xsl:template match="/"/><xsl:template match="t">a<xsl:value-of select="."/>'
         '<xsl:value-of select="."/></xsl:template>', UnsupportedConstruct),
        ('<xsl:template match="/"/><xsl:template match="/"/>', DuplicateRule),
        ('<xsl:template match="/"/><xsl:template match="A"/><xsl:template match="A"/>', DuplicateRule),
        ('<xsl:template match="/"><p></xsl:template>', StylesheetSyntaxError),
    ],
)
def test_rejections(body, exc):
    with pytest.raises(exc):
        parse_xslt(WRAP.format(body))


def test_bare_template_list(books_program):
    assert len(books_program.rules) == 5


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32))
def test_random_programs_have_no_adjacent_constants(seed):
    rng = random.Random(seed)
    program = parse_xslt(random_program(rng, random_dtd(rng)))
    for rule in program.rules:
        kinds = [type(item) for item in rule.template]
        assert all(not (a is Const and b is Const) for a, b in zip(kinds, kinds[1:]))


def test_parse_is_deterministic(books_program):
    from conftest import DATA

    assert parse_xslt((DATA / "books.xsl").read_text()) == books_program
