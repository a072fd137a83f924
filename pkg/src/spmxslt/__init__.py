"""Streaming evaluation of a core XSLT subset over simple DTDs.

Typical use::

    dtd = parse_dtd(open("books.dtd").read())
    program = parse_xslt(open("books.xsl").read())
    model = convert(dtd, program)          # raises NotStreamable
    with open("in.xml", "rb") as src, open("out.html", "wb") as dst:
        stats = transform_stream(model, src, dst)
"""

from .dtd import DtdTree, ElementDecl, Occurrence, parse_dtd
from .errors import (
    DtdSyntaxError,
    DuplicateRule,
    InputSyntaxError,
    LeafMismatch,
    MalformedXml,
    MissingRule,
    NoSuchElement,
    NotSimpleDtd,
    NotStreamable,
    PathMismatch,
    SchemaViolation,
    SpmError,
    StylesheetSyntaxError,
    TransformationTreeError,
    UnsupportedConstruct,
)
from .gen import GenConfig, generate, generate_bytes
from .oracle import DocNode, parse_document, transform_dom, tree_footprint
from .spm import EventActions, SpmModel, convert
from .stream import TransformStats, transform_stream, transform_stream_bytes
from .ttree import TransformationTree, build_ttree
from .xslt import XsltProgram, parse_xslt

__version__ = "0.1.0"

__all__ = [
    "DtdTree", "ElementDecl", "Occurrence", "parse_dtd",
    "XsltProgram", "parse_xslt",
    "TransformationTree", "build_ttree",
    "EventActions", "SpmModel", "convert",
    "TransformStats", "transform_stream", "transform_stream_bytes",
    "DocNode", "parse_document", "transform_dom", "tree_footprint",
    "GenConfig", "generate", "generate_bytes",
    "SpmError", "InputSyntaxError", "DtdSyntaxError", "StylesheetSyntaxError", "NotSimpleDtd",
    "UnsupportedConstruct", "DuplicateRule", "TransformationTreeError", "NoSuchElement",
    "MissingRule", "LeafMismatch", "NotStreamable", "MalformedXml", "SchemaViolation", "PathMismatch",
]
