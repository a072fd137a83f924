"""Exception hierarchy shared by every stage of the pipeline."""


class SpmError(Exception):
    """Base class for all errors raised by spmxslt."""


class InputSyntaxError(SpmError):
    """Malformed DTD or stylesheet text."""


class DtdSyntaxError(InputSyntaxError):
    pass


class StylesheetSyntaxError(InputSyntaxError):
    pass


class NotSimpleDtd(SpmError):
    """The DTD parsed, but falls outside the supported tree-shaped subset."""


class UnsupportedConstruct(SpmError):
    """The stylesheet uses something outside the supported XSLT core."""


class DuplicateRule(SpmError):
    pass


class TransformationTreeError(SpmError):
    pass


class NoSuchElement(TransformationTreeError):
    pass


class MissingRule(TransformationTreeError):
    pass


class LeafMismatch(TransformationTreeError):
    pass


class NotStreamable(SpmError):
    """The program needs buffering for some instance of the DTD.

    ``reason`` is one of ``StarConstStar``, ``OrderViolation`` or
    ``SharedStarChild``; ``pattern`` and ``index`` locate the offending
    template item.
    """

    STAR_CONST_STAR = "StarConstStar"
    ORDER_VIOLATION = "OrderViolation"
    SHARED_STAR_CHILD = "SharedStarChild"

    def __init__(self, reason: str, pattern: str, index: int, detail: str = ""):
        self.reason = reason
        self.pattern = pattern
        self.index = index
        self.detail = detail
        msg = f"{reason}: rule match={pattern!r} item {index}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class MalformedXml(SpmError):
    pass


class SchemaViolation(SpmError):
    pass


class PathMismatch(SpmError):
    pass
