"""Shared exception types.

Everything raised on bad input or bad configuration derives from
ToolkitError so the command line can map failures to exit code 1.
"""

from __future__ import annotations


class ToolkitError(Exception):
    """Base class for all validation and configuration failures."""


class ConfigError(ToolkitError):
    """Invalid configuration value or combination."""


class DecodingError(ToolkitError):
    """Byte stream does not decode under the declared encoding."""

    def __init__(self, encoding: str, offset: int, detail: str = ""):
        self.encoding = encoding
        self.offset = offset
        msg = f"cannot decode byte at offset {offset} as {encoding}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class EmitError(ToolkitError):
    """Writing a document to the corpus sink failed."""

    def __init__(self, doc_id: str, detail: str):
        self.doc_id = doc_id
        super().__init__(f"document {doc_id!r}: {detail}")


class UnsegmentableError(ToolkitError):
    """No piece sequence covers the word under the current model."""


class ParseError(ToolkitError):
    """Malformed record in an input file; carries a location."""

    def __init__(self, location: str, detail: str):
        self.location = location
        super().__init__(f"{location}: {detail}")


class AlignmentError(ToolkitError):
    """Gold and predicted structures do not line up."""
