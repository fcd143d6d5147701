"""Language dispatch for source parsing."""

from __future__ import annotations

from sirforge.errors import ParseFatal, UnsupportedLanguage
from sirforge.sir.javaparse import parse_java
from sirforge.sir.pyparse import parse_python
from sirforge.sir.tree import AstNode, Language, SourceUnit


def parse_source(unit: SourceUnit) -> AstNode:
    """Parse a source unit into a concrete tree covering its full span.

    Unparseable regions appear as ERROR nodes; the call itself only fails
    when the grammar cannot produce any tree at all.
    """
    if unit.language == Language.PYTHON:
        root = parse_python(unit.text)
    elif unit.language == Language.JAVA:
        root = parse_java(unit.text)
    else:  # pragma: no cover - Language.parse guards entry points
        raise UnsupportedLanguage(str(unit.language))
    if root is None:
        raise ParseFatal(f"no tree produced for {unit.origin or '<input>'}")
    return root
