"""Tree types shared by the parsers and the rule engine.

Spans are byte ranges [start, end) into the UTF-8 encoding of the source
text; leaf text always equals the decoded slice of its span. Internal node
spans cover their children, which are ordered and non-overlapping.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Union

from sirforge.errors import SirforgeError


class Language(str, Enum):
    PYTHON = "python"
    JAVA = "java"

    @classmethod
    def parse(cls, name: str) -> "Language":
        try:
            return cls(name.strip().lower())
        except ValueError:
            from sirforge.errors import UnsupportedLanguage

            raise UnsupportedLanguage(f"unsupported language: {name!r}") from None


@dataclass(frozen=True)
class SourceUnit:
    """One function's source text plus provenance."""

    language: Language
    text: str
    origin: str = ""

    def __post_init__(self) -> None:
        if not isinstance(self.language, Language):
            object.__setattr__(self, "language", Language.parse(str(self.language)))
        if not self.text.strip():
            raise SirforgeError("SourceUnit text is empty after whitespace trim")

    @property
    def data(self) -> bytes:
        return self.text.encode("utf-8")


@dataclass
class AstNode:
    """Concrete syntax node; anonymous leaves use their token text as kind."""

    kind: str
    span: tuple[int, int]
    children: list["AstNode"] = field(default_factory=list)
    leaf_text: str | None = None

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def walk(self) -> Iterator["AstNode"]:
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def kinds(self) -> list[str]:
        return [n.kind for n in self.walk()]

    def has_error(self) -> bool:
        return any(n.kind == "ERROR" for n in self.walk())

    def error_count(self) -> int:
        return sum(1 for n in self.walk() if n.kind == "ERROR")

    def text(self, source: SourceUnit | bytes) -> str:
        data = source.data if isinstance(source, SourceUnit) else source
        return data[self.span[0] : self.span[1]].decode("utf-8", errors="replace")


@dataclass
class SirNode:
    """AstNode after rule application: same shape minus pruned nodes."""

    kind: str
    children: list["SirNode"] = field(default_factory=list)
    leaf_text: str | None = None

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def walk(self) -> Iterator["SirNode"]:
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def kinds(self) -> list[str]:
        return [n.kind for n in self.walk()]


TreeNode = Union[AstNode, SirNode]

LEFT_FMT = "<{kind},left>"
RIGHT_FMT = "<{kind},right>"


def linearize(node: TreeNode) -> str:
    """Render a tree as a depth-first token sequence.

    Internal node of kind K becomes "<K,left> ...children... <K,right>";
    leaves render as their text (leaf kind when the parser kept no text).
    Total over well-formed trees.
    """
    parts: list[str] = []
    _linearize_into(node, parts)
    return " ".join(parts)


def _linearize_into(node: TreeNode, parts: list[str]) -> None:
    if node.is_leaf and node.leaf_text is not None:
        parts.append(node.leaf_text)
        return
    if node.is_leaf:
        # internal node whose children were all pruned
        parts.append(LEFT_FMT.format(kind=node.kind))
        parts.append(RIGHT_FMT.format(kind=node.kind))
        return
    parts.append(LEFT_FMT.format(kind=node.kind))
    for child in node.children:
        _linearize_into(child, parts)
    parts.append(RIGHT_FMT.format(kind=node.kind))


@dataclass
class SirTree:
    """Rule-normalized tree plus the mapping back to source bytes.

    source_span_index maps preorder node ids (root = 0) to byte ranges in
    the original text; linearized caches the rendered form.
    """

    root: SirNode
    source_span_index: dict[int, tuple[int, int]]
    linearized: str = ""

    def __post_init__(self) -> None:
        if not self.linearized:
            self.linearized = linearize(self.root)

    def iter_nodes(self) -> Iterator[tuple[int, SirNode]]:
        """Preorder traversal yielding (node_id, node)."""
        counter = 0
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield counter, node
            counter += 1
            stack.extend(reversed(node.children))

    def node_span(self, node_id: int) -> tuple[int, int]:
        return self.source_span_index[node_id]
