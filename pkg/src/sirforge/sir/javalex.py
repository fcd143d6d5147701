"""Java lexer.

Emits '>' as a single token always; the parser re-merges adjacent '>'
runs into shift/assignment operators by char adjacency, which keeps
nested generics (List<List<Integer>>) unambiguous.
"""

from __future__ import annotations

from dataclasses import dataclass

NAME = "NAME"
NUMBER = "NUMBER"
STRING = "STRING"
CHAR = "CHAR"
OP = "OP"
EOF = "EOF"
ERRORTOKEN = "ERRORTOKEN"

KEYWORDS = frozenset(
    """abstract assert boolean break byte case catch char class const continue
    default do double else enum extends final finally float for goto if
    implements import instanceof int interface long native new package private
    protected public return short static strictfp super switch synchronized
    this throw throws transient try void volatile while true false null var
    record yield""".split()
)

_OPS3 = ("<<=", "...")
_OPS2 = (
    "==", "!=", "<=", ">=", "&&", "||", "++", "--", "+=", "-=", "*=", "/=",
    "%=", "&=", "|=", "^=", "<<", "->", "::",
)
_OPS1 = "+-*/%&|^~!<>=()[]{},;.:?@"


@dataclass
class Token:
    type: str
    text: str
    start: int
    end: int

    def __repr__(self) -> str:
        return f"{self.type}:{self.text!r}@{self.start}"


def _is_id_start(ch: str) -> bool:
    return ch == "_" or ch == "$" or ch.isalpha()


def _is_id_cont(ch: str) -> bool:
    return ch == "_" or ch == "$" or ch.isalnum()


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch in " \t\r\n\f":
            i += 1
            continue
        if ch == "/" and i + 1 < n and text[i + 1] == "/":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch == "/" and i + 1 < n and text[i + 1] == "*":
            j = text.find("*/", i + 2)
            i = n if j < 0 else j + 2
            continue
        if _is_id_start(ch):
            start = i
            while i < n and _is_id_cont(text[i]):
                i += 1
            tokens.append(Token(NAME, text[start:i], start, i))
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and text[i + 1].isdigit()):
            start = i
            if ch == "0" and i + 1 < n and text[i + 1] in "xXbB":
                i += 2
                while i < n and (text[i].isalnum() or text[i] == "_"):
                    i += 1
            else:
                seen_dot = False
                while i < n:
                    c = text[i]
                    if c.isdigit() or c == "_":
                        i += 1
                    elif c == "." and not seen_dot and (i + 1 >= n or text[i + 1] != "."):
                        seen_dot = True
                        i += 1
                    elif c in "eE" and i + 1 < n and (text[i + 1].isdigit() or text[i + 1] in "+-"):
                        i += 2 if text[i + 1] in "+-" else 1
                    elif c in "fFdDlL":
                        i += 1
                        break
                    else:
                        break
            tokens.append(Token(NUMBER, text[start:i], start, i))
            continue
        if ch == '"':
            start = i
            i += 1
            while i < n:
                if text[i] == "\\" and i + 1 < n:
                    i += 2
                    continue
                if text[i] == '"':
                    i += 1
                    tokens.append(Token(STRING, text[start:i], start, i))
                    break
                if text[i] == "\n":
                    tokens.append(Token(ERRORTOKEN, text[start:i], start, i))
                    break
                i += 1
            else:
                tokens.append(Token(ERRORTOKEN, text[start:i], start, i))
            continue
        if ch == "'":
            start = i
            i += 1
            while i < n:
                if text[i] == "\\" and i + 1 < n:
                    i += 2
                    continue
                if text[i] == "'":
                    i += 1
                    tokens.append(Token(CHAR, text[start:i], start, i))
                    break
                if text[i] == "\n":
                    tokens.append(Token(ERRORTOKEN, text[start:i], start, i))
                    break
                i += 1
            else:
                tokens.append(Token(ERRORTOKEN, text[start:i], start, i))
            continue
        matched = False
        for cand in _OPS3:
            if text.startswith(cand, i):
                tokens.append(Token(OP, cand, i, i + 3))
                i += 3
                matched = True
                break
        if matched:
            continue
        two = text[i : i + 2]
        if two in _OPS2:
            tokens.append(Token(OP, two, i, i + 2))
            i += 2
            continue
        if ch in _OPS1:
            tokens.append(Token(OP, ch, i, i + 1))
            i += 1
            continue
        tokens.append(Token(ERRORTOKEN, ch, i, i + 1))
        i += 1
    tokens.append(Token(EOF, "", n, n))
    return tokens
