"""Indentation-aware Python lexer.

Produces a flat token stream with char offsets (converted to byte offsets
by the parser layer). Unknown characters and unterminated strings become
ERRORTOKEN rather than raising, so downstream error recovery always has a
stream to work with.
"""

from __future__ import annotations

from dataclasses import dataclass

NAME = "NAME"
NUMBER = "NUMBER"
STRING = "STRING"
OP = "OP"
NEWLINE = "NEWLINE"
INDENT = "INDENT"
DEDENT = "DEDENT"
ENDMARKER = "ENDMARKER"
ERRORTOKEN = "ERRORTOKEN"

KEYWORDS = frozenset(
    """False None True and as assert async await break class continue def del
    elif else except finally for from global if import in is lambda nonlocal
    not or pass raise return try while with yield""".split()
)

# longest-match operator table, 3 -> 2 -> 1 chars
_OPS3 = ("**=", "//=", ">>=", "<<=", "...")
_OPS2 = (
    "**", "//", ">>", "<<", "<=", ">=", "==", "!=", "->", ":=",
    "+=", "-=", "*=", "/=", "%=", "@=", "&=", "|=", "^=",
)
_OPS1 = "+-*/%@&|^~<>=()[]{},:.;"


def _case_variants(prefix: str) -> set[str]:
    if len(prefix) == 1:
        return {prefix.lower(), prefix.upper()}
    a, b = prefix
    return {x + y for x in (a.lower(), a.upper()) for y in (b.lower(), b.upper())}


_STRING_PREFIXES = frozenset(
    v for base in ("r", "b", "u", "f", "rb", "br", "fr", "rf") for v in _case_variants(base)
)


@dataclass
class Token:
    type: str
    text: str
    start: int  # char offset
    end: int

    def __repr__(self) -> str:  # compact for test dumps
        return f"{self.type}:{self.text!r}@{self.start}"


def _is_id_start(ch: str) -> bool:
    return ch == "_" or ch.isalpha()


def _is_id_cont(ch: str) -> bool:
    return ch == "_" or ch.isalnum()


class PyLexer:
    def __init__(self, text: str):
        self.text = text
        self.n = len(text)
        self.i = 0
        self.tokens: list[Token] = []
        self.indents = [0]
        self.paren_depth = 0
        self.at_line_start = True
        self.line_had_tokens = False

    def run(self) -> list[Token]:
        while self.i < self.n:
            if self.at_line_start:
                if self.paren_depth == 0:
                    self._handle_indent()
                    if self.i >= self.n:
                        break
                self.at_line_start = False
            ch = self.text[self.i]
            if ch == "\n":
                self._newline()
            elif ch in " \t\f":
                self.i += 1
            elif ch == "\\" and self.i + 1 < self.n and self.text[self.i + 1] == "\n":
                self.i += 2  # explicit line join
            elif ch == "#":
                while self.i < self.n and self.text[self.i] != "\n":
                    self.i += 1
            elif _is_id_start(ch):
                self._name_or_string()
            elif ch.isdigit() or (ch == "." and self.i + 1 < self.n and self.text[self.i + 1].isdigit()):
                self._number()
            elif ch in "'\"":
                self._string(self.i)
            else:
                self._operator()
        # trailing NEWLINE + dedents
        if self.line_had_tokens:
            self._emit(NEWLINE, "", self.n, self.n)
        while len(self.indents) > 1:
            self.indents.pop()
            self._emit(DEDENT, "", self.n, self.n)
        self._emit(ENDMARKER, "", self.n, self.n)
        return self.tokens

    # ------------------------------------------------------------------

    def _emit(self, type_: str, text: str, start: int, end: int) -> None:
        self.tokens.append(Token(type_, text, start, end))
        if type_ not in (NEWLINE, INDENT, DEDENT, ENDMARKER):
            self.line_had_tokens = True

    def _newline(self) -> None:
        if self.paren_depth == 0 and self.line_had_tokens:
            self._emit(NEWLINE, "\n", self.i, self.i + 1)
            self.line_had_tokens = False
            self.at_line_start = True
        self.i += 1
        if self.paren_depth == 0:
            self.at_line_start = True

    def _handle_indent(self) -> None:
        # measure indentation of the next non-blank, non-comment line
        while True:
            j = self.i
            col = 0
            while j < self.n and self.text[j] in " \t":
                col = col + 1 if self.text[j] == " " else (col // 8 + 1) * 8
                j += 1
            if j >= self.n:
                self.i = j
                return
            if self.text[j] == "\n":
                self.i = j + 1
                continue
            if self.text[j] == "#":
                while j < self.n and self.text[j] != "\n":
                    j += 1
                self.i = j
                continue
            break
        self.i = j
        self.at_line_start = False
        if col > self.indents[-1]:
            self.indents.append(col)
            self._emit(INDENT, "", j, j)
            self.line_had_tokens = False
        else:
            while col < self.indents[-1]:
                self.indents.pop()
                self._emit(DEDENT, "", j, j)
            if col != self.indents[-1]:
                # dedent to a level never seen: flag and realign
                self._emit(ERRORTOKEN, "", j, j)
                self.indents.append(col)
            self.line_had_tokens = False

    def _name_or_string(self) -> None:
        start = self.i
        while self.i < self.n and _is_id_cont(self.text[self.i]):
            self.i += 1
        word = self.text[start : self.i]
        if (
            word in _STRING_PREFIXES
            and self.i < self.n
            and self.text[self.i] in "'\""
        ):
            self._string(start)
            return
        self._emit(NAME, word, start, self.i)

    def _number(self) -> None:
        start = self.i
        text = self.text
        if text[self.i] == "0" and self.i + 1 < self.n and text[self.i + 1] in "xXoObB":
            self.i += 2
            while self.i < self.n and (text[self.i].isalnum() or text[self.i] == "_"):
                self.i += 1
            self._emit(NUMBER, text[start : self.i], start, self.i)
            return
        seen_dot = False
        seen_exp = False
        while self.i < self.n:
            ch = text[self.i]
            if ch.isdigit() or ch == "_":
                self.i += 1
            elif ch == "." and not seen_dot and not seen_exp:
                seen_dot = True
                self.i += 1
            elif ch in "eE" and not seen_exp and self.i + 1 < self.n and (
                text[self.i + 1].isdigit() or text[self.i + 1] in "+-"
            ):
                seen_exp = True
                self.i += 2 if text[self.i + 1] in "+-" else 1
            elif ch in "jJ":
                self.i += 1
                break
            else:
                break
        self._emit(NUMBER, text[start : self.i], start, self.i)

    def _string(self, start: int) -> None:
        # self.i points at the first quote char; start includes any prefix
        quote = self.text[self.i]
        if self.text[self.i : self.i + 3] in (quote * 3,):
            closer = quote * 3
            self.i += 3
        else:
            closer = quote
            self.i += 1
        while self.i < self.n:
            ch = self.text[self.i]
            if ch == "\\" and self.i + 1 < self.n:
                self.i += 2
                continue
            if self.text.startswith(closer, self.i):
                self.i += len(closer)
                self._emit(STRING, self.text[start : self.i], start, self.i)
                return
            if ch == "\n" and len(closer) == 1:
                break
            self.i += 1
        # unterminated
        self._emit(ERRORTOKEN, self.text[start : self.i], start, self.i)

    def _operator(self) -> None:
        start = self.i
        rest = self.text[self.i : self.i + 3]
        for cand in _OPS3:
            if rest.startswith(cand):
                self._op_token(cand, start)
                return
        rest2 = rest[:2]
        for cand in _OPS2:
            if rest2 == cand:
                self._op_token(cand, start)
                return
        ch = self.text[self.i]
        if ch in _OPS1:
            self._op_token(ch, start)
            return
        self.i += 1
        self._emit(ERRORTOKEN, ch, start, self.i)

    def _op_token(self, op: str, start: int) -> None:
        if op in "([{":
            self.paren_depth += 1
        elif op in ")]}":
            self.paren_depth = max(0, self.paren_depth - 1)
        self.i = start + len(op)
        self._emit(OP, op, start, self.i)


def tokenize(text: str) -> list[Token]:
    return PyLexer(text).run()
