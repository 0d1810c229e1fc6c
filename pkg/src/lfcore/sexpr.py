"""Reader for the parenthesized surface syntax.

Produces ``Atom`` and ``SList`` data with spans. Round brackets and square
brackets are distinct list shapes; square lists carry type arguments and
type parameters.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ParseError, Span

_DELIMS = set("()[];\"")
_ESCAPES = {'"': '"', "\\": "\\", "n": "\n"}


@dataclass
class Atom:
    text: str
    span: Span
    is_string: bool = False

    def __repr__(self) -> str:
        return repr(self.text) if self.is_string else self.text


@dataclass
class SList:
    items: list
    span: Span
    square: bool = False

    def __repr__(self) -> str:
        o, c = ("[", "]") if self.square else ("(", ")")
        return o + " ".join(map(repr, self.items)) + c


Datum = Atom | SList


class _Reader:
    def __init__(self, text: str, filename: str):
        self.text = text
        self.file = filename
        self.pos = 0
        self.line = 1
        self.col = 1

    def error(self, msg: str, line: int | None = None, col: int | None = None) -> ParseError:
        if line is None:
            line, col = self._clamped()
        return ParseError(msg, Span(self.file, line, col, line, col))

    def _clamped(self) -> tuple[int, int]:
        # error positions must stay inside the input; at EOF point at the last char
        if self.pos < len(self.text) or not self.text:
            return self.line, self.col
        lines = self.text.split("\n")
        while len(lines) > 1 and lines[-1] == "":
            lines.pop()
        return len(lines), max(1, len(lines[-1]))

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def advance(self) -> str:
        c = self.text[self.pos]
        self.pos += 1
        if c == "\n":
            self.line += 1
            self.col = 1
        else:
            self.col += 1
        return c

    def skip_blank(self) -> None:
        while self.pos < len(self.text):
            c = self.peek()
            if c == ";":
                while self.pos < len(self.text) and self.peek() != "\n":
                    self.advance()
            elif c.isspace():
                self.advance()
            else:
                break

    def read_all(self) -> list[Datum]:
        out = []
        while True:
            self.skip_blank()
            if self.pos >= len(self.text):
                return out
            out.append(self.read())

    def read(self) -> Datum:
        self.skip_blank()
        if self.pos >= len(self.text):
            raise self.error("unexpected end of input")
        line, col = self.line, self.col
        c = self.peek()
        if c in "([":
            close = ")" if c == "(" else "]"
            self.advance()
            items = []
            while True:
                self.skip_blank()
                if self.pos >= len(self.text):
                    raise self.error(f"unclosed {c!r} opened at {line}:{col}")
                if self.peek() in ")]":
                    if self.peek() != close:
                        raise self.error(f"mismatched {self.peek()!r}, expected {close!r}")
                    end_line, end_col = self.line, self.col
                    self.advance()
                    return SList(items, Span(self.file, line, col, end_line, end_col), square=c == "[")
                items.append(self.read())
        if c in ")]":
            raise self.error(f"unexpected {c!r}")
        if c == '"':
            return self.read_string()
        chars = []
        while self.pos < len(self.text) and not self.peek().isspace() and self.peek() not in _DELIMS:
            end_line, end_col = self.line, self.col
            chars.append(self.advance())
        return Atom("".join(chars), Span(self.file, line, col, end_line, end_col))

    def read_string(self) -> Atom:
        line, col = self.line, self.col
        self.advance()
        chars = []
        while True:
            if self.pos >= len(self.text):
                raise self.error("unterminated string literal")
            c = self.advance()
            if c == '"':
                return Atom("".join(chars), Span(self.file, line, col, self.line, self.col - 1), is_string=True)
            if c == "\\":
                if self.pos >= len(self.text):
                    raise self.error("unterminated string literal")
                esc_line, esc_col = self.line, self.col
                e = self.advance()
                if e not in _ESCAPES:
                    raise self.error(f"unknown escape \\{e}", esc_line, esc_col)
                chars.append(_ESCAPES[e])
            else:
                chars.append(c)


def read(text: str, filename: str = "<input>") -> list[Datum]:
    return _Reader(text, filename).read_all()


def quote_string(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'
