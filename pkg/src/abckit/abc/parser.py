"""Strict parser for the ABC subset used by folk-tune corpora.

Anything outside the subset raises :class:`ParseError` with one of a closed
set of kinds, so "does this text parse" is a stable yes/no question.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, List, Optional, Tuple

from .tokens import (
    Accidental,
    BarKind,
    Barline,
    BodyToken,
    BrokenRhythm,
    ChordSymbol,
    Comment,
    Decoration,
    GraceGroup,
    InlineField,
    LineBreak,
    MultiNote,
    Note,
    Rest,
    SlurClose,
    SlurOpen,
    Tie,
    TuneDocument,
    Tuplet,
    Volta,
    render_tokens,
)

MISSING_X_HEADER = "missing_X_header"
UNBALANCED_BRACKET = "unbalanced_bracket"
UNBALANCED_QUOTE = "unbalanced_quote"
BAD_DURATION = "bad_duration"
UNKNOWN_SYMBOL = "unknown_symbol"
EMPTY_BODY = "empty_body"

ERROR_KINDS = (
    MISSING_X_HEADER,
    UNBALANCED_BRACKET,
    UNBALANCED_QUOTE,
    BAD_DURATION,
    UNKNOWN_SYMBOL,
    EMPTY_BODY,
)


class ParseError(ValueError):
    """Raised when text is not a well-formed tune in the supported subset."""

    def __init__(self, kind: str, line: int, column: int, message: str = ""):
        assert kind in ERROR_KINDS, kind
        self.kind = kind
        self.line = line
        self.column = column
        self.message = message
        super().__init__(f"{line}:{column}: {kind}" + (f" ({message})" if message else ""))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "line": self.line, "column": self.column, "message": self.message}


FIELD_LINE = re.compile(r"^([A-Za-z]):(?![|:])(.*)$")
REJECTED_FIELDS = {"V": "multi-voice", "w": "lyrics", "W": "lyrics"}
SINGLE_DECORATIONS = set("~.HLMOPSTuv")
ACCIDENTAL_PREFIX = {
    "^^": Accidental.DOUBLE_SHARP,
    "__": Accidental.DOUBLE_FLAT,
    "^": Accidental.SHARP,
    "_": Accidental.FLAT,
    "=": Accidental.NATURAL,
}
BARLINES = {
    "|": BarKind.SINGLE,
    "||": BarKind.DOUBLE,
    "|]": BarKind.FINAL,
    "|:": BarKind.REPEAT_START,
    "||:": BarKind.REPEAT_START,
    ":|": BarKind.REPEAT_END,
    ":||": BarKind.REPEAT_END,
    ":|]": BarKind.REPEAT_END,
    "::": BarKind.REPEAT_BOTH,
    ":|:": BarKind.REPEAT_BOTH,
    ":||:": BarKind.REPEAT_BOTH,
}
BARLINE_RE = re.compile(r":*\|*[\]:]*")
UNIT_LENGTH_RE = re.compile(r"^\s*(\d+)\s*/\s*(\d+)\s*$")
METER_RE = re.compile(r"^\s*(C\|?|none|\d+\s*/\s*\d+)\s*$")


class _Lexer:
    """Cursor over the body text that tracks line/column for error reports."""

    def __init__(self, text: str, first_line: int):
        self.text = text
        self.pos = 0
        self.first_line = first_line
        self._line_starts = [0] + [m.end() for m in re.finditer("\n", text)]

    def where(self, pos: Optional[int] = None) -> Tuple[int, int]:
        pos = self.pos if pos is None else pos
        lo, hi = 0, len(self._line_starts) - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if self._line_starts[mid] <= pos:
                lo = mid
            else:
                hi = mid - 1
        return self.first_line + lo, pos - self._line_starts[lo] + 1

    def error(self, kind: str, message: str = "", pos: Optional[int] = None) -> ParseError:
        line, col = self.where(pos)
        return ParseError(kind, line, col, message)

    def peek(self, offset: int = 0) -> str:
        i = self.pos + offset
        return self.text[i] if i < len(self.text) else ""

    def at_end(self) -> bool:
        return self.pos >= len(self.text)

    def digits(self) -> str:
        start = self.pos
        while self.peek().isdigit() and self.peek().isascii():
            self.pos += 1
        return self.text[start:self.pos]


def _read_duration(lx: _Lexer) -> Fraction:
    start = lx.pos
    num_text = lx.digits()
    num = int(num_text) if num_text else 1
    den = 1
    if lx.peek() == "/":
        lx.pos += 1
        den_text = lx.digits()
        if den_text:
            den = int(den_text)
            if lx.peek() == "/":
                raise lx.error(BAD_DURATION, "slash after explicit denominator")
        else:
            den = 2
            while lx.peek() == "/":
                lx.pos += 1
                den *= 2
            if lx.peek().isdigit():
                raise lx.error(BAD_DURATION, "digit after repeated slashes")
    if num == 0 or den == 0:
        raise lx.error(BAD_DURATION, "zero length", pos=start)
    return Fraction(num, den)


def _read_note(lx: _Lexer) -> Note:
    acc = Accidental.NONE
    for prefix in ("^^", "__", "^", "_", "="):
        if lx.text.startswith(prefix, lx.pos):
            acc = ACCIDENTAL_PREFIX[prefix]
            lx.pos += len(prefix)
            break
    pitch = lx.peek()
    if not pitch or pitch not in "ABCDEFGabcdefg":
        raise lx.error(UNKNOWN_SYMBOL, "accidental without note")
    lx.pos += 1
    shift = 0
    while lx.peek() in ("'", ","):
        shift += 1 if lx.peek() == "'" else -1
        lx.pos += 1
    return Note(pitch, acc, shift, _read_duration(lx))


def _is_note_start(ch: str) -> bool:
    return ch != "" and ch in "ABCDEFGabcdefg^_="


def _read_bracket(lx: _Lexer) -> BodyToken:
    open_pos = lx.pos
    lx.pos += 1
    nxt = lx.peek()
    if nxt.isdigit() and nxt.isascii():
        number = int(lx.digits())
        if number == 0:
            raise lx.error(UNKNOWN_SYMBOL, "volta number 0", pos=open_pos)
        return Volta(number)
    if nxt.isalpha() and lx.peek(1) == ":":
        end = lx.text.find("]", lx.pos)
        newline = lx.text.find("\n", lx.pos)
        if end < 0 or (0 <= newline < end):
            raise lx.error(UNBALANCED_BRACKET, "inline field not closed", pos=open_pos)
        field_name = nxt
        value = lx.text[lx.pos + 2:end]
        if field_name in REJECTED_FIELDS:
            raise lx.error(UNKNOWN_SYMBOL, REJECTED_FIELDS[field_name], pos=open_pos)
        _check_field_value(lx, field_name, value, open_pos)
        lx.pos = end + 1
        return InlineField(field_name, value)
    notes: List[Note] = []
    while True:
        ch = lx.peek()
        if ch == "]":
            lx.pos += 1
            break
        if ch in ("", "\n", "|"):
            raise lx.error(UNBALANCED_BRACKET, "chord not closed", pos=open_pos)
        if _is_note_start(ch):
            notes.append(_read_note(lx))
        elif ch in " \t":
            lx.pos += 1
        else:
            raise lx.error(UNKNOWN_SYMBOL, f"{ch!r} inside chord")
    if not notes:
        raise lx.error(UNKNOWN_SYMBOL, "empty chord", pos=open_pos)
    return MultiNote(tuple(notes), _read_duration(lx))


def _read_grace(lx: _Lexer) -> GraceGroup:
    open_pos = lx.pos
    lx.pos += 1
    accia = False
    if lx.peek() == "/":
        accia = True
        lx.pos += 1
    inner: List[BodyToken] = []
    while True:
        ch = lx.peek()
        if ch == "}":
            lx.pos += 1
            break
        if ch == "" or ch == "\n":
            raise lx.error(UNBALANCED_BRACKET, "grace group not closed", pos=open_pos)
        if _is_note_start(ch):
            inner.append(_read_note(lx))
        elif ch in " \t":
            lx.pos += 1
        elif ch == "{":
            raise lx.error(UNBALANCED_BRACKET, "nested grace group")
        else:
            raise lx.error(UNKNOWN_SYMBOL, f"{ch!r} inside grace group")
    if not inner:
        raise lx.error(UNKNOWN_SYMBOL, "empty grace group", pos=open_pos)
    return GraceGroup(tuple(inner), accia)


def _check_field_value(lx: _Lexer, name: str, value: str, pos: int) -> None:
    if name == "L" and not UNIT_LENGTH_RE.match(value):
        raise lx.error(BAD_DURATION, f"unit length {value!r}", pos=pos)
    if name == "L":
        m = UNIT_LENGTH_RE.match(value)
        if int(m.group(1)) == 0 or int(m.group(2)) == 0:
            raise lx.error(BAD_DURATION, f"unit length {value!r}", pos=pos)
    if name == "M" and not METER_RE.match(value):
        raise lx.error(UNKNOWN_SYMBOL, f"meter {value!r}", pos=pos)
    if name == "M":
        m = re.match(r"^\s*(\d+)\s*/\s*(\d+)", value)
        if m and (int(m.group(1)) == 0 or int(m.group(2)) == 0):
            raise lx.error(UNKNOWN_SYMBOL, f"meter {value!r}", pos=pos)


def _last_significant(tokens: List[BodyToken]) -> Optional[BodyToken]:
    for tok in reversed(tokens):
        if not isinstance(tok, (LineBreak, Comment)):
            return tok
    return None


def tokenize_body(text: str, first_line: int = 1) -> Tuple[BodyToken, ...]:
    """Tokenize ABC body text (no headers) into typed tokens.

    Raises:
        ParseError: on any construct outside the supported subset.
    """
    lx = _Lexer(text, first_line)
    tokens: List[BodyToken] = []
    slur_depth = 0
    slur_open_pos = 0
    at_line_start = True
    while not lx.at_end():
        ch = lx.peek()
        start = lx.pos
        if at_line_start:
            at_line_start = False
            eol = text.find("\n", lx.pos)
            if FIELD_LINE.match(text[lx.pos:eol if eol >= 0 else len(text)]):
                raise lx.error(UNKNOWN_SYMBOL, REJECTED_FIELDS.get(ch, "field line inside body"))
        if ch in " \t\r`":
            lx.pos += 1
        elif ch == "\n":
            tokens.append(LineBreak())
            lx.pos += 1
            at_line_start = True
        elif ch == "\\" and lx.peek(1) in ("\n", ""):
            # line continuation
            lx.pos += 2
            at_line_start = True
        elif ch == "%":
            if lx.peek(1) == "%":
                raise lx.error(UNKNOWN_SYMBOL, "stylesheet directive")
            end = text.find("\n", lx.pos)
            end = len(text) if end < 0 else end
            tokens.append(Comment(text[lx.pos + 1:end]))
            lx.pos = end
        elif ch == '"':
            end = text.find('"', lx.pos + 1)
            newline = text.find("\n", lx.pos + 1)
            if end < 0 or (0 <= newline < end):
                raise lx.error(UNBALANCED_QUOTE)
            tokens.append(ChordSymbol(text[lx.pos + 1:end]))
            lx.pos = end + 1
        elif ch in "!+":
            end = text.find(ch, lx.pos + 1)
            newline = text.find("\n", lx.pos + 1)
            if end < 0 or (0 <= newline < end) or end == lx.pos + 1:
                raise lx.error(UNKNOWN_SYMBOL, "unterminated decoration")
            tokens.append(Decoration(text[lx.pos:end + 1]))
            lx.pos = end + 1
        elif ch in SINGLE_DECORATIONS:
            tokens.append(Decoration(ch))
            lx.pos += 1
        elif _is_note_start(ch):
            tokens.append(_read_note(lx))
        elif ch in "zx":
            lx.pos += 1
            tokens.append(Rest(_read_duration(lx)))
        elif ch == "[":
            tokens.append(_read_bracket(lx))
        elif ch == "]":
            raise lx.error(UNBALANCED_BRACKET, "']' without '['")
        elif ch == "{":
            tokens.append(_read_grace(lx))
        elif ch == "}":
            raise lx.error(UNBALANCED_BRACKET, "'}' without '{'")
        elif ch in "|:":
            m = BARLINE_RE.match(text, lx.pos)
            lexeme = m.group(0)
            kind = BARLINES.get(lexeme)
            if kind is None:
                raise lx.error(UNKNOWN_SYMBOL, f"barline {lexeme!r}")
            tokens.append(Barline(kind))
            lx.pos += len(lexeme)
        elif ch == "(":
            nxt = lx.peek(1)
            if nxt.isdigit() and nxt.isascii():
                lx.pos += 1
                n = int(lx.digits())
                if n < 2 or n > 9:
                    raise lx.error(UNKNOWN_SYMBOL, f"tuplet ({n}", pos=start)
                if lx.peek() == ":":
                    raise lx.error(UNKNOWN_SYMBOL, "extended tuplet syntax")
                tokens.append(Tuplet(n))
            else:
                tokens.append(SlurOpen())
                if slur_depth == 0:
                    slur_open_pos = lx.pos
                slur_depth += 1
                lx.pos += 1
        elif ch == ")":
            if slur_depth == 0:
                raise lx.error(UNBALANCED_BRACKET, "')' without '('")
            slur_depth -= 1
            tokens.append(SlurClose())
            lx.pos += 1
        elif ch in "<>":
            count = 0
            while lx.peek() == ch:
                count += 1
                lx.pos += 1
            if count > 3:
                raise lx.error(UNKNOWN_SYMBOL, "broken rhythm run too long", pos=start)
            tokens.append(BrokenRhythm(ch, count))
        elif ch == "-":
            tokens.append(Tie())
            lx.pos += 1
        elif ch.isdigit() and ch.isascii():
            if isinstance(_last_significant(tokens), Barline):
                tokens.append(Volta(int(lx.digits())))
                if tokens[-1].number == 0:
                    raise lx.error(UNKNOWN_SYMBOL, "volta number 0", pos=start)
            else:
                raise lx.error(BAD_DURATION, "length without a note")
        elif ch == "/":
            raise lx.error(BAD_DURATION, "length without a note")
        else:
            raise lx.error(UNKNOWN_SYMBOL, f"{ch!r}")
    if slur_depth:
        raise lx.error(UNBALANCED_BRACKET, "slur not closed", pos=slur_open_pos)
    return tuple(tokens)


def parse_tune(text) -> TuneDocument:
    """Parse one tune: header lines (``X:1``, ``L:1/8`` ...) followed by a body.

    ``text`` may be ``str`` or UTF-8 ``bytes``.

    Raises:
        ParseError: kind is one of :data:`ERROR_KINDS`.
    """
    if isinstance(text, (bytes, bytearray)):
        try:
            text = bytes(text).decode("utf-8")
        except UnicodeDecodeError as exc:
            prefix = bytes(text)[:exc.start].decode("utf-8")
            line = prefix.count("\n") + 1
            col = len(prefix) - (prefix.rfind("\n") + 1) + 1
            raise ParseError(UNKNOWN_SYMBOL, line, col, "invalid UTF-8") from None
    source = text
    text = text.replace("\r\n", "\n")
    lines = text.split("\n")

    lineno = 0
    while lineno < len(lines) and not lines[lineno].strip():
        lineno += 1

    headers: List[Tuple[str, str]] = []
    header_lines: List[int] = []
    while lineno < len(lines):
        line = lines[lineno]
        if line.startswith("%%"):
            raise ParseError(UNKNOWN_SYMBOL, lineno + 1, 1, "stylesheet directive")
        if line.startswith("%"):
            lineno += 1
            continue
        m = FIELD_LINE.match(line)
        if not m:
            break
        name, value = m.group(1), m.group(2).strip()
        if name in REJECTED_FIELDS:
            raise ParseError(UNKNOWN_SYMBOL, lineno + 1, 1, REJECTED_FIELDS[name])
        lx = _Lexer(line, lineno + 1)
        _check_field_value(lx, name, value, 0)
        headers.append((name, value))
        header_lines.append(lineno + 1)
        lineno += 1

    x_lines = [ln for (name, _), ln in zip(headers, header_lines) if name == "X"]
    if not x_lines:
        raise ParseError(MISSING_X_HEADER, 1, 1)
    if len(x_lines) > 1:
        raise ParseError(UNKNOWN_SYMBOL, x_lines[1], 1, "duplicate X header")

    body_text = "\n".join(lines[lineno:])
    body = tokenize_body(body_text, first_line=lineno + 1)
    if not any(not isinstance(t, (LineBreak, Comment)) for t in body):
        raise ParseError(EMPTY_BODY, lineno + 1, 1)
    return TuneDocument(tuple(headers), body, source=source)


def parse_fragment(text: str) -> Tuple[BodyToken, ...]:
    """Tokenize a header-less ABC snippet such as a motif or a melody line."""
    return tokenize_body(text)


def serialize(doc: TuneDocument) -> str:
    """Render a document back to ABC text; re-parsing gives an equal document."""
    head = "".join(f"{name}:{value}\n" for name, value in doc.headers)
    return head + render_tokens(doc.body)


def split_tunebook(text: str) -> List[str]:
    """Split a tunebook into tune texts.

    A tune starts at an ``X:`` line at the start of the file or after a blank
    line. Leading material made only of comments is dropped; any other
    leading material is returned as its own chunk so it fails loudly.
    """
    lines = text.replace("\r\n", "\n").split("\n")
    chunks: List[List[str]] = [[]]
    prev_blank = True
    for line in lines:
        if line.startswith("X:") and prev_blank and any(l.strip() for l in chunks[-1]):
            chunks.append([])
        chunks[-1].append(line)
        prev_blank = not line.strip()
    tunes = []
    for chunk in chunks:
        while chunk and not chunk[-1].strip():
            chunk.pop()
        while chunk and not chunk[0].strip():
            chunk.pop(0)
        if not chunk:
            continue
        if not any(l.startswith("X:") for l in chunk) and all(l.startswith("%") or not l.strip() for l in chunk):
            continue
        tunes.append("\n".join(chunk) + "\n")
    return tunes


def iter_timed(tokens: Iterable[BodyToken]):
    for tok in tokens:
        if isinstance(tok, (Note, Rest, MultiNote)):
            yield tok
