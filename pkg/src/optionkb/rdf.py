"""Term and quad data model plus the N-Quads interchange codec.

The codec covers a deliberate subset of N-Quads: one statement per line,
objects are IRIs, blank nodes, or typed literals, and the only escape
sequences are ``\\" \\\\ \\n \\t``.  Serialization is canonical: parsing any
accepted text and re-serializing it is a fixed point, and
``parse(serialize(quads)) == quads`` element for element.

Canonical literal forms are enforced at construction time: integer lexicals
are normalized through int(), doubles take the shortest form that round-trips
(Python's float repr), years are zero-padded to four digits.  A Literal can
therefore never hold a non-canonical lexical, which is what makes the codec
round trip exact.
"""

import math
import re
from dataclasses import dataclass

from .vocab import XSD_NS

XSD_STRING = XSD_NS + "string"
XSD_INTEGER = XSD_NS + "integer"
XSD_DOUBLE = XSD_NS + "double"
XSD_GYEAR = XSD_NS + "gYear"

LITERAL_DATATYPES = frozenset({XSD_STRING, XSD_INTEGER, XSD_DOUBLE, XSD_GYEAR})

_BLANK_LABEL_RE = re.compile(r"[A-Za-z][A-Za-z0-9]*\Z")
_INTEGER_RE = re.compile(r"[+-]?[0-9]+\Z")
_DOUBLE_RE = re.compile(r"[+-]?(?:[0-9]+\.?[0-9]*|\.[0-9]+)(?:[eE][+-]?[0-9]+)?\Z")
_GYEAR_RE = re.compile(r"-?[0-9]{4,}\Z")


@dataclass(frozen=True)
class Iri:
    value: str

    def __post_init__(self):
        v = self.value
        if not v:
            raise ValueError("empty IRI")
        if "<" in v or ">" in v or any(c.isspace() for c in v):
            raise ValueError(f"IRI contains whitespace or angle bracket: {v!r}")


@dataclass(frozen=True)
class Literal:
    lexical: str
    datatype: str = XSD_STRING

    def __post_init__(self):
        if self.datatype not in LITERAL_DATATYPES:
            raise ValueError(f"unsupported literal datatype: {self.datatype}")
        object.__setattr__(self, "lexical", _canonical_lexical(self.lexical, self.datatype))


@dataclass(frozen=True)
class Blank:
    label: str

    def __post_init__(self):
        if not _BLANK_LABEL_RE.match(self.label):
            raise ValueError(f"invalid blank node label: {self.label!r}")


Term = Iri | Literal | Blank


def _canonical_lexical(lexical: str, datatype: str) -> str:
    if datatype == XSD_STRING:
        return lexical
    if datatype == XSD_INTEGER:
        if not _INTEGER_RE.match(lexical):
            raise ValueError(f"not an integer lexical: {lexical!r}")
        return str(int(lexical))
    if datatype == XSD_DOUBLE:
        if not _DOUBLE_RE.match(lexical):
            raise ValueError(f"not a double lexical: {lexical!r}")
        value = float(lexical)
        if not math.isfinite(value):
            raise ValueError(f"double lexical is not finite: {lexical!r}")
        return repr(value)
    # xsd:gYear
    if not _GYEAR_RE.match(lexical):
        raise ValueError(f"not a gYear lexical: {lexical!r}")
    return f"{int(lexical):04d}"


def integer_literal(value: int) -> Literal:
    return Literal(str(value), XSD_INTEGER)


def double_literal(value: float) -> Literal:
    return Literal(repr(value), XSD_DOUBLE)


def year_literal(value: int) -> Literal:
    return Literal(str(value), XSD_GYEAR)


@dataclass(frozen=True)
class Quad:
    graph: Iri
    subject: Iri | Blank
    predicate: Iri
    object: Term

    def __post_init__(self):
        if not isinstance(self.graph, Iri):
            raise ValueError("graph must be an IRI")
        if not isinstance(self.subject, (Iri, Blank)):
            raise ValueError("subject must be an IRI or blank node")
        if not isinstance(self.predicate, Iri):
            raise ValueError("predicate must be an IRI")
        if not isinstance(self.object, (Iri, Literal, Blank)):
            raise ValueError("object must be a term")


class UnknownIdError(KeyError):
    """Term id was never assigned by this dictionary."""


class Dictionary:
    """Bijective term <-> id map; ids assigned densely from 1 in first-seen order."""

    def __init__(self):
        self._ids: dict[Term, int] = {}
        self._terms: list[Term] = []

    def encode(self, term: Term) -> int:
        tid = self._ids.get(term)
        if tid is None:
            self._terms.append(term)
            tid = len(self._terms)
            self._ids[term] = tid
        return tid

    def decode(self, tid: int) -> Term:
        if not 1 <= tid <= len(self._terms):
            raise UnknownIdError(tid)
        return self._terms[tid - 1]

    def lookup(self, term: Term) -> int | None:
        """Id of a term if already assigned; never assigns."""
        return self._ids.get(term)

    def __len__(self) -> int:
        return len(self._terms)


class NQuadsSyntaxError(ValueError):
    def __init__(self, line: int, column: int, reason: str):
        super().__init__(f"line {line}, column {column}: {reason}")
        self.line = line
        self.column = column
        self.reason = reason


_ESCAPES = {'"': '\\"', "\\": "\\\\", "\n": "\\n", "\t": "\\t"}
_UNESCAPES = {'"': '"', "\\": "\\", "n": "\n", "t": "\t"}


def escape_lexical(text: str) -> str:
    out = []
    for c in text:
        out.append(_ESCAPES.get(c, c))
    return "".join(out)


def serialize_term(term: Term) -> str:
    if isinstance(term, Iri):
        return f"<{term.value}>"
    if isinstance(term, Blank):
        return f"_:{term.label}"
    return f'"{escape_lexical(term.lexical)}"^^<{term.datatype}>'


def serialize_nquads(quads) -> str:
    """Canonical serialization: one statement per line, in input order."""
    lines = []
    for q in quads:
        lines.append(
            f"{serialize_term(q.subject)} {serialize_term(q.predicate)} "
            f"{serialize_term(q.object)} {serialize_term(q.graph)} .\n"
        )
    return "".join(lines)


class _LineScanner:
    """Cursor over one statement line; 1-based columns for error reporting."""

    def __init__(self, text: str, lineno: int):
        self.text = text
        self.pos = 0
        self.lineno = lineno

    def error(self, reason: str, column: int | None = None):
        raise NQuadsSyntaxError(self.lineno, (self.pos if column is None else column) + 1, reason)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos] in " \t":
            self.pos += 1

    def at_end(self) -> bool:
        return self.pos >= len(self.text)

    def _read_iri(self) -> Iri:
        start = self.pos
        end = self.text.find(">", self.pos + 1)
        if end < 0:
            self.error("unterminated IRI", start)
        value = self.text[self.pos + 1:end]
        self.pos = end + 1
        try:
            return Iri(value)
        except ValueError as exc:
            self.error(str(exc), start)

    def _read_blank(self) -> Blank:
        start = self.pos
        self.pos += 2
        begin = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isalnum():
            self.pos += 1
        label = self.text[begin:self.pos]
        try:
            return Blank(label)
        except ValueError as exc:
            self.error(str(exc), start)

    def _read_literal(self) -> Literal:
        start = self.pos
        self.pos += 1
        chars = []
        while True:
            if self.pos >= len(self.text):
                self.error("unterminated literal", start)
            c = self.text[self.pos]
            if c == '"':
                self.pos += 1
                break
            if c == "\\":
                if self.pos + 1 >= len(self.text):
                    self.error("dangling escape", self.pos)
                esc = self.text[self.pos + 1]
                if esc not in _UNESCAPES:
                    self.error(f"unsupported escape sequence \\{esc}", self.pos)
                chars.append(_UNESCAPES[esc])
                self.pos += 2
            else:
                chars.append(c)
                self.pos += 1
        lexical = "".join(chars)
        if self.pos < len(self.text) and self.text[self.pos] == "@":
            self.error("language tags are not supported")
        datatype = XSD_STRING
        if self.text.startswith("^^", self.pos):
            self.pos += 2
            if self.pos >= len(self.text) or self.text[self.pos] != "<":
                self.error("expected <datatype IRI> after ^^")
            datatype = self._read_iri().value
        try:
            return Literal(lexical, datatype)
        except ValueError as exc:
            self.error(str(exc), start)

    def read_term(self, position: str) -> Term:
        self.skip_ws()
        if self.at_end():
            self.error(f"expected {position}, found end of statement")
        c = self.text[self.pos]
        if c == "<":
            return self._read_iri()
        if c == "_" and self.text.startswith("_:", self.pos):
            if position in ("predicate", "graph"):
                self.error(f"blank node not allowed in {position} position")
            return self._read_blank()
        if c == '"':
            if position != "object":
                self.error(f"literal not allowed in {position} position")
            return self._read_literal()
        if c == ".":
            self.error(f"expected {position}, found statement terminator")
        self.error(f"expected {position}")

    def read_terminator(self):
        self.skip_ws()
        if self.at_end() or self.text[self.pos] != ".":
            self.error("expected '.' statement terminator")
        self.pos += 1
        self.skip_ws()
        if not self.at_end():
            self.error("trailing content after statement terminator")


def parse_term_text(text: str) -> Term:
    """Parse a single term in N-Quads syntax (used by the structured-query wire format)."""
    scanner = _LineScanner(text, 1)
    term = scanner.read_term("object")
    scanner.skip_ws()
    if not scanner.at_end():
        scanner.error("trailing content after term")
    return term


def parse_nquads(data: bytes | str) -> list[Quad]:
    """Parse N-Quads text into quads, in input order.

    Blank lines and lines whose first non-blank character is '#' are skipped.
    The first error aborts the parse (NQuadsSyntaxError with line/column).
    """
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            line = data[:exc.start].count(b"\n") + 1
            raise NQuadsSyntaxError(line, 1, "invalid UTF-8") from exc
    else:
        text = data
    quads = []
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.rstrip("\r")
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        scanner = _LineScanner(line, lineno)
        subject = scanner.read_term("subject")
        predicate = scanner.read_term("predicate")
        obj = scanner.read_term("object")
        graph = scanner.read_term("graph")
        scanner.read_terminator()
        quads.append(Quad(graph=graph, subject=subject, predicate=predicate, object=obj))
    return quads
