"""Tokenizer for policy documents.

Tag names are keywords: ``<SDN``, ``<rules``, ``<rule``, ``<condition`` and
``<action`` (plus their closing forms) are the only tags recognized, spelled
exactly. Inside a tag the lexer produces attribute tokens; between tags it
produces field keywords, ``=``, IPv4 literals and numbers.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass

from .model import Diagnostic, PolicyError, Severity, SourceSpan

__all__ = ["TokenKind", "Token", "lex", "IPV4_RE", "FIELD_KEYWORDS"]


class TokenKind(enum.Enum):
    SDN_OPEN = "<SDN"
    SDN_CLOSE = "</SDN>"
    RULES_OPEN = "<rules"
    RULES_CLOSE = "</rules>"
    RULE_OPEN = "<rule"
    RULE_CLOSE = "</rule>"
    COND_OPEN = "<condition"
    COND_CLOSE = "</condition>"
    ACTION_OPEN = "<action"
    ACTION_CLOSE = "</action>"
    ATTR_NAME = "attribute name"
    ATTR_EQUALS = "'=' in tag"
    QUOTED_STRING = "quoted string"
    IDENTIFIER = "identifier"
    IPV4 = "IPv4 address"
    NUMBER = "number"
    FIELD = "field keyword"
    EQ = "'='"
    TAG_END = "'>'"
    EOF = "end of input"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    lexeme: str
    span: SourceSpan

    def __str__(self) -> str:
        return self.lexeme or self.kind.value


FIELD_KEYWORDS = frozenset({"src_ip", "dest_ip", "src_prt", "dest_prt"})

# Alternatives are ordered longest-first so Python's leftmost alternation
# yields the same longest match a DFA-based scanner would.
_OCT10 = r"(?:25[0-5]|2[0-4][0-9]|1[0-9][0-9]|[1-9][0-9])"
_START_OCT = rf"(?:{_OCT10}|[1-9])"
_OCTET = rf"(?:{_OCT10}|[0-9])"
IPV4_RE = re.compile(rf"{_START_OCT}\.{_OCTET}\.{_OCTET}\.{_OCTET}")

_NUMBER_RE = re.compile(r"[0-9]+")
_WORD_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_ATTR_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_.-]*")
_QUOTED_RE = re.compile(r'"[^"<>\n]*"')
_SPACE_RE = re.compile(r"[ \t\r\n]+")
_TAG_RE = re.compile(r"</?([A-Za-z_][A-Za-z0-9_]*)")

_OPEN_TAGS = {
    "SDN": TokenKind.SDN_OPEN,
    "rules": TokenKind.RULES_OPEN,
    "rule": TokenKind.RULE_OPEN,
    "condition": TokenKind.COND_OPEN,
    "action": TokenKind.ACTION_OPEN,
}
_CLOSE_TAGS = {
    "SDN": TokenKind.SDN_CLOSE,
    "rules": TokenKind.RULES_CLOSE,
    "rule": TokenKind.RULE_CLOSE,
    "condition": TokenKind.COND_CLOSE,
    "action": TokenKind.ACTION_CLOSE,
}


class _Scanner:
    def __init__(self, source: str):
        self.src = source
        self.pos = 0
        self.line = 1
        self.col = 1
        self.in_tag = False
        self.tokens: list[Token] = []

    def advance(self, n: int) -> None:
        chunk = self.src[self.pos:self.pos + n]
        newlines = chunk.count("\n")
        if newlines:
            self.line += newlines
            self.col = len(chunk) - chunk.rfind("\n")
        else:
            self.col += n
        self.pos += n

    def emit(self, kind: TokenKind, length: int) -> None:
        lexeme = self.src[self.pos:self.pos + length]
        self.tokens.append(Token(kind, lexeme, SourceSpan(self.line, self.col, length)))
        self.advance(length)

    def fail(self, message: str, length: int = 1) -> None:
        span = SourceSpan(self.line, self.col, max(length, 1))
        raise PolicyError([Diagnostic(Severity.ERROR, message, span)])

    def run(self) -> list[Token]:
        src = self.src
        while self.pos < len(src):
            m = _SPACE_RE.match(src, self.pos)
            if m:
                self.advance(m.end() - self.pos)
                continue
            if src.startswith("<!--", self.pos):
                if self.in_tag:
                    self.fail("comment inside a tag", 4)
                end = src.find("-->", self.pos + 4)
                if end < 0:
                    self.fail("unterminated comment", 4)
                self.advance(end + 3 - self.pos)
                continue
            if self.in_tag:
                self.scan_in_tag()
            else:
                self.scan_content()
        self.tokens.append(Token(TokenKind.EOF, "", SourceSpan(self.line, self.col, 1)))
        return self.tokens

    def scan_tag(self) -> None:
        src = self.src
        m = _TAG_RE.match(src, self.pos)
        if not m:
            self.fail("stray '<'")
        name = m.group(1)
        if src[self.pos + 1] == "/":
            kind = _CLOSE_TAGS.get(name)
            if kind is None:
                self.fail(f"unknown tag </{name}>", m.end() - self.pos)
            rest = _SPACE_RE.match(src, m.end())
            end = rest.end() if rest else m.end()
            if not src.startswith(">", end):
                self.fail(f"expected '>' to close </{name}", m.end() - self.pos)
            self.emit(kind, end + 1 - self.pos)
        else:
            kind = _OPEN_TAGS.get(name)
            if kind is None:
                self.fail(f"unknown tag <{name}>", m.end() - self.pos)
            self.emit(kind, m.end() - self.pos)
            self.in_tag = True

    def scan_in_tag(self) -> None:
        src, pos = self.src, self.pos
        ch = src[pos]
        if ch == ">":
            self.emit(TokenKind.TAG_END, 1)
            self.in_tag = False
        elif ch == "=":
            self.emit(TokenKind.ATTR_EQUALS, 1)
        elif ch == '"':
            m = _QUOTED_RE.match(src, pos)
            if not m:
                self.fail("unterminated attribute value")
            self.emit(TokenKind.QUOTED_STRING, m.end() - pos)
        else:
            m = _ATTR_RE.match(src, pos)
            if not m:
                self.fail(f"unexpected character {ch!r} inside tag")
            self.emit(TokenKind.ATTR_NAME, m.end() - pos)

    def scan_content(self) -> None:
        src, pos = self.src, self.pos
        ch = src[pos]
        if ch == "<":
            self.scan_tag()
            return
        if ch == "=":
            self.emit(TokenKind.EQ, 1)
            return
        if ch.isdigit():
            ip = IPV4_RE.match(src, pos)
            num = _NUMBER_RE.match(src, pos)
            # Longest match; ties go to the IPv4 class.
            if ip and ip.end() >= num.end():
                self.emit(TokenKind.IPV4, ip.end() - pos)
            else:
                self.emit(TokenKind.NUMBER, num.end() - pos)
            return
        m = _WORD_RE.match(src, pos)
        if m:
            kind = TokenKind.FIELD if m.group() in FIELD_KEYWORDS else TokenKind.IDENTIFIER
            self.emit(kind, m.end() - pos)
            return
        self.fail(f"unexpected character {ch!r}")


def lex(source: str) -> list[Token]:
    """Tokenize *source*, ending with an EOF token.

    Raises :class:`PolicyError` carrying one diagnostic at the first
    character sequence that matches no token class.
    """
    return _Scanner(source).run()
