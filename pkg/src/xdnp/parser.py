"""Recursive-descent parser for policy documents.

Grammar::

    document  := sdn
    sdn       := '<SDN' 'name' '=' '"' IDENT '"' '>' rules '</SDN>'
    rules     := '<rules>' rule* '</rules>'
    rule      := '<rule>' condition+ action '</rule>'
    condition := '<condition' ('connector' '=' '"' ('and'|'or') '"')? '>' condText '</condition>'
    condText  := FIELD '=' (IPV4 | NUMBER)
    action    := '<action>' NUMBER '</action>'        (0 = drop)

An error inside a rule abandons that rule and resumes at the next ``<rule``
so several broken rules are reported in one pass.
"""

from __future__ import annotations

import os
from ipaddress import IPv4Address
from typing import Optional

from .lexer import Token, TokenKind, lex
from .model import (
    IDENTIFIER_RE,
    Condition,
    Connector,
    Diagnostic,
    Drop,
    Field,
    Forward,
    Policy,
    PolicyError,
    Rule,
    Severity,
    validate,
)

__all__ = ["parse", "parse_text", "parse_file"]

K = TokenKind


class _RuleAbort(Exception):
    pass


class _Parser:
    def __init__(self, tokens: list[Token], fail_fast: bool):
        if not tokens or tokens[-1].kind is not K.EOF:
            raise ValueError("token stream must end with EOF")
        self.toks = tokens
        self.i = 0
        self.fail_fast = fail_fast
        self.diags: list[Diagnostic] = []

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, message: str, tok: Optional[Token] = None) -> Diagnostic:
        tok = tok or self.tok
        diag = Diagnostic(Severity.ERROR, message, tok.span)
        self.diags.append(diag)
        return diag

    def unexpected(self, wanted: str):
        self.error(f"expected {wanted}, found {_describe(self.tok)}")
        raise _RuleAbort

    def expect(self, kind: TokenKind, wanted: Optional[str] = None) -> Token:
        tok = self.tok
        if tok.kind is not kind:
            self.unexpected(wanted or kind.value)
        self.i += 1
        return tok

    def fatal(self):
        raise PolicyError(self.diags)

    def document(self) -> Policy:
        try:
            policy_span, name = self.sdn_header()
            self.expect(K.RULES_OPEN, "<rules>")
            self.expect(K.TAG_END, "'>' after <rules")
        except _RuleAbort:
            self.fatal()
        rules = []
        while self.tok.kind is K.RULE_OPEN:
            rule = self.rule()
            if rule is not None:
                rules.append(rule)
            elif self.fail_fast:
                self.fatal()
        try:
            self.expect(K.RULES_CLOSE, "<rule> or </rules>")
            self.expect(K.SDN_CLOSE, "</SDN>")
            self.expect(K.EOF, "end of document")
        except _RuleAbort:
            self.fatal()
        if self.diags:
            self.fatal()
        return Policy(name, rules, span=policy_span)

    def sdn_header(self):
        if self.tok.kind is K.EOF:
            self.error("empty document: expected <SDN> element")
            raise _RuleAbort
        open_tok = self.expect(K.SDN_OPEN, "<SDN> element")
        attrs = self.attributes()
        if "name" not in attrs:
            self.error("<SDN> requires a name attribute", open_tok)
            raise _RuleAbort
        name_tok, name = attrs["name"]
        if not IDENTIFIER_RE.match(name):
            self.error(f"policy name {name!r} is not an identifier", name_tok)
            raise _RuleAbort
        for key, (tok, _) in attrs.items():
            if key != "name":
                self.error(f"unknown attribute {key!r} on <SDN>", tok)
                raise _RuleAbort
        return open_tok.span, name

    def attributes(self) -> dict:
        attrs = {}
        while self.tok.kind is K.ATTR_NAME:
            name_tok = self.tok
            self.i += 1
            self.expect(K.ATTR_EQUALS, f"'=' after attribute {name_tok.lexeme}")
            value_tok = self.expect(K.QUOTED_STRING, "double-quoted attribute value")
            if name_tok.lexeme in attrs:
                self.error(f"duplicate attribute {name_tok.lexeme!r}", name_tok)
                raise _RuleAbort
            attrs[name_tok.lexeme] = (value_tok, value_tok.lexeme[1:-1])
        self.expect(K.TAG_END, "'>' or attribute")
        return attrs

    def rule(self) -> Optional[Rule]:
        open_tok = self.tok
        try:
            self.i += 1
            self.expect(K.TAG_END, "'>' after <rule")
            conditions = []
            while self.tok.kind is K.COND_OPEN:
                conditions.append(self.condition(first=not conditions))
            if self.tok.kind is K.ACTION_OPEN:
                if not conditions:
                    self.error("rule has an empty condition list", open_tok)
                    raise _RuleAbort
                action = self.action()
            elif self.tok.kind is K.RULE_CLOSE:
                if not conditions:
                    self.error("rule has an empty condition list", open_tok)
                self.error("rule has no <action> element", open_tok)
                raise _RuleAbort
            else:
                self.unexpected("<condition> or <action>")
            self.expect(K.RULE_CLOSE, "</rule>")
            return Rule(conditions, action, span=open_tok.span)
        except _RuleAbort:
            self.resync()
            return None

    def resync(self) -> None:
        # Skip to the next rule, or to the end of the rule list.
        while self.tok.kind not in (K.RULE_OPEN, K.RULES_CLOSE, K.EOF):
            self.i += 1

    def condition(self, first: bool) -> Condition:
        open_tok = self.expect(K.COND_OPEN)
        attrs = self.attributes()
        connector = None if first else Connector.AND
        for key, (tok, value) in attrs.items():
            if key != "connector":
                self.error(f"unknown attribute {key!r} on <condition>", tok)
                raise _RuleAbort
            try:
                connector = Connector(value)
            except ValueError:
                self.error(f"connector must be \"and\" or \"or\", got {value!r}", tok)
                raise _RuleAbort from None
        if self.tok.kind is K.IDENTIFIER:
            self.error(f"unknown field {self.tok.lexeme!r}; expected one of "
                       "src_ip, dest_ip, src_prt, dest_prt")
            raise _RuleAbort
        field_tok = self.expect(K.FIELD, "field keyword")
        self.expect(K.EQ, "'=' after field")
        value_tok = self.tok
        if value_tok.kind is K.IPV4:
            value = IPv4Address(value_tok.lexeme)
        elif value_tok.kind is K.NUMBER:
            value = int(value_tok.lexeme)
        else:
            self.unexpected("IPv4 address or port number")
        self.i += 1
        self.expect(K.COND_CLOSE, "</condition>")
        return Condition(Field(field_tok.lexeme), value, connector, span=open_tok.span)

    def action(self):
        self.i += 1
        self.expect(K.TAG_END, "'>' after <action")
        port_tok = self.expect(K.NUMBER, "output port number")
        self.expect(K.ACTION_CLOSE, "</action>")
        port = int(port_tok.lexeme)
        return Drop() if port == 0 else Forward(port)


def _describe(tok: Token) -> str:
    if tok.kind is K.EOF:
        return "end of input"
    return repr(tok.lexeme)


def parse(tokens: list[Token], fail_fast: bool = False) -> Policy:
    """Build a :class:`Policy` from *tokens*; raise PolicyError on syntax errors."""
    return _Parser(tokens, fail_fast).document()


def parse_text(source: str, fail_fast: bool = False, check: bool = True) -> Policy:
    """Lex, parse and (optionally) validate a document held in memory."""
    policy = parse(lex(source), fail_fast=fail_fast)
    if check:
        errors = [d for d in validate(policy) if d.severity is Severity.ERROR]
        if errors:
            raise PolicyError(errors[:1] if fail_fast else errors)
    return policy


def parse_file(path: "str | os.PathLike", fail_fast: bool = False) -> Policy:
    """Read and compile-check a policy file.

    I/O problems propagate as :class:`OSError` (including decoding failures,
    re-raised as OSError); syntax and semantic problems as PolicyError.
    """
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        source = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise OSError(f"{path}: not valid UTF-8 ({exc.reason})") from exc
    return parse_text(source, fail_fast=fail_fast)
