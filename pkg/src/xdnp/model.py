"""Policy AST, packet header, and canonical serialization.

A policy document declares a named module holding an ordered list of rules.
Each rule is a chain of ``field=value`` conditions joined by ``and``/``or``
connectors, followed by an output port (``0`` meaning drop).
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from ipaddress import IPv4Address
from typing import Optional, Union

__all__ = [
    "Field",
    "Connector",
    "Forward",
    "Drop",
    "NormalForwarding",
    "Action",
    "Value",
    "Condition",
    "Rule",
    "Policy",
    "PacketHeader",
    "SourceSpan",
    "Diagnostic",
    "Severity",
    "PolicyError",
    "canonical_xml",
    "validate",
    "parse_ipv4",
]

IDENTIFIER_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")
MAX_PORT = 65535


class Field(enum.Enum):
    SRC_IP = "src_ip"
    DST_IP = "dest_ip"
    SRC_PORT = "src_prt"
    DST_PORT = "dest_prt"

    @property
    def is_ip(self) -> bool:
        return self in (Field.SRC_IP, Field.DST_IP)

    @property
    def header_attr(self) -> str:
        """Name of the matching :class:`PacketHeader` attribute."""
        return _HEADER_ATTR[self]


_HEADER_ATTR = {
    Field.SRC_IP: "src_ip",
    Field.DST_IP: "dst_ip",
    Field.SRC_PORT: "src_port",
    Field.DST_PORT: "dst_port",
}


class Connector(enum.Enum):
    AND = "and"
    OR = "or"


@dataclass(frozen=True)
class Forward:
    port: int

    def __str__(self) -> str:
        return f"forward:{self.port}"


@dataclass(frozen=True)
class Drop:
    def __str__(self) -> str:
        return "drop"


@dataclass(frozen=True)
class NormalForwarding:
    """Hand the packet to the controller's ordinary L2/L3 forwarding."""

    def __str__(self) -> str:
        return "normal"


Action = Union[Forward, Drop]
Value = Union[IPv4Address, int]


class Severity(enum.Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int
    length: int = 1

    def __post_init__(self):
        if self.line < 1 or self.column < 1 or self.length < 1:
            raise ValueError(f"invalid span {self!r}")

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    message: str
    span: Optional[SourceSpan] = None

    def __post_init__(self):
        if not self.message:
            raise ValueError("diagnostic message must be non-empty")

    def format(self, filename: str = "<input>") -> str:
        where = f"{filename}:{self.span}" if self.span else f"{filename}:1:1"
        return f"{where}: {self.severity.value}: {self.message}"


class PolicyError(Exception):
    """Raised when lexing, parsing or validation produces errors."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(d.message for d in self.diagnostics))


# Spans are metadata: they are excluded from equality and hashing.
@dataclass(frozen=True)
class Condition:
    field: Field
    value: Value
    connector: Optional[Connector] = None
    span: Optional[SourceSpan] = field(default=None, compare=False, repr=False)

    def __str__(self) -> str:
        return f"{self.field.value}={self.value}"


@dataclass(frozen=True)
class Rule:
    conditions: tuple[Condition, ...]
    action: Action
    span: Optional[SourceSpan] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "conditions", tuple(self.conditions))


@dataclass(frozen=True)
class Policy:
    name: str
    rules: tuple[Rule, ...] = ()
    span: Optional[SourceSpan] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))


@dataclass(frozen=True)
class PacketHeader:
    """The 4-tuple a rule can match on. Ping traffic uses ports 0/0."""

    src_ip: IPv4Address
    dst_ip: IPv4Address
    src_port: int = 0
    dst_port: int = 0

    @classmethod
    def parse(cls, spec: str) -> "PacketHeader":
        """Parse ``src=IP,dst=IP,sport=N,dport=N`` (ports optional, default 0)."""
        keys = {"src": "src_ip", "dst": "dst_ip", "sport": "src_port", "dport": "dst_port"}
        values = {}
        for item in spec.split(","):
            key, sep, raw = item.strip().partition("=")
            if not sep or key not in keys:
                raise ValueError(f"bad packet field {item!r}")
            if keys[key] in values:
                raise ValueError(f"duplicate packet field {key!r}")
            if key in ("src", "dst"):
                values[keys[key]] = IPv4Address(raw.strip())
            else:
                port = int(raw)
                if not 0 <= port <= MAX_PORT:
                    raise ValueError(f"port out of range: {port}")
                values[keys[key]] = port
        if "src_ip" not in values or "dst_ip" not in values:
            raise ValueError("packet needs both src and dst")
        return cls(**values)

    def __str__(self) -> str:
        return f"src={self.src_ip},dst={self.dst_ip},sport={self.src_port},dport={self.dst_port}"


def parse_ipv4(text: str) -> IPv4Address:
    return IPv4Address(text)


def canonical_xml(policy: Policy) -> str:
    """Pretty-print *policy* in the document syntax understood by the parser."""
    out = [f'<SDN name="{policy.name}">']
    if not policy.rules:
        out.append("  <rules>")
        out.append("  </rules>")
    else:
        out.append("  <rules>")
        for rule in policy.rules:
            out.append("    <rule>")
            for cond in rule.conditions:
                attr = f' connector="{cond.connector.value}"' if cond.connector else ""
                out.append(f"      <condition{attr}>{cond}</condition>")
            port = 0 if isinstance(rule.action, Drop) else rule.action.port
            out.append(f"      <action>{port}</action>")
            out.append("    </rule>")
        out.append("  </rules>")
    out.append("</SDN>")
    return "\n".join(out) + "\n"


def _is_port(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _check_value(value, span, out):
    if isinstance(value, IPv4Address):
        if value.packed[0] == 0:
            out.append(Diagnostic(Severity.ERROR, f"address {value} has first octet 0", span))
    elif _is_port(value):
        if not 0 <= value <= MAX_PORT:
            out.append(Diagnostic(Severity.ERROR, f"port {value} out of range 0-{MAX_PORT}", span))
    else:
        out.append(Diagnostic(Severity.ERROR, f"unsupported value {value!r}", span))


def validate(policy: Policy) -> list[Diagnostic]:
    """Return one diagnostic per broken invariant; empty when *policy* is sound."""
    out: list[Diagnostic] = []
    if not isinstance(policy.name, str) or not IDENTIFIER_RE.match(policy.name):
        out.append(Diagnostic(Severity.ERROR, f"invalid policy name {policy.name!r}", policy.span))
    for i, rule in enumerate(policy.rules, 1):
        if not rule.conditions:
            out.append(Diagnostic(Severity.ERROR, f"rule {i} has no conditions", rule.span))
        for j, cond in enumerate(rule.conditions):
            span = cond.span or rule.span
            if j == 0 and cond.connector is not None:
                out.append(Diagnostic(
                    Severity.ERROR,
                    f"rule {i}: first condition cannot carry connector {cond.connector.value!r}",
                    span))
            elif j > 0 and cond.connector is None:
                out.append(Diagnostic(Severity.ERROR, f"rule {i}: condition {j + 1} lacks a connector", span))
            if not isinstance(cond.field, Field):
                out.append(Diagnostic(Severity.ERROR, f"unknown field {cond.field!r}", span))
                continue
            _check_value(cond.value, span, out)
            if cond.field.is_ip and _is_port(cond.value):
                out.append(Diagnostic(
                    Severity.ERROR, f"{cond.field.value} expects an IPv4 address, got {cond.value}", span))
            elif not cond.field.is_ip and isinstance(cond.value, IPv4Address):
                out.append(Diagnostic(
                    Severity.ERROR, f"{cond.field.value} expects a port number, got {cond.value}", span))
        action = rule.action
        if isinstance(action, Forward):
            if not _is_port(action.port) or not 1 <= action.port <= MAX_PORT:
                out.append(Diagnostic(
                    Severity.ERROR, f"rule {i}: forward port must be 1-{MAX_PORT}, got {action.port}", rule.span))
        elif not isinstance(action, Drop):
            out.append(Diagnostic(Severity.ERROR, f"rule {i}: unknown action {action!r}", rule.span))
    return out
