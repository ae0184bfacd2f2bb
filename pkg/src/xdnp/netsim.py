"""One switch, N hosts: ping and pingall over a compiled policy.

Host ``hk`` owns 10.0.0.k and sits on switch port k. Frames forwarded to a
port whose host does not own the destination IP are discarded by that host.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from ipaddress import IPv4Address
from typing import Optional, Union

from .analyzer import CompiledPolicy
from .engine import SwitchState, SwitchStats
from .model import Drop, Forward, PacketHeader

__all__ = [
    "Host",
    "Topology",
    "DeliveredTo",
    "Lost",
    "Outcome",
    "PingReport",
    "deliver",
    "ping",
    "pingall",
]


@dataclass(frozen=True)
class Host:
    name: str
    ip: IPv4Address
    port: int


@dataclass(frozen=True)
class Topology:
    hosts: tuple[Host, ...]

    @classmethod
    def single(cls, n: int) -> "Topology":
        if not 1 <= n <= 254:
            raise ValueError(f"host count must be 1-254, got {n}")
        return cls(tuple(Host(f"h{k}", IPv4Address(f"10.0.0.{k}"), k) for k in range(1, n + 1)))

    def by_ip(self, ip: IPv4Address) -> Optional[Host]:
        return next((h for h in self.hosts if h.ip == ip), None)

    def by_port(self, port: int) -> Optional[Host]:
        return next((h for h in self.hosts if h.port == port), None)

    def by_name(self, name: str) -> Host:
        for h in self.hosts:
            if h.name == name:
                return h
        raise KeyError(name)

    def normal_port(self, pkt: PacketHeader) -> Optional[int]:
        host = self.by_ip(pkt.dst_ip)
        return host.port if host else None


@dataclass(frozen=True)
class DeliveredTo:
    host: Host


@dataclass(frozen=True)
class Lost:
    reason: str


Delivery = Union[DeliveredTo, Lost]


class Outcome(enum.Enum):
    SUCCESS = "ok"
    REQUEST_LOST = "RQ"
    REPLY_LOST = "RP"


def deliver(topo: Topology, cp: CompiledPolicy, state: SwitchState, pkt: PacketHeader) -> Delivery:
    if topo.by_ip(pkt.dst_ip) is None:
        return Lost(f"no such host {pkt.dst_ip}")
    action = state.handle(cp, pkt, topo.normal_port)
    if isinstance(action, Drop):
        return Lost("dropped by switch")
    assert isinstance(action, Forward)
    host = topo.by_port(action.port)
    if host is None:
        return Lost(f"forwarded to empty port {action.port}")
    if host.ip != pkt.dst_ip:
        return Lost(f"misdelivered to {host.name}")
    return DeliveredTo(host)


def ping(topo: Topology, cp: CompiledPolicy, state: SwitchState, a: Host, b: Host) -> Outcome:
    if a == b:
        raise ValueError("cannot ping a host from itself")
    if isinstance(deliver(topo, cp, state, PacketHeader(a.ip, b.ip, 0, 0)), Lost):
        return Outcome.REQUEST_LOST
    if isinstance(deliver(topo, cp, state, PacketHeader(b.ip, a.ip, 0, 0)), Lost):
        return Outcome.REPLY_LOST
    return Outcome.SUCCESS


@dataclass
class PingReport:
    hosts: tuple[str, ...]
    matrix: dict[tuple[str, str], Outcome]
    stats: Optional[SwitchStats] = field(default=None, compare=False)

    @property
    def pairs(self) -> int:
        return len(self.matrix)

    @property
    def request_loss_pct(self) -> float:
        lost = sum(o is Outcome.REQUEST_LOST for o in self.matrix.values())
        return 100.0 * lost / self.pairs

    @property
    def roundtrip_loss_pct(self) -> float:
        lost = sum(o is not Outcome.SUCCESS for o in self.matrix.values())
        return 100.0 * lost / self.pairs

    def render(self) -> str:
        width = max(4, *(len(h) + 1 for h in self.hosts))
        lines = [" " * width + "".join(h.rjust(width) for h in self.hosts)]
        for src in self.hosts:
            cells = ("-" if src == dst else self.matrix[src, dst].value for dst in self.hosts)
            lines.append(src.ljust(width) + "".join(c.rjust(width) for c in cells))
        lines.append(f"request-delivery loss: {self.request_loss_pct:.2f}% (pingall metric)")
        lines.append(f"round-trip loss: {self.roundtrip_loss_pct:.2f}%")
        return "\n".join(lines)

    def to_json(self) -> str:
        doc = {
            "pairs": [{"src": s, "dst": d, "outcome": o.name} for (s, d), o in self.matrix.items()],
            "request_loss_pct": round(self.request_loss_pct, 2),
            "roundtrip_loss_pct": round(self.roundtrip_loss_pct, 2),
        }
        return json.dumps(doc, indent=2) + "\n"


def pingall(topo: Topology, cp: CompiledPolicy, state: Optional[SwitchState] = None) -> PingReport:
    """Ping every ordered host pair, in host order, through one shared switch."""
    if len(topo.hosts) < 2:
        raise ValueError("pingall needs at least two hosts")
    state = SwitchState() if state is None else state
    matrix = {}
    for a in topo.hosts:
        for b in topo.hosts:
            if a != b:
                matrix[a.name, b.name] = ping(topo, cp, state, a, b)
    return PingReport(tuple(h.name for h in topo.hosts), matrix, state.stats)
