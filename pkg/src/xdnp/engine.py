"""Packet evaluation and a reactive single-table switch.

The switch keeps exact-match (microflow) entries keyed on the packet
4-tuple. A table miss is a packet-in: the controller evaluates the compiled
policy and the resulting concrete action is installed for that 4-tuple.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Union

from .analyzer import AtomicMatch, CompiledPolicy
from .model import Drop, Field, Forward, NormalForwarding, PacketHeader

__all__ = ["MatchResult", "SwitchStats", "SwitchState", "match_atom", "evaluate", "switch_handle"]

Decision = Union[Forward, Drop, NormalForwarding]
NormalPort = Callable[[PacketHeader], Optional[int]]


@dataclass(frozen=True)
class MatchResult:
    action: Decision
    matched_entry: Optional[int] = None
    matched_clause: Optional[int] = None

    @property
    def is_default(self) -> bool:
        return self.matched_entry is None

    def __str__(self) -> str:
        if self.is_default:
            return f"default:{self.action}"
        text = f"{self.action} entry={self.matched_entry}"
        return f"{text} clause={self.matched_clause}"


_HEADER_ATTR = {f: f.header_attr for f in Field}


def match_atom(atom: AtomicMatch, pkt: PacketHeader) -> bool:
    return getattr(pkt, _HEADER_ATTR[atom.field]) == atom.value


def evaluate(cp: CompiledPolicy, pkt: PacketHeader) -> MatchResult:
    """First matching entry in priority order, else the policy default."""
    for i, entry in enumerate(cp.entries):
        for j, clause in enumerate(entry.predicate.any_of):
            if all(match_atom(atom, pkt) for atom in clause.all_of):
                return MatchResult(entry.action, i, j)
    return MatchResult(cp.default_action)


@dataclass
class SwitchStats:
    table_hits: int = 0
    packet_ins: int = 0
    installs: int = 0
    packets_total: int = 0


@dataclass
class SwitchState:
    """Flow table plus counters. Not thread-safe; one owner mutates it."""

    flow_table: dict[tuple, Decision] = field(default_factory=dict)
    stats: SwitchStats = field(default_factory=SwitchStats)

    def handle(self, cp: CompiledPolicy, pkt: PacketHeader,
               normal_port: Optional[NormalPort] = None) -> Decision:
        key = (pkt.src_ip, pkt.dst_ip, pkt.src_port, pkt.dst_port)
        self.stats.packets_total += 1
        cached = self.flow_table.get(key)
        if cached is not None:
            self.stats.table_hits += 1
            return cached
        self.stats.packet_ins += 1
        action = evaluate(cp, pkt).action
        if isinstance(action, NormalForwarding) and normal_port is not None:
            port = normal_port(pkt)
            action = Forward(port) if port is not None else Drop()
        self.flow_table[key] = action
        self.stats.installs += 1
        return action


def switch_handle(state: SwitchState, cp: CompiledPolicy, pkt: PacketHeader,
                  normal_port: Optional[NormalPort] = None) -> tuple[Decision, SwitchState]:
    """Process one packet; *state* is updated in place and returned."""
    return state.handle(cp, pkt, normal_port), state

