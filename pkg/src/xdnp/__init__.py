"""Compiler and simulator for XML-defined OpenFlow network policies."""

from importlib.resources import files

from .analyzer import CompiledPolicy, DnfPredicate, compile_policy, normalize
from .codegen import emit_controller_source, emit_flow_table, load_flow_table, measure
from .engine import SwitchState, evaluate, match_atom, switch_handle
from .lexer import lex
from .model import (
    Condition,
    Connector,
    Diagnostic,
    Drop,
    Field,
    Forward,
    NormalForwarding,
    PacketHeader,
    Policy,
    PolicyError,
    Rule,
    canonical_xml,
    validate,
)
from .netsim import Topology, ping, pingall
from .parser import parse, parse_file, parse_text


def demo_path():
    """Path to the bundled two-rule demo policy."""
    return files(__package__) / "data" / "demo.xml"
