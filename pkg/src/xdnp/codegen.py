"""Backends: controller-module source via templates, and flow-table JSON.

Templates live in a directory as ``<id>.<ext>.j2`` files (for example
``floodlight.java.j2``). The built-in set ships with the package; a user
directory given explicitly or through ``XDNP_TEMPLATE_DIR`` is searched
first, so it can add targets or shadow built-ins.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from fractions import Fraction
from ipaddress import IPv4Address
from pathlib import Path
from typing import Optional

import jinja2

from .analyzer import AtomicMatch, Clause, CompiledPolicy, DnfPredicate, Entry
from .model import Drop, Field, Forward, NormalForwarding

__all__ = [
    "TemplateRegistry",
    "UnknownTemplateError",
    "SizeMetrics",
    "emit_controller_source",
    "emit_flow_table",
    "load_flow_table",
    "measure",
    "BUILTIN_TEMPLATE_DIR",
]

BUILTIN_TEMPLATE_DIR = Path(__file__).parent / "templates"
TEMPLATE_DIR_ENV = "XDNP_TEMPLATE_DIR"


class UnknownTemplateError(KeyError):
    pass


@dataclass(frozen=True)
class TemplateInfo:
    id: str
    extension: str
    path: Path


class TemplateRegistry:
    """Maps template ids to template files; immutable after construction."""

    def __init__(self, extra_dirs=()):
        dirs = [Path(d) for d in extra_dirs] + [BUILTIN_TEMPLATE_DIR]
        found: dict[str, TemplateInfo] = {}
        for d in dirs:
            if not d.is_dir():
                continue
            for path in sorted(d.glob("*.j2")):
                stem, _, ext = path.name[: -len(".j2")].partition(".")
                found.setdefault(stem, TemplateInfo(stem, "." + ext if ext else "", path))
        self._templates = found

    @classmethod
    def from_env(cls, template_dir=None) -> "TemplateRegistry":
        dirs = []
        if template_dir:
            dirs.append(template_dir)
        if os.environ.get(TEMPLATE_DIR_ENV):
            dirs.append(os.environ[TEMPLATE_DIR_ENV])
        return cls(dirs)

    def ids(self) -> list[str]:
        return sorted(self._templates)

    def info(self, template_id: str) -> TemplateInfo:
        try:
            return self._templates[template_id]
        except KeyError:
            raise UnknownTemplateError(
                f"unknown template {template_id!r} (available: {', '.join(self.ids()) or 'none'})"
            ) from None

    def get(self, template_id: str) -> jinja2.Template:
        info = self.info(template_id)
        env = jinja2.Environment(
            loader=jinja2.FileSystemLoader(str(info.path.parent)),
            keep_trailing_newline=True,
            trim_blocks=True,
            lstrip_blocks=True,
            undefined=jinja2.StrictUndefined,
        )
        return env.get_template(info.path.name)


_default_registry: Optional[TemplateRegistry] = None


def _registry() -> TemplateRegistry:
    global _default_registry
    if _default_registry is None:
        _default_registry = TemplateRegistry.from_env()
    return _default_registry


def _template_context(cp: CompiledPolicy) -> dict:
    entries = []
    for index, entry in enumerate(cp.entries):
        clauses = [
            {
                "index": j,
                "atoms": [
                    {"field": a.field.value, "is_ip": a.field.is_ip, "value": str(a.value)}
                    for a in clause.all_of
                ],
            }
            for j, clause in enumerate(entry.predicate.any_of)
        ]
        action = entry.action
        entries.append({
            "index": index,
            "priority": entry.priority,
            "clauses": clauses,
            "drop": isinstance(action, Drop),
            "port": action.port if isinstance(action, Forward) else 0,
            "predicate": str(entry.predicate),
        })
    return {
        "name": cp.name,
        "entries": entries,
        "default_drop": isinstance(cp.default_action, Drop),
        "clause_count": cp.clause_count,
    }


def emit_controller_source(cp: CompiledPolicy, template_id: str = "floodlight",
                           registry: Optional[TemplateRegistry] = None) -> str:
    """Render *cp* through a registered template.

    Raises :class:`UnknownTemplateError` for an unregistered *template_id*.
    """
    template = (registry or _registry()).get(template_id)
    return template.render(**_template_context(cp))


def emit_flow_table(cp: CompiledPolicy) -> str:
    doc = {
        "name": cp.name,
        "default": "drop" if isinstance(cp.default_action, Drop) else "normal",
        "entries": [
            {
                "priority": e.priority,
                "match": {
                    "any_of": [
                        {"all_of": [
                            {
                                "field": a.field.value,
                                "op": "eq",
                                "value": str(a.value) if a.field.is_ip else a.value,
                            }
                            for a in clause.all_of
                        ]}
                        for clause in e.predicate.any_of
                    ]
                },
                "action": (
                    {"type": "drop"} if isinstance(e.action, Drop)
                    else {"type": "forward", "port": e.action.port}
                ),
            }
            for e in cp.entries
        ],
    }
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def load_flow_table(text: str) -> CompiledPolicy:
    """Inverse of :func:`emit_flow_table`."""
    doc = json.loads(text)
    entries = []
    for raw in doc["entries"]:
        clauses = []
        for raw_clause in raw["match"]["any_of"]:
            atoms = []
            for atom in raw_clause["all_of"]:
                if atom["op"] != "eq":
                    raise ValueError(f"unsupported operator {atom['op']!r}")
                field = Field(atom["field"])
                value = IPv4Address(atom["value"]) if field.is_ip else int(atom["value"])
                atoms.append(AtomicMatch(field, value))
            clauses.append(Clause(tuple(atoms)))
        act = raw["action"]
        if act["type"] == "drop":
            action = Drop()
        elif act["type"] == "forward":
            action = Forward(int(act["port"]))
        else:
            raise ValueError(f"unknown action type {act['type']!r}")
        entries.append(Entry(int(raw["priority"]), DnfPredicate(tuple(clauses)), action))
    default = {"normal": NormalForwarding(), "drop": Drop()}[doc["default"]]
    return CompiledPolicy(doc["name"], tuple(entries), default)


@dataclass(frozen=True)
class SizeMetrics:
    input_lines: int
    input_bytes: int
    output_lines: int
    output_bytes: int

    @property
    def line_ratio(self) -> Fraction:
        return Fraction(self.output_lines, self.input_lines)

    @property
    def byte_ratio(self) -> Fraction:
        return Fraction(self.output_bytes, self.input_bytes)

    def summary(self) -> str:
        return (
            f"input: {self.input_lines} lines, {self.input_bytes} bytes; "
            f"output: {self.output_lines} lines, {self.output_bytes} bytes; "
            f"line ratio {float(self.line_ratio):.2f}, byte ratio {float(self.byte_ratio):.2f}"
        )


def count_lines(text: str) -> int:
    """Lines that are non-empty after stripping whitespace."""
    return sum(1 for line in text.splitlines() if line.strip())


def measure(input_source: str, output_source: str) -> SizeMetrics:
    metrics = SizeMetrics(
        count_lines(input_source), len(input_source.encode("utf-8")),
        count_lines(output_source), len(output_source.encode("utf-8")),
    )
    if metrics.input_lines == 0 or metrics.input_bytes == 0:
        raise ValueError("input source is empty")
    return metrics
