"""Normalization of connector chains into DNF and policy compilation.

A rule's conditions ``c1 op2 c2 op3 c3 ...`` are read as one flat boolean
expression in which ``and`` binds tighter than ``or``. Under that
precedence the disjunctive normal form falls out directly: every ``or``
starts a new clause, every ``and`` extends the current one.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Union

from .model import (
    Action,
    Connector,
    Diagnostic,
    Drop,
    Field,
    NormalForwarding,
    Policy,
    PolicyError,
    Rule,
    Severity,
    Value,
    validate,
)

__all__ = [
    "AtomicMatch",
    "Clause",
    "DnfPredicate",
    "Entry",
    "CompiledPolicy",
    "DefaultAction",
    "normalize",
    "compile_policy",
    "unsatisfiable_clauses",
]

DefaultAction = Union[NormalForwarding, Drop]


class AtomicMatch(NamedTuple):
    field: Field
    value: Value

    def __str__(self) -> str:
        return f"{self.field.value}={self.value}"


@dataclass(frozen=True)
class Clause:
    all_of: tuple[AtomicMatch, ...]

    def __post_init__(self):
        object.__setattr__(self, "all_of", tuple(self.all_of))
        if not self.all_of:
            raise ValueError("clause must hold at least one atom")

    def is_satisfiable(self) -> bool:
        seen: dict = {}
        for atom in self.all_of:
            if seen.setdefault(atom.field, atom.value) != atom.value:
                return False
        return True


@dataclass(frozen=True)
class DnfPredicate:
    any_of: tuple[Clause, ...]

    def __post_init__(self):
        object.__setattr__(self, "any_of", tuple(self.any_of))
        if not self.any_of:
            raise ValueError("predicate must hold at least one clause")

    def __str__(self) -> str:
        return " | ".join("(" + " & ".join(map(str, c.all_of)) + ")" for c in self.any_of)


@dataclass(frozen=True)
class Entry:
    priority: int
    predicate: DnfPredicate
    action: Action


@dataclass(frozen=True)
class CompiledPolicy:
    """Rules in match order; earlier entries carry higher priorities."""

    name: str
    entries: tuple[Entry, ...] = ()
    default_action: DefaultAction = NormalForwarding()

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        prios = [e.priority for e in self.entries]
        if any(a <= b for a, b in zip(prios, prios[1:])) or any(p < 1 for p in prios):
            raise ValueError(f"priorities must be positive and strictly decreasing: {prios}")

    @property
    def clause_count(self) -> int:
        return sum(len(e.predicate.any_of) for e in self.entries)


def normalize(rule: Rule) -> DnfPredicate:
    clauses: list[list[AtomicMatch]] = []
    for cond in rule.conditions:
        atom = AtomicMatch(cond.field, cond.value)
        if not clauses or cond.connector is Connector.OR:
            clauses.append([atom])
        else:
            clauses[-1].append(atom)
    return DnfPredicate(tuple(Clause(tuple(c)) for c in clauses))


def compile_policy(policy: Policy, default_action: DefaultAction = NormalForwarding()) -> CompiledPolicy:
    """Turn a validated policy into prioritized match-action entries.

    Entry ``i`` (0-based document order) gets priority ``n - i``.
    Raises :class:`PolicyError` if *policy* does not validate.
    """
    errors = [d for d in validate(policy) if d.severity is Severity.ERROR]
    if errors:
        raise PolicyError(errors)
    if not isinstance(default_action, (NormalForwarding, Drop)):
        raise TypeError(f"default action must be NormalForwarding or Drop, not {default_action!r}")
    n = len(policy.rules)
    entries = tuple(
        Entry(n - i, normalize(rule), rule.action) for i, rule in enumerate(policy.rules)
    )
    return CompiledPolicy(policy.name, entries, default_action)


def unsatisfiable_clauses(policy: Policy) -> list[Diagnostic]:
    """Warn about clauses that require one field to hold two values."""
    out = []
    for i, rule in enumerate(policy.rules, 1):
        for j, clause in enumerate(normalize(rule).any_of, 1):
            if not clause.is_satisfiable():
                out.append(Diagnostic(
                    Severity.WARNING,
                    f"rule {i}, clause {j} can never match: {' and '.join(map(str, clause.all_of))}",
                    rule.span,
                ))
    return out
