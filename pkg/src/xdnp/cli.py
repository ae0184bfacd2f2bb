"""``xdnp`` command line: check, compile, eval, simulate, stats.

Exit codes: 0 success, 1 policy diagnostics or bad arguments to eval,
2 I/O failure, 3 unknown template, 4 too few hosts.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .analyzer import compile_policy, unsatisfiable_clauses
from .codegen import (
    TemplateRegistry,
    UnknownTemplateError,
    emit_controller_source,
    emit_flow_table,
    measure,
)
from .engine import evaluate
from .model import Drop, NormalForwarding, PacketHeader, PolicyError
from .netsim import Topology, pingall
from .parser import parse_text

EXIT_OK = 0
EXIT_DIAGNOSTICS = 1
EXIT_IO = 2
EXIT_TEMPLATE = 3
EXIT_HOSTS = 4

# Originally reported XML vs generated-source line counts, printed for comparison.
REFERENCE_INPUT_LINES = 18
REFERENCE_OUTPUT_LINES = 147


@dataclass(frozen=True)
class CliConfig:
    fail_fast: bool = False
    default_action: str = "normal"
    template_dir: Optional[Path] = None
    output_path: Optional[Path] = None

    @property
    def default(self):
        return Drop() if self.default_action == "drop" else NormalForwarding()


class _Failure(Exception):
    def __init__(self, code: int):
        self.code = code


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        print(f"xdnp: cannot read {path}: {exc}", file=sys.stderr)
        raise _Failure(EXIT_IO) from None


def _load(path: str, cfg: CliConfig):
    """Read, parse and validate; returns (source text, policy)."""
    source = _read(path)
    try:
        policy = parse_text(source, fail_fast=cfg.fail_fast)
    except PolicyError as exc:
        for diag in exc.diagnostics:
            print(diag.format(path), file=sys.stderr)
        raise _Failure(EXIT_DIAGNOSTICS) from None
    for diag in unsatisfiable_clauses(policy):
        print(diag.format(path), file=sys.stderr)
    return source, policy


def cmd_check(args, cfg: CliConfig) -> int:
    _load(args.file, cfg)
    print("OK")
    return EXIT_OK


def _render(args, cfg: CliConfig, cp):
    if args.emit == "flowtable":
        return emit_flow_table(cp), ".flows.json"
    registry = TemplateRegistry.from_env(cfg.template_dir)
    try:
        ext = registry.info(args.template).extension
        text = emit_controller_source(cp, args.template, registry)
    except UnknownTemplateError as exc:
        print(f"xdnp: {exc.args[0]}", file=sys.stderr)
        raise _Failure(EXIT_TEMPLATE) from None
    return text, ext


def cmd_compile(args, cfg: CliConfig) -> int:
    source, policy = _load(args.file, cfg)
    cp = compile_policy(policy, cfg.default)
    text, ext = _render(args, cfg, cp)
    out = cfg.output_path or Path(policy.name + ext)
    try:
        out.write_text(text, encoding="utf-8")
    except OSError as exc:
        print(f"xdnp: cannot write {out}: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"wrote {out}")
    print(measure(source, text).summary())
    return EXIT_OK


def cmd_stats(args, cfg: CliConfig) -> int:
    source, policy = _load(args.file, cfg)
    text, _ = _render(args, cfg, compile_policy(policy, cfg.default))
    m = measure(source, text)
    print(m.summary())
    print(f"reference: {REFERENCE_INPUT_LINES} -> {REFERENCE_OUTPUT_LINES} lines "
          f"(ratio {REFERENCE_OUTPUT_LINES / REFERENCE_INPUT_LINES:.2f})")
    return EXIT_OK


def cmd_eval(args, cfg: CliConfig) -> int:
    try:
        pkt = PacketHeader.parse(args.packet)
    except ValueError as exc:
        print(f"xdnp: bad --packet {args.packet!r}: {exc}", file=sys.stderr)
        return EXIT_DIAGNOSTICS
    _, policy = _load(args.file, cfg)
    print(evaluate(compile_policy(policy, cfg.default), pkt))
    return EXIT_OK


def cmd_simulate(args, cfg: CliConfig) -> int:
    if args.hosts < 2:
        print(f"xdnp: --hosts must be at least 2, got {args.hosts}", file=sys.stderr)
        return EXIT_HOSTS
    _, policy = _load(args.file, cfg)
    try:
        topo = Topology.single(args.hosts)
    except ValueError as exc:
        print(f"xdnp: {exc}", file=sys.stderr)
        return EXIT_HOSTS
    report = pingall(topo, compile_policy(policy, cfg.default))
    if args.json:
        sys.stdout.write(report.to_json())
    else:
        print(report.render())
        print(f"switch: packet_ins={report.stats.packet_ins} table_hits={report.stats.table_hits}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("file", help="policy document")
    common.add_argument("--fail-fast", action="store_true",
                        help="stop at the first error instead of reporting every broken rule")
    common.add_argument("--default", choices=("normal", "drop"), default="normal",
                        help="action for packets no rule matches (default: normal)")

    emit = argparse.ArgumentParser(add_help=False)
    emit.add_argument("--emit", choices=("controller", "flowtable"), default="controller")
    emit.add_argument("--template", default="floodlight", help="controller template id")
    emit.add_argument("--template-dir", type=Path, help="extra directory of *.j2 templates")

    parser = argparse.ArgumentParser(prog="xdnp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="parse and validate a policy")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("compile", parents=[common, emit], help="emit controller source or flow table")
    p.add_argument("--out", type=Path, help="output path (default: <name><ext> in the working dir)")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("stats", parents=[common, emit], help="print size metrics without writing")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("eval", parents=[common], help="evaluate one packet")
    p.add_argument("--packet", required=True, help="src=IP,dst=IP,sport=N,dport=N")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("simulate", parents=[common], help="pingall on one switch with N hosts")
    p.add_argument("--hosts", type=int, default=3)
    p.add_argument("--json", action="store_true", help="print the report as JSON")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse uses 2 for usage errors; 2 is reserved for I/O here.
        return EXIT_DIAGNOSTICS if exc.code else EXIT_OK
    cfg = CliConfig(
        fail_fast=args.fail_fast,
        default_action=args.default,
        template_dir=getattr(args, "template_dir", None),
        output_path=getattr(args, "out", None),
    )
    try:
        return args.func(args, cfg)
    except _Failure as exc:
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
