#!/usr/bin/env python3
"""Re-run the single-switch pingall experiment and the XML-vs-Java size
comparison on the bundled demo policy.

    python scripts/reproduce_experiment.py [--hosts N] [--policy FILE]
"""

import argparse

import xdnp
from xdnp.analyzer import compile_policy
from xdnp.codegen import emit_controller_source, measure
from xdnp.netsim import Topology, pingall
from xdnp.parser import parse_file

# Reported figures: 33% pingall loss; 18-line XML vs 147-line Java (1 KB vs 5 KB).
REPORTED = {"loss_pct": 33, "xml_lines": 18, "java_lines": 147, "xml_kb": 1, "java_kb": 5}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--hosts", type=int, default=3)
    ap.add_argument("--policy", default=str(xdnp.demo_path()))
    args = ap.parse_args()

    policy = parse_file(args.policy)
    cp = compile_policy(policy)
    report = pingall(Topology.single(args.hosts), cp)
    print(f"pingall over 1 switch, {args.hosts} hosts:")
    print(report.render())
    print(f"switch: packet_ins={report.stats.packet_ins} table_hits={report.stats.table_hits}")
    print(f"reported loss: {REPORTED['loss_pct']}%")
    print()

    with open(args.policy, encoding="utf-8") as fh:
        source = fh.read()
    m = measure(source, emit_controller_source(cp, "floodlight"))
    print(f"{'':12}{'lines':>8}{'KB':>8}{'reported lines':>16}{'reported KB':>13}")
    print(f"{'XML':12}{m.input_lines:>8}{m.input_bytes / 1024:>8.1f}"
          f"{REPORTED['xml_lines']:>16}{REPORTED['xml_kb']:>13}")
    print(f"{'Java':12}{m.output_lines:>8}{m.output_bytes / 1024:>8.1f}"
          f"{REPORTED['java_lines']:>16}{REPORTED['java_kb']:>13}")
    print(f"line ratio {float(m.line_ratio):.2f} (reported {REPORTED['java_lines'] / REPORTED['xml_lines']:.2f}), "
          f"byte ratio {float(m.byte_ratio):.2f} (reported {REPORTED['java_kb'] / REPORTED['xml_kb']:.2f})")


if __name__ == "__main__":
    main()
