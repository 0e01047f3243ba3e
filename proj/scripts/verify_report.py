#!/usr/bin/env python3
"""Re-derive every verdict in an apvar JSON report from its stored numbers.

Reads only the report; exits nonzero if any stored `pass` flag disagrees with
the recorded lhs/cmp/rhs triple, or if a verdict used an unknown comparison.

Usage: verify_report.py report.json [report2.json ...]
"""

import json
import sys

CMP = {
    "<=": lambda a, b: a <= b,
    ">=": lambda a, b: a >= b,
    "<": lambda a, b: a < b,
    ">": lambda a, b: a > b,
}


def check_report(path):
    with open(path) as f:
        report = json.load(f)
    problems = []

    def walk(node, where):
        if isinstance(node, dict):
            for key, value in node.items():
                walk(value, f"{where}.{key}")
        elif isinstance(node, list):
            if where.endswith(".verdicts"):
                for v in node:
                    name = v.get("name", "?")
                    cmp = v.get("cmp")
                    if cmp not in CMP:
                        problems.append(f"{where}:{name}: unknown comparison {cmp!r}")
                        continue
                    rederived = CMP[cmp](v["lhs"], v["rhs"])
                    if rederived != v["pass"]:
                        problems.append(
                            f"{where}:{name}: stored pass={v['pass']} but "
                            f"{v['lhs']} {cmp} {v['rhs']} is {rederived}"
                        )
            else:
                for i, value in enumerate(node):
                    walk(value, f"{where}[{i}]")

    walk(report, path)
    return problems


def main():
    if len(sys.argv) < 2:
        print(__doc__)
        return 2
    bad = 0
    for path in sys.argv[1:]:
        problems = check_report(path)
        if problems:
            bad += 1
            print(f"{path}: {len(problems)} verdict(s) not reproducible")
            for p in problems:
                print(f"  {p}")
        else:
            print(f"{path}: all verdicts reproducible from stored numbers")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
