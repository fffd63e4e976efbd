#!/usr/bin/env python3
"""Independent counts over netlist text, used to freeze expected values.

For each file prints: name, flop declarations (DFF and SDFF lines), and fault
sites (one per gate input pin plus one per gate output, plus D and Q of each
flop). Works on the raw text with regular expressions only.
"""
import re
import sys

STMT = re.compile(r"^\s*([A-Za-z_][\w.\[\]]*)\s*=\s*([A-Za-z0-9]+)\s*\((.*)\)\s*$")


def count(text):
    flops = 0
    sites = 0
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        m = STMT.match(line)
        if not m:
            continue
        kind = m.group(2).upper()
        if kind in ("DFF", "SDFF"):
            flops += 1
            sites += 2
        else:
            arity = len([a for a in m.group(3).split(",") if a.strip()])
            sites += arity + 1
    return flops, sites


def main(paths):
    for path in paths:
        with open(path, encoding="utf-8") as f:
            flops, sites = count(f.read())
        name = path.rsplit("/", 1)[-1].rsplit(".", 1)[0]
        print(f"{name} flops={flops} sites={sites} faults={2 * sites}")


if __name__ == "__main__":
    main(sys.argv[1:])
