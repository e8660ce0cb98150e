#!/usr/bin/env python3
"""Sweep the top-circle offset of the unit annulus problem and tabulate the
tilt angle, the worst diameter-bound margin and the life-time bound.

Usage: python3 scripts/offset_sweep.py [outdir]
"""

import sys

from mintube import cli


def main() -> int:
    outdir = sys.argv[1] if len(sys.argv) > 1 else "sweep_out"
    offsets = ["0.0", "0.1", "0.2", "0.3", "0.4", "0.5"]
    return cli.main(["sweep", "--res", "96x48", "--levels", "5",
                     "--offsets", *offsets, "--outdir", outdir])


if __name__ == "__main__":
    raise SystemExit(main())
