#!/usr/bin/env python3
"""Audit windowed ladder norms against the closed-form exponential bound.

Writes tidy_bounds.csv and prints the fitted log-growth slope per window
next to the bound's rate. Flags pass through, e.g.

    python scripts/tidy_bound_audit.py --trials 25 --out out/tidy
"""

import sys

from modlab.cli import main

if __name__ == "__main__":
    sys.exit(main(["audit-tidy-bound", *sys.argv[1:]]))
