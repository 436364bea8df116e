#!/usr/bin/env python3
"""Contour-quadrature convergence study.

Writes contour_convergence.csv with per-(k, n) node counts and both the
residue-corrected and uncorrected discrepancies against the spectral oracle.

    python scripts/contour_study.py --trials 5 --out out/contour
"""

import sys

from modlab.cli import main

if __name__ == "__main__":
    sys.exit(main(["contour-study", *sys.argv[1:]]))
