#!/usr/bin/env python3
"""Run the full verification suite with the default fixture ensemble.

Equivalent to `modlab verify`; any CLI flag is passed through, e.g.

    python scripts/run_verify.py --trials 10 --out out/quick
    python scripts/run_verify.py --model abelian --factor-size 6 --suite modular
"""

import sys

from modlab.cli import main

if __name__ == "__main__":
    sys.exit(main(["verify", *sys.argv[1:]]))
