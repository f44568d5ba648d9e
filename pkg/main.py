#!/usr/bin/env python3
"""
lpvkit command-line tool

Simulates LPV model files, estimates LPV models from data and runs the unbalanced-disc
identification benchmark. Run `python main.py --help` for the subcommands.
"""

import sys

from lpvkit.cli import main

if __name__ == "__main__":
    sys.exit(main())
