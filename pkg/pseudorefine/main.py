#!/usr/bin/env python3
"""
PseudoRefine - Mask-Level Pseudo-Label Refinement Toolkit

Main entry point for the pseudorefine command.
"""

import sys

from pseudorefine.core.cli import main

if __name__ == "__main__":
    sys.exit(main())
