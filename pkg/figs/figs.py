#!/usr/bin/env python3
"""Render latmaj benchmark CSVs: figs.py --csv results.csv --figure thermal_spectrum --out fig5.png"""

import sys

from latmajfigs.cli import main

if __name__ == "__main__":
    sys.exit(main())
