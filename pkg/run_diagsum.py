"""
Command-line entry point.

Usage:
    python run_diagsum.py constant --m 2 --n 16 --p 4,4 --s 2
    python run_diagsum.py verify --m 2 --n 4 --p 1,1 --s 1 --trials 100
"""

import sys

from diagsum.cli import run

if __name__ == "__main__":
    sys.exit(run())
