"""
Universal ternary lattices over real quadratic fields
Main entry point for the command line
"""

import sys

from src.cli.commands import main

if __name__ == "__main__":
    sys.exit(main())
