"""
Main entry point for the contact-complexity command line.

This module allows running the CLI as a module:
    python -m contact_complexity
"""

import sys

from .cli import main

if __name__ == "__main__":
    sys.exit(main())
