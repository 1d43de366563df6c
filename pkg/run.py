"""
Runner script.
Runs the juliagasket command line, e.g. `python run.py classify`.
"""
import sys

from juliagasket.cli import main

if __name__ == "__main__":
    sys.exit(main())
