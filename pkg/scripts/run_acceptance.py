#!/usr/bin/env python3
"""Run the acceptance suite from the command line (same as `qmemwit verify`)."""

import argparse
import sys

from qmemwit import acceptance


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--workers", type=int, default=None)
    args = parser.parse_args()
    results = acceptance.run_all(workers=args.workers)
    return 0 if all(r.passed for r in results) else 1


if __name__ == "__main__":
    sys.exit(main())
