#!/usr/bin/env python3
"""Regenerate the CSV data for every bundled figure configuration."""
import argparse
import time
from pathlib import Path

from mbcool.cli import FIGURES, reproduce


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out-dir", default="figures")
    p.add_argument("--only", nargs="*", choices=FIGURES)
    args = p.parse_args()
    for fig in args.only or FIGURES:
        t0 = time.perf_counter()
        entries = reproduce(fig, Path(args.out_dir) / fig)
        print(f"{fig}: {len(entries)} csv file(s) in {time.perf_counter() - t0:.1f} s")


if __name__ == "__main__":
    main()
