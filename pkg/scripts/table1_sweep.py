"""Runtime / relative-H2-error table for the oscillator chain.

Usage: python scripts/table1_sweep.py [--out results/table1] [--workers 1]
"""

import argparse
import csv
from pathlib import Path

from qirka.cli import cmd_sweep, load_config

ROOT = Path(__file__).resolve().parents[1]


def main(config=ROOT / "configs" / "table1.ini", default_out="results/table1"):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=default_out)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    reports = cmd_sweep(load_config(config, args.out), args.out, args.workers)
    failed = [r for r in reports if r.error_code]
    with open(Path(args.out) / "table.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    print(f"{'n':>4} {'m':>2} {'r':>3} | {'T_hom':>8} {'E_hom':>9} | {'T_het':>8} {'E_het':>9}")
    for row in rows:
        print(
            f"{row['n']:>4} {row['m']:>2} {row['r']:>3} | "
            f"{float(row['T_hom']):8.3f} {float(row['E_hom']):9.2e} | "
            f"{float(row['T_het']):8.3f} {float(row['E_het']):9.2e}"
        )
    for r in failed:
        print(f"failed: {r.name} [{r.error_code}] {r.error_message}")
    print(f"wrote {Path(args.out) / 'sweep.csv'} and {Path(args.out) / 'table.csv'}")
    return 1 if failed else 0


if __name__ == "__main__":
    raise SystemExit(main())
