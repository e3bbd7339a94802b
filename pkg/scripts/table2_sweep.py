"""Runtime / relative-H2-error table for the bosonic Kitaev chain.

Usage: python scripts/table2_sweep.py [--out results/table2] [--workers 1]
"""

from pathlib import Path

from table1_sweep import ROOT, main

if __name__ == "__main__":
    raise SystemExit(main(ROOT / "configs" / "table2.ini", "results/table2"))
