#!/usr/bin/env python3
"""Reproduce the three headline experiments end to end and render the figures.

Full-scale run (defaults): ~10 minutes on a laptop. Pass --quick for a
smoke-scale pass with reduced trials.
"""

import argparse
import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def run(cmd: list[str]) -> None:
    print("+", " ".join(cmd))
    subprocess.run(cmd, check=True)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=ROOT / "results" / "figures")
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--quick", action="store_true", help="reduced trial counts")
    args = parser.parse_args()

    out = args.out
    trials = {"fig3": "200", "fig4": "100", "fig5": "100"} if args.quick else \
             {"fig3": "2000", "fig4": "500", "fig5": "500"}
    for fig in ("fig3", "fig4", "fig5"):
        run([sys.executable, "-m", "mmcell.cli", fig,
             "--seed", str(args.seed), "--trials", trials[fig], "--out", str(out)])
        run([sys.executable, str(ROOT / "plots" / "plots.py"),
             "--kind", fig, "--in", str(out / f"{fig}.csv"),
             "--out", str(out / f"{fig}.pdf")])
    print(f"CSVs and figures in {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
