#!/usr/bin/env python3
"""Quick console view of the NMSE-vs-M law without writing any files.

Doubles M a few times and prints the empirical/analytical pair plus the
log2 slope, which should sit at -1 (the 1/(MP) contamination decay).
"""

import argparse

import numpy as np

from mmcell.experiments import fig3_config, run_nmse_sweep


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=500)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--p", type=int, default=10)
    args = parser.parse_args()

    cfg = fig3_config(overrides={"trials": str(args.trials), "seed": str(args.seed)})
    m_grid = [32, 64, 128, 256]
    result = run_nmse_sweep(cfg, m_grid, [args.p])
    emp = result.column("empirical_nmse")
    ana = result.column("analytical_nmse")
    print(f"{'M':>5} {'empirical':>12} {'analytical':>12} {'ratio':>7}")
    for m, e, a in zip(m_grid, emp, ana):
        print(f"{m:>5} {e:>12.4e} {a:>12.4e} {e / a:>7.3f}")
    slope = np.polyfit(np.log2(m_grid), np.log2(emp), 1)[0]
    print(f"log2-slope of empirical NMSE vs M: {slope:+.3f} (expected -1)")
    return 0


if __name__ == "__main__":
    import sys
    sys.exit(main())
