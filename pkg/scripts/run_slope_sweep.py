#!/usr/bin/env python3
"""Reproduce the deflection-vs-frequency sweep and its fitted slope.

Writes results/slope_sweep.csv and prints the fit summary.
"""

import pathlib
import sys

from wvfreq.config import ExperimentConfig
from wvfreq.recipes import run_slope_sweep, slope_sweep_csv


def main():
    out_dir = pathlib.Path(__file__).resolve().parent.parent / "results"
    out_dir.mkdir(exist_ok=True)
    result = run_slope_sweep(ExperimentConfig())
    out = out_dir / "slope_sweep.csv"
    out.write_text(slope_sweep_csv(result))
    print(f"wrote {out}")
    print(
        f"fitted slope: {result.slope * 1e18:.1f} +- "
        f"{result.slope_error * 1e18:.1f} pm/MHz"
    )
    print(f"amplification factor: {result.amplification:.1f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
