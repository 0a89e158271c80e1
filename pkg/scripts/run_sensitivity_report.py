#!/usr/bin/env python3
"""Sensitivity and usable-range report at the default operating point."""

import pathlib
import sys

from wvfreq.config import ExperimentConfig
from wvfreq.recipes import run_sensitivity, sensitivity_csv, sensitivity_text


def main():
    out_dir = pathlib.Path(__file__).resolve().parent.parent / "results"
    out_dir.mkdir(exist_ok=True)
    report, meta = run_sensitivity(ExperimentConfig())
    out = out_dir / "sensitivity.csv"
    out.write_text(sensitivity_csv(report, meta))
    print(sensitivity_text(report), end="")
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
