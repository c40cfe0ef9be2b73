"""Sweep every parameter of the three exponent cases and print label intervals.

    python3 scripts/reproduce_sweeps.py [--points 60] [--out results/sweeps]

Writes one CSV per (mu, parameter) pair plus ``summary.txt``. Intervals are
contiguous same-label runs on the grid, so boundaries are only resolved to
the grid spacing.
"""
from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

from tbplankton.config import BASELINE, BASELINE_INITIAL
from tbplankton.dynamics import SweepSpec, sweep, sweep_csv
from tbplankton.model import State

RANGES = {"alpha": (0.001, 5.0), "lambda": (0.001, 5.0), "beta": (0.001, 5.0), "gamma": (0.001, 3.1)}
SECOND_STUDY = (BASELINE.replace(alpha=1.0, beta=1.2), State(0.5, 0.5))


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=60)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", type=Path, default=Path("results/sweeps"))
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    studies = [("first", BASELINE, BASELINE_INITIAL), ("second", *SECOND_STUDY)]
    lines = []
    for study, base, s0 in studies:
        for mu in (0.0, 0.5, 1.0):
            for name, (lo, hi) in RANGES.items():
                grid = tuple(float(f"{v:.12g}") for v in np.linspace(lo, hi, args.points))
                spec = SweepSpec(base.replace(mu=mu), s0, name, grid)
                result = sweep(spec, workers=args.workers)
                (args.out / f"{study}_mu{mu:g}_{name}.csv").write_text(sweep_csv(result))
                lines.append(f"{study} study, mu = {mu:g}, {name}:")
                for label, a, b, n in result.runs():
                    lines.append(f"    {label:<20} {a:.4g} .. {b:.4g}  ({n})")
                print("\n".join(lines[-len(result.runs()) - 1:]), flush=True)
    (args.out / "summary.txt").write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
