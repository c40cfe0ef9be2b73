"""Emit time-series and orbit tables for the six phase-portrait figures.

    python3 scripts/figure_data.py [--out results/figures]

Each figure gets ``<name>_timeseries.csv`` (t,x,y) and ``<name>_orbit.csv``
(x,y). Plotting is left to whatever tool reads CSV.
"""
from __future__ import annotations

import argparse
import json
from pathlib import Path

from tbplankton.config import BASELINE, BASELINE_INITIAL
from tbplankton.dynamics import classify, phase_portrait_data
from tbplankton.integrate import integrate
from tbplankton.model import State

SECOND = BASELINE.replace(alpha=1.0, beta=1.2)
FIGURES = {
    f"fig{n}{tag}_mu{mu:g}": (base.replace(mu=mu), s0)
    for n, base, s0 in ((1, BASELINE, BASELINE_INITIAL), (2, SECOND, State(0.5, 0.5)))
    for tag, mu in zip("abc", (0.0, 0.5, 1.0))
}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("results/figures"))
    ap.add_argument("--t-end", type=float, default=200.0)
    ap.add_argument("--points", type=int, default=4001)
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    index = {}
    for name, (p, s0) in FIGURES.items():
        traj = integrate(p, s0, args.t_end)
        portrait = phase_portrait_data(traj, args.points)
        (args.out / f"{name}_timeseries.csv").write_text(portrait.time_series_csv())
        (args.out / f"{name}_orbit.csv").write_text(portrait.orbit_csv())
        label = classify(traj, p).kind.value
        index[name] = {"params": p.to_dict(), "initial": [s0.x, s0.y], "label": label, "terminal": traj.terminal.value}
        print(f"{name:<24} {label}")
    (args.out / "index.json").write_text(json.dumps(index, indent=2, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
