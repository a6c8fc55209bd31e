#!/usr/bin/env python3
"""Error-floor study: per-user analytic BER vs common transmit power.

With equal per-user power the later SIC stages inherit residual
interference that grows with power, so every user's BER saturates.
This script tabulates the curves for a config at several antenna
counts to show where the floors sit.

Usage:
    python scripts/floor_study.py --config configs/qpsk3_near_far.json
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from nomalab.analytic import ber_user
from nomalab.config import build_model, load_config, sweep_grid
from nomalab.detectors import SystemModel


def floor_table(model: SystemModel, grid, mode: str):
    rows = []
    for off in grid:
        m = model.scaled(off)
        rows.append([off] + [ber_user(m, k, mode) for k in range(1, m.k + 1)])
    return rows


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default="configs/qpsk3_near_far.json")
    ap.add_argument("--antennas", type=int, nargs="+", default=[1, 2, 4])
    args = ap.parse_args()

    cfg = load_config(args.config)
    base = build_model(cfg)
    grid = sweep_grid(cfg)

    for n in args.antennas:
        model = SystemModel(n, base.noise_sigma, base.users)
        rows = floor_table(model, grid, cfg.analytic.mode)
        print(f"\nN = {n} antennas")
        header = "power_db " + " ".join(f"user{k}" for k in range(1, model.k + 1))
        print(header)
        for row in rows:
            print(f"{row[0]:8.1f} " + " ".join(f"{b:.3e}" for b in row[1:]))
        top = rows[-1][1:]
        print("floor at top of range: " + ", ".join(f"{b:.2e}" for b in top))
    return 0


if __name__ == "__main__":
    sys.exit(main())
