#!/usr/bin/env python3
"""Headline ring8 comparison: manifold matching versus the GAN alone.

Trains two arms per seed with shared settings (rbf kernel matcher plus
correlation penalty; plain adversarial baseline) and reports per-arm
medians of mode coverage and high-quality fraction at the final step.
Run directories land under --out (default: ring8-runs).
"""
import argparse
import csv
import statistics
import sys
from pathlib import Path

from mmgan.cli import main as mmgan


def final_row(run_dir: Path) -> dict:
    with open(run_dir / "metrics.csv", newline="") as f:
        return list(csv.DictReader(f))[-1]


def train_arm(out_root: Path, arm: str, seed: int, steps: int) -> dict:
    out = out_root / f"{arm}-s{seed}"
    flags = ["train", "--dataset", "ring8", "--steps", str(steps),
             "--seed", str(seed), "--out", str(out)]
    if arm == "rbf":
        flags += ["--kernel", "rbf", "--alpha", "1", "--beta", "1",
                  "--delta", "0.9"]
    else:
        flags += ["--baseline"]
    code = mmgan(flags)
    if code != 0:
        sys.exit(f"{arm} seed {seed} exited {code}")
    return final_row(out)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--steps", type=int, default=20000)
    ap.add_argument("--out", default="ring8-runs")
    args = ap.parse_args()

    out_root = Path(args.out)
    print(f"arm      seed  modes  hq_fraction")
    results = {"rbf": [], "baseline": []}
    for arm in ("rbf", "baseline"):
        for seed in range(args.seeds):
            row = train_arm(out_root, arm, seed, args.steps)
            results[arm].append((int(row["modes_covered"]),
                                 float(row["hq_fraction"])))
            print(f"{arm:<8} {seed:>4}  {row['modes_covered']:>5}  "
                  f"{float(row['hq_fraction']):.3f}")

    print()
    for arm, rows in results.items():
        modes = statistics.median(m for m, _ in rows)
        hq = statistics.median(h for _, h in rows)
        print(f"{arm:<8} median modes {modes:g}  median hq {hq:.3f}")


if __name__ == "__main__":
    main()
