#!/usr/bin/env python3
"""End-to-end desk-scale experiment: generate a synthetic signature corpus,
train the tiny embedding model, calibrate a threshold on validation pairs,
and report FAR/FRR/accuracy/EER on held-out signers.

Usage: python scripts/run_synth_experiment.py [workdir] [--seed N]
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from airsign.cli import main as airsign


def run(workdir: Path, seed: int) -> int:
    workdir.mkdir(parents=True, exist_ok=True)
    data = workdir / "dataset"
    model = workdir / "model.bin"
    history = workdir / "history.csv"
    report = workdir / "report.json"

    steps = [
        ["synth", "--out", str(data), "--signers", "12", "--genuine", "10",
         "--forged", "10", "--seed", str(seed)],
        ["train", "--data", str(data), "--preset", "tiny", "--out",
         str(model), "--history", str(history), "--seed", str(seed),
         "--epochs", "30"],
        ["eval", "--model", str(model), "--data", str(data), "--seed",
         str(seed), "--split", "test", "--report", str(report)],
    ]
    for step in steps:
        print(f"$ airsign {' '.join(step)}")
        code = airsign(step)
        if code != 0:
            return code
    print(f"\nartifacts under {workdir}: model.bin, history.csv, report.json")
    return 0


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("workdir", nargs="?", default="synth_experiment")
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()
    sys.exit(run(Path(args.workdir), args.seed))
