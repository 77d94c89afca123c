#!/usr/bin/env python3
"""Run the full pipeline for all three decay configurations.

For each bundled config this writes the theory curves, simulates the
synthetic experiment (64 noisy repetitions per sweep point by default),
and renders the population/coherence plots with theory lines and
estimated symbols.

Usage:
    python scripts/reproduce_decay_curves.py [--out DIR] [--noiseless] [--seed N]
"""

import argparse
import sys
from pathlib import Path

from qjsim.cli import main as qjsim_main

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"
SCENARIOS = ("cascade", "lambda", "vee")


def run(argv) -> None:
    rc = qjsim_main(argv)
    if rc != 0:
        sys.exit(rc)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out", help="root output directory")
    ap.add_argument("--noiseless", action="store_true")
    ap.add_argument("--seed", type=int, default=None)
    args = ap.parse_args()

    for name in SCENARIOS:
        config = str(CONFIG_DIR / f"{name}.cfg")
        out = str(Path(args.out) / name)
        print(f"=== {name} ===")
        run(["evolve", "--config", config, "--out", out])
        sim = ["simulate-experiment", "--config", config, "--out", out]
        if args.noiseless:
            sim.append("--noiseless")
        if args.seed is not None:
            sim += ["--seed", str(args.seed)]
        run(sim)
        run(
            [
                "plot",
                str(Path(out) / "theory.csv"),
                str(Path(out) / "estimates.csv"),
                "--out",
                out,
            ]
        )


if __name__ == "__main__":
    main()
