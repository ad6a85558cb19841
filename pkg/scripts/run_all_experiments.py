#!/usr/bin/env python3
"""Run every CLI experiment with the shipped configs into one results tree.

The per-experiment subdirectories under --out are exactly what the plotting
frontend consumes (frontend/: `render --in <out> --out figs`).
"""

import argparse
import subprocess
import sys
from pathlib import Path

EXPERIMENTS = ["exact", "scaling", "tails", "correlations", "relaxation",
               "coupling", "moments", "area"]
CONFIG_FOR = {"exact": "canonical_n6", "coupling": "coupling"}
COMMAND_FOR = {"coupling": "couple"}


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default="results")
    parser.add_argument("--seed", type=int, default=2024)
    parser.add_argument("--only", nargs="*", default=None)
    args = parser.parse_args()

    repo = Path(__file__).resolve().parents[1]
    out_root = Path(args.out)
    todo = args.only or EXPERIMENTS
    for name in todo:
        cfg = repo / "configs" / f"{CONFIG_FOR.get(name, name)}.json"
        cmd = [sys.executable, "-m", "prewet.cli", COMMAND_FOR.get(name, name),
               "--config", str(cfg), "--out", str(out_root / name),
               "--seed", str(args.seed)]
        print("::", " ".join(cmd))
        code = subprocess.call(cmd)
        if code != 0:
            return code
    print(f"done; results under {out_root}/")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
