"""Run every CLI experiment on the default config, one output directory each.

    python3 scripts/run_all_experiments.py [--out results] [--only decay,thermo]
"""
import argparse
import sys
import time
from pathlib import Path

from rhf_yukawa.cli import EXPERIMENTS, main

CONFIG = Path(__file__).resolve().parents[1] / "configs" / "default.ini"


def run():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results")
    ap.add_argument("--only", default="", help="comma-separated experiment names")
    ap.add_argument("--config", default=str(CONFIG))
    args = ap.parse_args()
    names = [n for n in args.only.split(",") if n] or list(EXPERIMENTS)
    failed = []
    for name in names:
        start = time.perf_counter()
        code = main(["run", args.config, "--set", f"experiment.name={name}",
                     "--set", f"output.directory={Path(args.out).resolve() / name}"])
        print(f"{name:14s} exit {code}  {time.perf_counter() - start:6.1f}s", file=sys.stderr)
        if code:
            failed.append(name)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(run())
