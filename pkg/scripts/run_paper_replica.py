"""Run the full paper-replica pipeline and print the summary.

    python scripts/run_paper_replica.py [--force] [--set policy.max_epochs=50]

Equivalent to ``bench all --config configs/paper_replica.yaml``; outputs land
under ``$FITTSBENCH_OUTPUT/runs/paper_replica`` (or ``runs/paper_replica``).
"""
import argparse
import sys
import time
from pathlib import Path

from fittsbench.cli import main as bench
from fittsbench.config import load_config

CONFIG = Path(__file__).resolve().parents[1] / "configs" / "paper_replica.yaml"


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--force", action="store_true")
    ap.add_argument("--set", dest="overrides", action="append", default=[])
    args = ap.parse_args()
    argv = ["all", "--config", str(CONFIG)] + [f"--set={o}" for o in args.overrides]
    if args.force:
        argv.append("--force")
    t0 = time.perf_counter()
    code = bench(argv)
    if code:
        return code
    root = load_config(CONFIG, args.overrides).output_path
    print(f"\n{(root / 'report' / 'summary.md').read_text()}")
    print(f"elapsed {time.perf_counter() - t0:.1f} s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
