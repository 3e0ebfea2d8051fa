"""Qualitative stiffness study: success rate and MT under a sagging arm.

The executed pose is q = q_hat - gain * extension(q_hat) on one joint, a
stand-in for a softer position controller. Needs a finished run of the same
config (``bench all``); writes ``report/disturbance.csv`` next to it.

    python scripts/disturbance_sweep.py [--config configs/paper_replica.yaml] [--joint 0]
"""
import argparse
import csv
import dataclasses
import io
from pathlib import Path

import numpy as np

from fittsbench.bc import PolicyBundle
from fittsbench.config import load_config
from fittsbench.demogen import read_manifest
from fittsbench.metrics import provenance_line
from fittsbench.rollout import rollout
from fittsbench.trajectory import PREFERRED_JOINTS, parse_demo, select_joints

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--config", default=str(ROOT / "configs" / "paper_replica.yaml"))
    ap.add_argument("--joint", type=int, default=0, help="index into " + ", ".join(PREFERRED_JOINTS))
    ap.add_argument("--gains", type=float, nargs="+", default=[0.0, 0.01, 0.02, 0.05, 0.1, 0.2])
    args = ap.parse_args()

    cfg = load_config(args.config)
    root = cfg.output_path
    bundle = PolicyBundle.load(root / "policy" / "policy.json")
    chain = cfg.kinematic_chain()
    trials = []
    for row in read_manifest(root / "demos" / "manifest.csv"):
        rec = parse_demo((root / "demos" / row["file"]).read_bytes(), paper_replica=cfg.generator.paper_replica)
        trials.append((select_joints(rec), np.asarray(row["target"])))

    buf = io.StringIO()
    buf.write(provenance_line(cfg.hash(), cfg.seed))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["joint", "gain", "success", "trials", "mean_mt_s"])
    print(f"joint {PREFERRED_JOINTS[args.joint]}")
    print("gain    success   mean MT (s)")
    for g in args.gains:
        gains = [0.0] * 4
        gains[args.joint] = g
        rc = dataclasses.replace(cfg.rollout, disturbance_gain=tuple(gains))
        results = [rollout(bundle, chain, traj, target, rc) for traj, target in trials]
        mts = [r.movement_time_s for r in results if r.success]
        mean_mt = float(np.mean(mts)) if mts else float("nan")
        print(f"{g:<7} {len(mts):>3}/{len(results):<5} {mean_mt:.3f}")
        w.writerow([PREFERRED_JOINTS[args.joint], repr(g), len(mts), len(results), repr(mean_mt)])
    out = root / "report" / "disturbance.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(buf.getvalue())
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
