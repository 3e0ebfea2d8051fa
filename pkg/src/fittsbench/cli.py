"""``bench`` command line: gen, metrics, train, rollout, analyze, all.

Layout under the configured output directory::

    demos/            demo-v1 JSON files and manifest.csv
    metrics/          human.csv, human_discards.csv, policy.csv, rollouts.csv
    policy/           policy.json (policy-v1) and history.csv
    report/           fits.csv, human.svg, policy.svg, summary.md
    .stamps/          one JSON per stage: input key and output digests

A stage is skipped when its stamp's input key matches the current config
hash and input digests, and every recorded output still has its digest.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .bc.bundle import PolicyBundle
from .bc.train import train
from .config import ExperimentConfig, load_config
from .demogen import _atomic_write, generate_dataset, read_manifest
from .errors import BenchError, MissingInputError, UnwritableOutputError
from .kinematics import forward_kinematics
from .metrics import TrialMetric, human_metric, provenance_line, read_metrics_csv, write_metrics_csv
from .report import fits_csv, fit_source, scatter_svg, summary_markdown
from .rollout import rollout, rollout_to_demo
from .trajectory import parse_demo, select_joints

log = logging.getLogger("fittsbench")

EXIT_CODES = {
    "bench-error": 1,
    "invalid-argument": 2,
    "missing-input": 3,
    "schema-version": 4,
    "unwritable-output": 5,
    "parse-error": 6,
    "validation-error": 6,
    "ordering-error": 6,
    "missing-joint": 6,
    "unreachable-distance": 7,
    "empty-dataset": 8,
    "insufficient-data": 8,
    "insufficient-warmstart": 8,
    "collinear-input": 9,
    "contract-error": 10,
}

STAGES = ("gen", "metrics", "train", "rollout", "analyze")


def _digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write(path: Path, text: str | bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    _atomic_write(path, text.encode() if isinstance(text, str) else text)


class Run:
    """Paths and provenance for one experiment config."""

    def __init__(self, cfg: ExperimentConfig, force: bool = False):
        self.cfg = cfg
        self.root = cfg.output_path
        self.force = force
        self.prov = cfg.provenance()
        self.demos = self.root / "demos"
        self.metrics = self.root / "metrics"
        self.policy = self.root / "policy"
        self.report = self.root / "report"
        self.stamps = self.root / ".stamps"
        try:
            self.root.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise UnwritableOutputError(f"cannot create {self.root}: {exc}") from exc

    @property
    def header(self) -> str:
        return provenance_line(self.prov["config_hash"], self.prov["seed"])

    def demo_files(self) -> list[Path]:
        manifest = self.demos / "manifest.csv"
        if not manifest.is_file():
            raise MissingInputError(f"no demo manifest at {manifest}; run 'bench gen' first")
        return [manifest] + [self.demos / r["file"] for r in read_manifest(manifest)]

    def _key(self, stage: str, inputs: list[Path]) -> str:
        h = hashlib.sha256(f"{stage}:{self.prov['config_hash']}".encode())
        for p in inputs:
            if not p.is_file():
                raise MissingInputError(f"missing input {p}")
            h.update(p.name.encode())
            h.update(_digest(p).encode())
        return h.hexdigest()

    def cached(self, stage: str, inputs: list[Path]) -> bool:
        stamp = self.stamps / f"{stage}.json"
        if self.force or not stamp.is_file():
            return False
        doc = json.loads(stamp.read_text())
        if doc.get("key") != self._key(stage, inputs):
            return False
        for rel, digest in doc.get("outputs", {}).items():
            p = self.root / rel
            if not p.is_file() or _digest(p) != digest:
                return False
        return True

    def stamp(self, stage: str, inputs: list[Path], outputs: list[Path]) -> None:
        doc = {
            "stage": stage,
            "key": self._key(stage, inputs),
            "outputs": {str(p.relative_to(self.root)): _digest(p) for p in sorted(outputs)},
            **self.prov,
        }
        _write(self.stamps / f"{stage}.json", json.dumps(doc, indent=1, sort_keys=True) + "\n")


# stages -------------------------------------------------------------------

def cmd_gen(run: Run) -> str:
    if run.cached("gen", []):
        return "cached"
    cfg = run.cfg
    _, rows = generate_dataset(cfg.generator, cfg.kinematic_chain(), run.demos, run.prov)
    keep = {r["file"] for r in rows} | {"manifest.csv"}
    for stale in run.demos.glob("*.json"):
        if stale.name not in keep:
            stale.unlink()
    run.stamp("gen", [], run.demo_files())
    return "ran"


def _load_demos(run: Run):
    rows = read_manifest(run.demos / "manifest.csv")
    replica = run.cfg.generator.paper_replica
    out = []
    for row in rows:
        path = run.demos / row["file"]
        if not path.is_file():
            raise MissingInputError(f"manifest lists {path} but it does not exist")
        out.append((row, parse_demo(path.read_bytes(), paper_replica=replica)))
    return out


def cmd_metrics(run: Run) -> str:
    inputs = run.demo_files()
    if run.cached("metrics", inputs):
        return "cached"
    a = run.cfg.analysis
    kept, discards = [], []
    for row, rec in _load_demos(run):
        trial_id = Path(row["file"]).stem
        metric, reason = human_metric(rec, trial_id, a.speed_threshold_rad_s, a.speed_norm, run.cfg.smooth_speed)
        if metric is None:
            log.info("discarding %s: %s", trial_id, reason)
            discards.append((trial_id, reason))
        else:
            kept.append(metric)
    human = run.metrics / "human.csv"
    run.metrics.mkdir(parents=True, exist_ok=True)
    write_metrics_csv(human, kept, **run.prov)
    buf = io.StringIO()
    buf.write(run.header)
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["trial_id", "reason"])
    w.writerows(discards)
    _write(run.metrics / "human_discards.csv", buf.getvalue())
    run.stamp("metrics", inputs, [human, run.metrics / "human_discards.csv"])
    return "ran"


def cmd_train(run: Run) -> str:
    inputs = run.demo_files()
    if run.cached("train", inputs):
        return "cached"
    trajs = [select_joints(rec) for _, rec in _load_demos(run)]
    bundle, history = train(trajs, run.cfg.policy)
    run.policy.mkdir(parents=True, exist_ok=True)
    bundle.save(run.policy / "policy.json", provenance=run.prov)
    history.to_csv(run.policy / "history.csv", header_comment=run.header)
    run.stamp("train", inputs, [run.policy / "policy.json", run.policy / "history.csv"])
    return "ran"


def cmd_rollout(run: Run) -> str:
    policy_file = run.policy / "policy.json"
    if not policy_file.is_file():
        raise MissingInputError(f"no policy at {policy_file}; run 'bench train' first")
    inputs = run.demo_files() + [policy_file]
    if run.cached("rollout", inputs):
        return "cached"
    bundle = PolicyBundle.load(policy_file)
    chain = run.cfg.kinematic_chain()
    metrics, diag = [], []
    dump_dir = run.root / "trajectories"
    outputs = []
    for row, rec in _load_demos(run):
        trial_id = Path(row["file"]).stem
        traj = select_joints(rec)
        target = row["target"]
        if not np.all(np.isfinite(target)):
            target = forward_kinematics(chain, traj.q[-1])
        res = rollout(bundle, chain, traj, target, run.cfg.rollout)
        metrics.append(TrialMetric(trial_id, "policy", rec.distance_m, rec.width_m,
                                   res.movement_time_s, res.success))
        diag.append([trial_id, res.termination, res.steps, res.max_steps, res.orbit_steps,
                     repr(float(res.tip_error_m[-1]))])
        if run.cfg.analysis.dump_trajectories:
            p = dump_dir / f"{trial_id}_policy.json"
            _write(p, rollout_to_demo(res, {**run.prov, "source": "policy"}).to_json())
            outputs.append(p)
    out = run.metrics / "policy.csv"
    run.metrics.mkdir(parents=True, exist_ok=True)
    write_metrics_csv(out, metrics, **run.prov)
    buf = io.StringIO()
    buf.write(run.header)
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["trial_id", "termination", "steps", "max_steps", "orbit_steps", "final_tip_error_m"])
    w.writerows(diag)
    _write(run.metrics / "rollouts.csv", buf.getvalue())
    run.stamp("rollout", inputs, [out, run.metrics / "rollouts.csv", *outputs])
    return "ran"


def cmd_analyze(run: Run) -> str:
    human_csv = run.metrics / "human.csv"
    policy_csv = run.metrics / "policy.csv"
    if not human_csv.is_file() and not policy_csv.is_file():
        raise MissingInputError(f"no metric CSVs under {run.metrics}")
    inputs = [p for p in (human_csv, policy_csv) if p.is_file()]
    if run.cached("analyze", inputs):
        return "cached"
    a = run.cfg.analysis
    results = {}
    for source, path in (("human", human_csv), ("policy", policy_csv)):
        if path.is_file():
            results[source] = fit_source(read_metrics_csv(path), a.remove_outliers, a.outlier_k)
    run.report.mkdir(parents=True, exist_ok=True)
    outputs = [run.report / "fits.csv", run.report / "summary.md"]
    _write(outputs[0], run.header + fits_csv(results))
    for source, res in results.items():
        if res.fits.get("fitts") is not None:
            p = run.report / f"{source}.svg"
            _write(p, scatter_svg(res, source, run.prov))
            outputs.append(p)
    _write(outputs[1], summary_markdown(results, run.prov))
    run.stamp("analyze", inputs, outputs)
    return "ran"


COMMANDS = {
    "gen": cmd_gen,
    "metrics": cmd_metrics,
    "train": cmd_train,
    "rollout": cmd_rollout,
    "analyze": cmd_analyze,
}


def cmd_all(run: Run) -> dict[str, str]:
    return {stage: COMMANDS[stage](run) for stage in STAGES}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bench", description="Fitts-law benchmark for behavior-cloned reaching policies.")
    p.add_argument("command", choices=[*STAGES, "all"])
    p.add_argument("--config", help="YAML or JSON experiment config")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config key, e.g. generator.mt_noise_sigma_s=0")
    p.add_argument("--force", action="store_true", help="ignore stage stamps and rerun")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        run = Run(load_config(args.config, args.overrides), force=args.force)
        if args.command == "all":
            status = cmd_all(run)
        else:
            status = {args.command: COMMANDS[args.command](run)}
    except BenchError as exc:
        print(json.dumps({"error": exc.code, "message": str(exc)}), file=sys.stderr)
        return EXIT_CODES.get(exc.code, 1)
    except OSError as exc:
        print(json.dumps({"error": "unwritable-output", "message": str(exc)}), file=sys.stderr)
        return EXIT_CODES["unwritable-output"]
    for stage, state in status.items():
        print(f"{stage}: {state}")
    print(f"output: {run.root}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
