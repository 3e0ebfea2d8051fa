"""Experiment configuration: one YAML/JSON file, optional ``key=value`` overrides.

The file holds the blocks ``chain``, ``generator``, ``policy``, ``rollout``,
``analysis`` plus the top-level ``output_dir`` and ``seed``. The global seed
is pushed into the generator and policy blocks so a single number fixes every
random stream. The config hash covers everything except ``output_dir``.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from .bc.train import PolicyConfig
from .demogen import GeneratorConfig
from .errors import InvalidArgumentError, MissingInputError
from .kinematics import KinematicChain, default_chain
from .rollout import RolloutConfig

OUTPUT_ENV = "FITTSBENCH_OUTPUT"


@dataclass
class AnalysisConfig:
    """Switches for the metric extraction and regression stage."""

    remove_outliers: bool = True
    outlier_k: float = 1.5
    success_rule: str = "radius"  # radius | square
    speed_threshold_rad_s: float = 0.05
    speed_norm: str = "l2"
    smooth_speed: bool | None = None  # None: on exactly when frame noise is enabled
    dump_trajectories: bool = False

    def __post_init__(self):
        if self.success_rule not in ("radius", "square"):
            raise InvalidArgumentError("analysis.success_rule must be 'radius' or 'square'")
        if self.speed_norm not in ("l2", "maxabs"):
            raise InvalidArgumentError("analysis.speed_norm must be 'l2' or 'maxabs'")
        if self.outlier_k <= 0 or self.speed_threshold_rad_s <= 0:
            raise InvalidArgumentError("outlier_k and speed threshold must be positive")


@dataclass
class ExperimentConfig:
    chain: dict | None = None  # None selects the default chain
    generator: GeneratorConfig = field(default_factory=GeneratorConfig)
    policy: PolicyConfig = field(default_factory=PolicyConfig)
    rollout: RolloutConfig = field(default_factory=RolloutConfig)
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)
    output_dir: str = "runs/default"
    seed: int = 0

    def __post_init__(self):
        self.generator.seed = self.seed
        self.policy.seed = self.seed
        self.rollout.success_rule = self.analysis.success_rule
        self.validate()

    def kinematic_chain(self) -> KinematicChain:
        return default_chain() if self.chain is None else KinematicChain.from_dict(self.chain)

    def validate(self) -> None:
        chain = self.kinematic_chain()
        chain.validate(min_reach=max(self.generator.distances_m))
        if self.rollout.warm_frames < self.policy.history_len:
            raise InvalidArgumentError(
                f"warm start of {self.rollout.warm_frames} frames is shorter than history {self.policy.history_len}"
            )
        if self.rollout.sample_rate_hz != self.generator.sample_rate_hz:
            raise InvalidArgumentError("rollout and generator sample rates differ")

    @property
    def smooth_speed(self) -> bool:
        if self.analysis.smooth_speed is None:
            return self.generator.frame_noise_sigma_rad > 0
        return self.analysis.smooth_speed

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["chain"] = self.kinematic_chain().to_dict()
        return _plain(d)

    def hash(self) -> str:
        d = self.to_dict()
        d.pop("output_dir")
        blob = json.dumps(d, sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def provenance(self) -> dict:
        return {"config_hash": self.hash(), "seed": self.seed}

    @property
    def output_path(self) -> Path:
        root = os.environ.get(OUTPUT_ENV)
        return Path(root) / self.output_dir if root else Path(self.output_dir)


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if hasattr(obj, "tolist"):
        return obj.tolist()
    return obj


_BLOCKS = {
    "generator": GeneratorConfig,
    "policy": PolicyConfig,
    "rollout": RolloutConfig,
    "analysis": AnalysisConfig,
}


def _build_block(cls, values: dict, name: str):
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = set(values) - known
    if unknown:
        raise InvalidArgumentError(f"unknown keys in {name}: {sorted(unknown)}")
    try:
        return cls(**values)
    except TypeError as exc:
        raise InvalidArgumentError(f"bad {name} block: {exc}") from exc


def config_from_dict(doc: dict) -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise InvalidArgumentError("config must be a mapping")
    allowed = set(_BLOCKS) | {"chain", "output_dir", "seed"}
    unknown = set(doc) - allowed
    if unknown:
        raise InvalidArgumentError(f"unknown config keys: {sorted(unknown)}")
    kw: dict[str, Any] = {}
    for name, cls in _BLOCKS.items():
        block = doc.get(name) or {}
        if not isinstance(block, dict):
            raise InvalidArgumentError(f"{name} must be a mapping")
        block = {k: v for k, v in block.items() if k != "seed"}
        kw[name] = _build_block(cls, block, name)
    if doc.get("chain") is not None:
        kw["chain"] = doc["chain"]
    if "output_dir" in doc:
        kw["output_dir"] = str(doc["output_dir"])
    if "seed" in doc:
        kw["seed"] = int(doc["seed"])
    return ExperimentConfig(**kw)


def apply_override(doc: dict, assignment: str) -> dict:
    """Set a dotted key, e.g. ``generator.mt_noise_sigma_s=0``; values parse as YAML."""
    if "=" not in assignment:
        raise InvalidArgumentError(f"override {assignment!r} is not key=value")
    key, raw = assignment.split("=", 1)
    parts = key.strip().split(".")
    node = doc
    for p in parts[:-1]:
        node = node.setdefault(p, {})
        if not isinstance(node, dict):
            raise InvalidArgumentError(f"cannot set {key}: {p} is not a block")
    node[parts[-1]] = yaml.safe_load(raw)
    return doc


def load_config(path=None, overrides=()) -> ExperimentConfig:
    doc: dict = {}
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise MissingInputError(f"config file not found: {p}")
        try:
            doc = yaml.safe_load(p.read_text()) or {}
        except yaml.YAMLError as exc:
            raise InvalidArgumentError(f"cannot parse {p}: {exc}") from exc
    for item in overrides:
        apply_override(doc, item)
    return config_from_dict(doc)
