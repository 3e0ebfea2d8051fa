"""Trained policy container and its ``policy-v1`` JSON file format."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from ..errors import ContractError, SchemaVersionError
from .data import NormStats
from .mlp import layer_sizes, mlp_forward

POLICY_SCHEMA = "policy-v1"


@dataclass
class PolicyBundle:
    params: dict[str, np.ndarray]
    norm: NormStats
    config: "PolicyConfig"  # noqa: F821
    n_joints: int = 4

    def __post_init__(self):
        sizes = layer_sizes(self.params)
        H = self.config.history_len
        if sizes[0] != H * self.n_joints + 1 or sizes[-1] != self.n_joints:
            raise ContractError(f"layer sizes {sizes} inconsistent with H={H}, J={self.n_joints}")
        for k, v in self.params.items():
            if not np.all(np.isfinite(v)):
                raise ContractError(f"parameter {k} is not finite")

    @property
    def history_len(self) -> int:
        return self.config.history_len

    def features(self, history: np.ndarray, distance_m: float) -> np.ndarray:
        h = np.asarray(history, dtype=float)
        if h.shape != (self.history_len, self.n_joints):
            raise ContractError(f"history must be ({self.history_len}, {self.n_joints}), got {h.shape}")
        return np.append(h.ravel(), self.config.distance_scale * distance_m)

    def predict(self, history: np.ndarray, distance_m: float) -> np.ndarray:
        """Next absolute joint configuration given the last H configurations."""
        xn = self.norm.normalize_x(self.features(history, distance_m))
        yn = mlp_forward(self.params, xn, "eval")
        return self.norm.denormalize_y(yn)

    def to_dict(self, provenance: dict | None = None) -> dict:
        doc = {
            "schema": POLICY_SCHEMA,
            "config": asdict(self.config),
            "n_joints": self.n_joints,
            "norm": self.norm.to_dict(),
            "weights": {
                k: {"shape": list(v.shape), "data": v.ravel(order="C").tolist()}
                for k, v in self.params.items()
            },
        }
        if provenance:
            doc["provenance"] = provenance
        return doc

    def save(self, path, provenance: dict | None = None) -> None:
        Path(path).write_text(json.dumps(self.to_dict(provenance), separators=(",", ":")))

    @classmethod
    def from_dict(cls, doc: dict) -> "PolicyBundle":
        from .train import PolicyConfig

        if doc.get("schema") != POLICY_SCHEMA:
            raise SchemaVersionError(f"expected schema {POLICY_SCHEMA!r}, got {doc.get('schema')!r}")
        cfg = PolicyConfig(**{**doc["config"], "hidden_sizes": tuple(doc["config"]["hidden_sizes"])})
        params = {
            k: np.asarray(w["data"], dtype=float).reshape(w["shape"])
            for k, w in doc["weights"].items()
        }
        return cls(params, NormStats.from_dict(doc["norm"]), cfg, int(doc.get("n_joints", 4)))

    @classmethod
    def load(cls, path) -> "PolicyBundle":
        return cls.from_dict(json.loads(Path(path).read_text()))
