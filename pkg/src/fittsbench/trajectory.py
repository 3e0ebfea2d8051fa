"""Demonstration records (``demo-v1`` JSON), joint selection and movement time.

A demo file looks like::

    {"schema": "demo-v1",
     "metadata": {"joint_names": [...], "distance_m": 0.2, "width_m": 0.02,
                  "sample_rate_hz": 50.0},
     "frames": [{"t": 0.0, "positions": {"LeftElbow": 0.1, ...}}, ...]}

``schema`` may be omitted by raw recordings; any other value is rejected.
Extra metadata keys are preserved verbatim.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import (
    DemoParseError,
    DemoValidationError,
    InsufficientDataError,
    MissingJointError,
    OrderingError,
    SchemaVersionError,
)
from .kinematics import joint_speeds

DEMO_SCHEMA = "demo-v1"
PREFERRED_JOINTS = ("LeftShoulderPitch", "LeftShoulderRoll", "LeftShoulderYaw", "LeftElbow")
REPLICA_DISTANCES = (0.20, 0.30, 0.40, 0.50)
_SPACING_TOL = 1e-6


@dataclass
class DemoRecord:
    joint_names: list[str]
    distance_m: float
    width_m: float
    sample_rate_hz: float
    t: np.ndarray
    positions: np.ndarray  # (T, len(joint_names)), radians
    extra: dict[str, Any] = field(default_factory=dict)

    @property
    def n_frames(self) -> int:
        return len(self.t)

    def to_dict(self) -> dict:
        meta = {
            "joint_names": list(self.joint_names),
            "distance_m": float(self.distance_m),
            "width_m": float(self.width_m),
            "sample_rate_hz": float(self.sample_rate_hz),
        }
        meta.update(self.extra)
        frames = [
            {"t": float(ti), "positions": {n: float(v) for n, v in zip(self.joint_names, row)}}
            for ti, row in zip(self.t, self.positions)
        ]
        return {"schema": DEMO_SCHEMA, "metadata": meta, "frames": frames}

    def to_json(self) -> bytes:
        return json.dumps(self.to_dict(), separators=(",", ":")).encode("utf-8")


@dataclass
class JointTrajectory:
    joint_names: tuple[str, ...]
    q: np.ndarray  # (T, 4)
    dt: float
    distance_m: float
    width_m: float
    t: np.ndarray | None = None

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=float)
        if self.t is None:
            self.t = np.arange(len(self.q)) * self.dt
        if self.q.ndim != 2 or len(self.q) < 2:
            raise InsufficientDataError("trajectory needs at least 2 frames")
        if not np.all(np.isfinite(self.q)):
            raise DemoValidationError("trajectory contains non-finite values", field="q")

    @property
    def n_frames(self) -> int:
        return len(self.q)


def _require(d: dict, key: str, where: str):
    if key not in d:
        raise DemoValidationError(f"{where}: missing field {key!r}", field=f"{where}.{key}")
    return d[key]


def _number(value, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise DemoValidationError(f"{name} must be a number, got {value!r}", field=name)
    v = float(value)
    if not np.isfinite(v):
        raise DemoValidationError(f"{name} is not finite", field=name)
    return v


def demo_from_dict(doc: Any, paper_replica: bool = False) -> DemoRecord:
    if not isinstance(doc, dict):
        raise DemoValidationError("top level must be an object", field="$")
    schema = doc.get("schema", DEMO_SCHEMA)
    if schema != DEMO_SCHEMA:
        raise SchemaVersionError(f"expected schema {DEMO_SCHEMA!r}, got {schema!r}")
    meta = _require(doc, "metadata", "$")
    frames = _require(doc, "frames", "$")
    if not isinstance(meta, dict):
        raise DemoValidationError("metadata must be an object", field="metadata")
    names = _require(meta, "joint_names", "metadata")
    if not isinstance(names, list) or not all(isinstance(n, str) for n in names) or not names:
        raise DemoValidationError("joint_names must be a non-empty list of strings", field="metadata.joint_names")
    if len(set(names)) != len(names):
        raise DemoValidationError("joint_names contains duplicates", field="metadata.joint_names")
    distance = _number(_require(meta, "distance_m", "metadata"), "metadata.distance_m")
    width = _number(_require(meta, "width_m", "metadata"), "metadata.width_m")
    rate = _number(_require(meta, "sample_rate_hz", "metadata"), "metadata.sample_rate_hz")
    if distance <= 0:
        raise DemoValidationError("distance_m must be positive", field="metadata.distance_m")
    if paper_replica and not any(abs(distance - d) < 1e-9 for d in REPLICA_DISTANCES):
        raise DemoValidationError(f"distance_m {distance} not a replica condition", field="metadata.distance_m")
    if width <= 0:
        raise DemoValidationError("width_m must be positive", field="metadata.width_m")
    if rate <= 0:
        raise DemoValidationError("sample_rate_hz must be positive", field="metadata.sample_rate_hz")
    if not isinstance(frames, list) or not frames:
        raise DemoValidationError("frames must be a non-empty list", field="frames")

    t = np.empty(len(frames))
    pos = np.empty((len(frames), len(names)))
    for i, fr in enumerate(frames):
        where = f"frames[{i}]"
        if not isinstance(fr, dict):
            raise DemoValidationError(f"{where} must be an object", field=where)
        t[i] = _number(_require(fr, "t", where), f"{where}.t")
        p = _require(fr, "positions", where)
        if not isinstance(p, dict):
            raise DemoValidationError(f"{where}.positions must be an object", field=f"{where}.positions")
        for j, name in enumerate(names):
            if name not in p:
                raise DemoValidationError(
                    f"frame {i} is missing joint {name!r}", field=f"{where}.positions.{name}"
                )
            pos[i, j] = _number(p[name], f"{where}.positions.{name}")

    if len(t) > 1:
        steps = np.diff(t)
        bad = np.flatnonzero(steps <= 0)
        if bad.size:
            raise OrderingError(f"timestamps not strictly increasing at frame {bad[0] + 1}", field="frames.t")
        off = np.flatnonzero(np.abs(steps - 1.0 / rate) > _SPACING_TOL)
        if off.size:
            raise OrderingError(
                f"frame spacing at frame {off[0] + 1} deviates from 1/{rate:g} s", field="frames.t"
            )
    extra = {k: v for k, v in meta.items() if k not in ("joint_names", "distance_m", "width_m", "sample_rate_hz")}
    return DemoRecord(list(names), distance, width, rate, t, pos, extra)


def parse_demo(data: bytes | str, paper_replica: bool = False) -> DemoRecord:
    """Parse and validate one demo-v1 JSON document."""
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise DemoParseError("input is not valid UTF-8", offset=exc.start) from exc
    else:
        text = data
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        offset = len(text[: exc.pos].encode("utf-8"))
        raise DemoParseError(f"malformed JSON: {exc.msg}", offset=offset) from exc
    return demo_from_dict(doc, paper_replica=paper_replica)


def select_joints(record: DemoRecord, preferred=PREFERRED_JOINTS) -> JointTrajectory:
    """Reorder to the canonical arm joints and drop everything else."""
    missing = [n for n in preferred if n not in record.joint_names]
    if missing:
        raise MissingJointError(missing)
    cols = [record.joint_names.index(n) for n in preferred]
    return JointTrajectory(
        joint_names=tuple(preferred),
        q=record.positions[:, cols].copy(),
        dt=1.0 / record.sample_rate_hz,
        distance_m=record.distance_m,
        width_m=record.width_m,
        t=record.t.copy(),
    )


def moving_average(x: np.ndarray, n: int = 5) -> np.ndarray:
    return np.convolve(x, np.ones(n) / n, mode="same")


def extract_movement_time(
    traj: JointTrajectory,
    threshold_rad_s: float = 0.05,
    norm: str = "l2",
    smooth: bool = False,
) -> float | None:
    """Time between the first and last frame whose joint speed exceeds the threshold.

    Returns ``None`` when the speed never exceeds ``threshold_rad_s``.
    With ``smooth`` a 5-sample moving average is applied to the speed first.
    """
    if traj.n_frames < 3:
        raise InsufficientDataError("movement time needs at least 3 frames")
    speed = joint_speeds(traj.q, traj.dt, norm)
    if smooth:
        speed = moving_average(speed)
    above = np.flatnonzero(speed > threshold_rad_s)
    if above.size == 0:
        return None
    return float(traj.t[above[-1]] - traj.t[above[0]])
