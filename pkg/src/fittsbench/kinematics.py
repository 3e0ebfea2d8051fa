"""Forward kinematics of the four-joint arm segment and joint-speed helpers.

World frame: x forward, y left, z up, origin at the shoulder unless
``base_pose`` says otherwise. Each joint rotates about its axis and then
translates by its fixed link offset (expressed in the rotated frame).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InsufficientDataError, InvalidArgumentError, UnreachableDistanceError

_EYE3 = np.eye(3)
JOINT_ORDER = ("ShoulderPitch", "ShoulderRoll", "ShoulderYaw", "Elbow")
SAMPLE_RATE_HZ = 50.0


@dataclass(frozen=True)
class Joint:
    name: str
    axis: np.ndarray
    offset: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "axis", np.asarray(self.axis, dtype=float).reshape(3))
        object.__setattr__(self, "offset", np.asarray(self.offset, dtype=float).reshape(3))
        x, y, z = self.axis
        k = np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])
        object.__setattr__(self, "_k", k)
        object.__setattr__(self, "_k2", k @ k)
        object.__setattr__(self, "_k_list", k.tolist())
        object.__setattr__(self, "_k2_list", (k @ k).tolist())
        object.__setattr__(self, "_offset_list", self.offset.tolist())

    @property
    def offset_list(self) -> list[float]:
        return self._offset_list

    def rotation_list(self, angle: float) -> list[list[float]]:
        s, c1 = math.sin(angle), 1.0 - math.cos(angle)
        k, k2 = self._k_list, self._k2_list
        return [[(1.0 if i == j else 0.0) + s * k[i][j] + c1 * k2[i][j] for j in range(3)] for i in range(3)]

    def rotation(self, angle: float) -> np.ndarray:
        return _EYE3 + math.sin(angle) * self._k + (1.0 - math.cos(angle)) * self._k2


@dataclass(frozen=True)
class KinematicChain:
    """Serial chain of exactly four revolute joints plus a rigid tool.

    ``joint_limits`` is a (4, 2) array of [lower, upper] bounds in radians.
    """

    joints: tuple[Joint, ...]
    base_pose: np.ndarray = field(default_factory=lambda: np.eye(4))
    tool_offset: np.ndarray = field(default_factory=lambda: np.zeros(3))
    joint_limits: np.ndarray = field(
        default_factory=lambda: np.tile([-np.pi, np.pi], (4, 1))
    )

    def __post_init__(self):
        object.__setattr__(self, "joints", tuple(self.joints))
        object.__setattr__(self, "base_pose", np.asarray(self.base_pose, dtype=float))
        object.__setattr__(self, "tool_offset", np.asarray(self.tool_offset, dtype=float).reshape(3))
        object.__setattr__(self, "joint_limits", np.asarray(self.joint_limits, dtype=float).reshape(4, 2))
        self.validate()

    def validate(self, min_reach: float = 0.0):
        if len(self.joints) != 4:
            raise InvalidArgumentError(f"chain needs exactly 4 joints, got {len(self.joints)}")
        names = tuple(j.name for j in self.joints)
        if names != JOINT_ORDER:
            raise InvalidArgumentError(f"joint order must be {JOINT_ORDER}, got {names}")
        for j in self.joints:
            if abs(np.linalg.norm(j.axis) - 1.0) > 1e-12:
                raise InvalidArgumentError(f"axis of {j.name} is not unit length")
            if not np.all(np.isfinite(j.offset)):
                raise InvalidArgumentError(f"offset of {j.name} is not finite")
        if self.base_pose.shape != (4, 4) or not np.all(np.isfinite(self.base_pose)):
            raise InvalidArgumentError("base_pose must be a finite 4x4 transform")
        if not np.all(np.isfinite(self.tool_offset)):
            raise InvalidArgumentError("tool_offset is not finite")
        if min_reach > 0 and self.reach <= min_reach:
            raise UnreachableDistanceError(f"total reach {self.reach:.3f} m must exceed {min_reach} m")

    @property
    def reach(self) -> float:
        return float(sum(np.linalg.norm(j.offset) for j in self.joints) + np.linalg.norm(self.tool_offset))

    def to_dict(self) -> dict:
        return {
            "joints": [
                {"name": j.name, "axis": j.axis.tolist(), "offset": j.offset.tolist()}
                for j in self.joints
            ],
            "base_pose": self.base_pose.tolist(),
            "tool_offset": self.tool_offset.tolist(),
            "joint_limits": self.joint_limits.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "KinematicChain":
        joints = [Joint(j["name"], j["axis"], j["offset"]) for j in d["joints"]]
        kw = {}
        for key in ("base_pose", "tool_offset", "joint_limits"):
            if key in d:
                kw[key] = d[key]
        return cls(joints, **kw)


def default_chain() -> KinematicChain:
    """Documented default geometry.

    Upper arm 0.22 m, forearm 0.20 m, pencil 0.15 m along the forearm axis;
    total reach 0.57 m. At q = 0 the arm hangs straight down. Positive
    shoulder pitch and elbow flexion swing the arm forward, positive roll
    abducts it to the left, positive yaw turns it about the vertical.
    """
    return KinematicChain(
        joints=(
            Joint("ShoulderPitch", [0.0, -1.0, 0.0], [0.0, 0.0, 0.0]),
            Joint("ShoulderRoll", [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]),
            Joint("ShoulderYaw", [0.0, 0.0, 1.0], [0.0, 0.0, -0.22]),
            Joint("Elbow", [0.0, -1.0, 0.0], [0.0, 0.0, -0.20]),
        ),
        tool_offset=[0.0, 0.0, -0.15],
    )


def rotation(axis: np.ndarray, angle: float) -> np.ndarray:
    """Rodrigues rotation matrix about a unit axis."""
    x, y, z = axis
    k = np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])
    return np.eye(3) + np.sin(angle) * k + (1.0 - np.cos(angle)) * (k @ k)


def _check_q(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if q.shape != (4,):
        raise InvalidArgumentError(f"joint vector must have 4 entries, got shape {q.shape}")
    if not math.isfinite(q.sum()):
        raise InvalidArgumentError("joint vector contains non-finite values")
    return q


def frame_origins(chain: KinematicChain, q) -> np.ndarray:
    """World positions of the base, each link frame after its offset, and the tip.

    Returns a (6, 3) array: base, after joints 1..4, pencil tip.
    """
    q = _check_q(q).tolist()
    R = chain.base_pose[:3, :3].copy()
    p = chain.base_pose[:3, 3].copy()
    out = [p.copy()]
    for joint, angle in zip(chain.joints, q):
        R = R @ joint.rotation(angle)
        p = p + R @ joint.offset
        out.append(p.copy())
    out.append(p + R @ chain.tool_offset)
    return np.array(out)


def forward_kinematics(chain: KinematicChain, q) -> np.ndarray:
    """World-frame pencil-tip position for joint angles ``q`` (radians)."""
    q = _check_q(q).tolist()
    # scalar arithmetic: small-array numpy overhead dominates at this size
    R = chain.base_pose[:3, :3].tolist()
    p = chain.base_pose[:3, 3].tolist()
    for joint, angle in zip(chain.joints, q):
        R = _matmul3(R, joint.rotation_list(angle))
        p = _add3(p, _matvec3(R, joint.offset_list))
    return np.array(_add3(p, _matvec3(R, chain.tool_offset.tolist())))


def _matmul3(a, b):
    return [[a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j] for j in range(3)] for i in range(3)]


def _matvec3(a, v):
    return [a[i][0] * v[0] + a[i][1] * v[1] + a[i][2] * v[2] for i in range(3)]


def _add3(a, b):
    return [a[0] + b[0], a[1] + b[1], a[2] + b[2]]


def forward_kinematics_batch(chain: KinematicChain, qs) -> np.ndarray:
    qs = np.asarray(qs, dtype=float)
    return np.array([forward_kinematics(chain, q) for q in qs]).reshape(-1, 3)


def task_distance(chain: KinematicChain, q_a, q_b) -> float:
    return float(np.linalg.norm(forward_kinematics(chain, q_a) - forward_kinematics(chain, q_b)))


def joint_speeds(q, dt: float = 1.0 / SAMPLE_RATE_HZ, norm: str = "l2") -> np.ndarray:
    """Per-frame joint speed, rad/s.

    Central differences in the interior, one-sided at both ends. ``norm`` is
    ``"l2"`` (default) or ``"maxabs"``.
    """
    q = np.asarray(q, dtype=float)
    if q.ndim != 2 or q.shape[0] < 2:
        raise InsufficientDataError("need at least 2 frames to differentiate")
    vel = np.gradient(q, dt, axis=0)
    if norm == "l2":
        return np.sqrt(np.sum(vel * vel, axis=1))
    if norm == "maxabs":
        return np.max(np.abs(vel), axis=1)
    raise InvalidArgumentError(f"unknown speed norm {norm!r}")


def joint_speed(traj, index: int, norm: str = "l2") -> float:
    """Speed of ``traj`` (anything with ``.q`` and ``.dt``) at one frame."""
    speeds = joint_speeds(traj.q, traj.dt, norm)
    if not 0 <= index < len(speeds):
        raise InvalidArgumentError(f"index {index} outside [0, {len(speeds)})")
    return float(speeds[index])


def horizontal_extension(chain: KinematicChain, q) -> float:
    """Horizontal distance of the tip from the base origin, as a fraction of reach."""
    tip = forward_kinematics(chain, q)
    base = chain.base_pose[:3, 3]
    return float(min(np.linalg.norm((tip - base)[:2]) / chain.reach, 1.0))


def check_joint_vector(chain: KinematicChain, q: Sequence[float]) -> np.ndarray:
    q = _check_q(q)
    lo, hi = chain.joint_limits[:, 0], chain.joint_limits[:, 1]
    if np.any(q < lo) or np.any(q > hi):
        raise InvalidArgumentError(f"joint vector {q} outside joint limits")
    return q
