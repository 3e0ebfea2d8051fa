"""Open-loop autoregressive rollout of a policy against the kinematic chain.

The policy only ever sees its own predictions. An optional disturbance
model displaces the *executed* configuration (used for forward kinematics
and success checks) without feeding that displacement back to the policy.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, InsufficientWarmstartError, InvalidArgumentError
from .kinematics import KinematicChain, forward_kinematics, horizontal_extension
from .trajectory import PREFERRED_JOINTS, DemoRecord, JointTrajectory


@dataclass
class RolloutConfig:
    success_radius_m: float = 0.01
    sample_rate_hz: float = 50.0
    warm_start_s: float = 0.2
    timeout_factor: int = 2
    timeout_extra_steps: int = 50
    success_rule: str = "radius"  # or "square"
    square_half_width_m: float = 0.01
    disturbance_gain: tuple[float, ...] | None = None
    stop_on_success: bool = True

    def __post_init__(self):
        if self.success_radius_m <= 0 or self.square_half_width_m <= 0:
            raise InvalidArgumentError("success tolerance must be positive")
        if self.success_rule not in ("radius", "square"):
            raise InvalidArgumentError("success_rule must be 'radius' or 'square'")
        if self.disturbance_gain is not None:
            self.disturbance_gain = tuple(float(g) for g in self.disturbance_gain)
            if len(self.disturbance_gain) != 4:
                raise InvalidArgumentError("disturbance_gain needs one gain per joint")

    @property
    def warm_frames(self) -> int:
        return int(round(self.warm_start_s * self.sample_rate_hz))

    def max_steps(self, human_frames: int) -> int:
        return self.timeout_factor * human_frames + self.timeout_extra_steps


@dataclass
class RolloutResult:
    trajectory: JointTrajectory
    tip_path: np.ndarray
    success: bool
    success_step: int | None
    movement_time_s: float | None
    termination: str  # success | timeout | diverged
    steps: int
    max_steps: int
    orbit_steps: int = 0
    warm_frames: int = 0
    tip_error_m: np.ndarray = field(default_factory=lambda: np.zeros(0))


def init_history(demo_q: np.ndarray, warm_start_s: float, history_len: int, rate_hz: float = 50.0) -> np.ndarray:
    """Last ``history_len`` frames of the demo's warm-start window."""
    n_warm = int(round(warm_start_s * rate_hz))
    demo_q = np.asarray(demo_q, dtype=float)
    if n_warm < history_len:
        raise InsufficientWarmstartError(
            f"warm start of {n_warm} frames shorter than history {history_len}"
        )
    if len(demo_q) < n_warm:
        raise InsufficientWarmstartError(
            f"demo has {len(demo_q)} frames, warm start needs {n_warm}"
        )
    return demo_q[n_warm - history_len:n_warm].copy()


def apply_disturbance(chain: KinematicChain, q_hat, gain) -> np.ndarray:
    """Sag model: q = q_hat - gain * extension, extension = horizontal reach fraction."""
    q_hat = np.asarray(q_hat, dtype=float)
    if gain is None:
        return q_hat
    return q_hat - np.asarray(gain, dtype=float) * horizontal_extension(chain, q_hat)


def _inside(tip, target, cfg: RolloutConfig, scale: float = 1.0) -> bool:
    d = tip - target
    if cfg.success_rule == "radius":
        return float(np.sqrt(d @ d)) <= cfg.success_radius_m * scale
    return float(np.max(np.abs(d))) <= cfg.square_half_width_m * scale


class ReplayPolicy:
    """Replays a demonstration frame by frame, ignoring its input.

    Used as an oracle that bypasses the network.
    """

    def __init__(self, demo_q, start_index: int, history_len: int):
        self.q = np.asarray(demo_q, dtype=float)
        self.next_index = start_index
        self.history_len = history_len

    def predict(self, history, distance_m):
        i = min(self.next_index, len(self.q) - 1)
        self.next_index += 1
        return self.q[i].copy()


class ConstantPolicy:
    def __init__(self, q, history_len: int):
        self.q = np.asarray(q, dtype=float)
        self.history_len = history_len

    def predict(self, history, distance_m):
        return self.q.copy()


def rollout(policy, chain: KinematicChain, demo: JointTrajectory, target, config: RolloutConfig | None = None) -> RolloutResult:
    """Run ``policy`` from the demo's warm start until success or timeout.

    ``policy`` needs ``history_len`` and ``predict(history, distance_m)``.
    Step k (1-based) produces frame ``warm_frames + k - 1``; a success at step
    k gives MT = k / sample_rate.
    """
    cfg = config or RolloutConfig()
    target = np.asarray(target, dtype=float)
    if target.shape != (3,) or not np.all(np.isfinite(target)):
        raise ContractError("target must be a finite 3-vector")
    if demo.q.shape[1] != 4:
        raise ContractError("demo must have 4 joints")
    H = policy.history_len
    history = init_history(demo.q, cfg.warm_start_s, H, cfg.sample_rate_hz)
    n_warm = cfg.warm_frames
    frames = [row for row in demo.q[:n_warm]]
    tips = [forward_kinematics(chain, row) for row in frames]
    max_steps = cfg.max_steps(demo.n_frames)

    success_step = None
    termination = "timeout"
    orbit = 0
    steps = 0
    for step in range(1, max_steps + 1):
        q_hat = np.asarray(policy.predict(history, demo.distance_m), dtype=float)
        steps = step
        if not np.all(np.isfinite(q_hat)):
            termination = "diverged"
            break
        q = apply_disturbance(chain, q_hat, cfg.disturbance_gain) if cfg.disturbance_gain is not None else q_hat
        history = np.vstack([history[1:], q_hat])
        tip = forward_kinematics(chain, q)
        frames.append(q)
        tips.append(tip)
        if success_step is None and _inside(tip, target, cfg):
            success_step = step
            if cfg.stop_on_success:
                termination = "success"
                break
        elif success_step is None and _inside(tip, target, cfg, scale=2.0):
            orbit += 1
    if success_step is not None:
        termination = "success"

    q_arr = np.array(frames)
    tip_arr = np.array(tips)
    traj = JointTrajectory(PREFERRED_JOINTS, q_arr, 1.0 / cfg.sample_rate_hz,
                           demo.distance_m, demo.width_m)
    return RolloutResult(
        trajectory=traj,
        tip_path=tip_arr,
        success=success_step is not None,
        success_step=success_step,
        movement_time_s=None if success_step is None else success_step / cfg.sample_rate_hz,
        termination=termination,
        steps=steps,
        max_steps=max_steps,
        orbit_steps=orbit,
        warm_frames=n_warm,
        tip_error_m=np.linalg.norm(tip_arr - target, axis=1),
    )


def rollout_to_demo(result: RolloutResult, extra: dict | None = None) -> DemoRecord:
    """Dump a rollout as a demo-v1 record for replay."""
    traj = result.trajectory
    t = np.arange(traj.n_frames) / (1.0 / traj.dt)
    return DemoRecord(list(traj.joint_names), traj.distance_m, traj.width_m, 1.0 / traj.dt,
                      t, traj.q, dict(extra or {}))
