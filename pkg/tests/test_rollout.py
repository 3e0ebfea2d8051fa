import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fittsbench.demogen import GeneratorConfig, synth_demo
from fittsbench.errors import ContractError, InsufficientWarmstartError, InvalidArgumentError
from fittsbench.kinematics import default_chain, forward_kinematics, horizontal_extension
from fittsbench.rollout import (
    ConstantPolicy,
    ReplayPolicy,
    RolloutConfig,
    apply_disturbance,
    init_history,
    rollout,
    rollout_to_demo,
)
from fittsbench.trajectory import parse_demo, select_joints

CHAIN = default_chain()


def demo(condition=1, trial=0, sigma=0.0):
    rec = synth_demo(GeneratorConfig(mt_noise_sigma_s=sigma), condition, trial, CHAIN)
    traj = select_joints(rec)
    return traj, forward_kinematics(CHAIN, traj.q[-1])


class NanPolicy:
    history_len = 10

    def predict(self, history, distance_m):
        return np.full(4, np.nan)


# warm start ---------------------------------------------------------------

def test_history_takes_frames_before_handoff():
    q = np.arange(80, dtype=float).reshape(20, 4)
    np.testing.assert_array_equal(init_history(q, 0.2, 10), q[:10])
    np.testing.assert_array_equal(init_history(q, 0.2, 5), q[5:10])


def test_short_demo_rejected():
    with pytest.raises(InsufficientWarmstartError):
        init_history(np.zeros((5, 4)), 0.2, 10)


def test_history_longer_than_warm_window_rejected():
    with pytest.raises(InsufficientWarmstartError):
        init_history(np.zeros((50, 4)), 0.1, 10)


# termination --------------------------------------------------------------

def test_stationary_policy_times_out_exactly():
    traj, target = demo()
    res = rollout(ConstantPolicy(traj.q[0], 10), CHAIN, traj, target)
    assert res.termination == "timeout" and not res.success
    assert res.steps == res.max_steps == 2 * traj.n_frames + 50
    assert res.movement_time_s is None
    assert res.trajectory.n_frames == 10 + res.max_steps


def test_replay_matches_first_in_radius_frame():
    traj, target = demo(condition=2)
    res = rollout(ReplayPolicy(traj.q, 10, 10), CHAIN, traj, target)
    err = np.linalg.norm(np.array([forward_kinematics(CHAIN, row) for row in traj.q]) - target, axis=1)
    first = int(np.argmax(err[10:] <= 0.01)) + 10
    # step k writes frame warm + k - 1
    assert res.success_step == first - 10 + 1
    assert res.movement_time_s == pytest.approx((first - 9) / 50)
    np.testing.assert_array_equal(res.trajectory.q, traj.q[:first + 1])


def test_success_step_is_first_inside():
    traj, target = demo()
    res = rollout(ReplayPolicy(traj.q, 10, 10), CHAIN, traj, target, RolloutConfig(stop_on_success=False))
    inside = np.flatnonzero(res.tip_error_m[10:] <= 0.01)
    assert res.success_step == inside[0] + 1
    assert res.termination == "success"
    assert res.steps == res.max_steps


def test_nan_prediction_diverges():
    traj, target = demo()
    res = rollout(NanPolicy(), CHAIN, traj, target)
    assert res.termination == "diverged" and res.steps == 1 and not res.success


def test_rollout_is_deterministic():
    traj, target = demo(sigma=0.05, trial=3)
    a = rollout(ReplayPolicy(traj.q, 10, 10), CHAIN, traj, target)
    b = rollout(ReplayPolicy(traj.q, 10, 10), CHAIN, traj, target)
    np.testing.assert_array_equal(a.trajectory.q, b.trajectory.q)
    assert a.success_step == b.success_step


def test_bad_target():
    traj, _ = demo()
    with pytest.raises(ContractError):
        rollout(ConstantPolicy(traj.q[0], 10), CHAIN, traj, np.array([np.nan, 0, 0]))


def test_square_rule_accepts_corner():
    traj, target = demo()
    goal = forward_kinematics(CHAIN, traj.q[0])
    off = goal + np.array([0.009, 0.009, 0.009])  # 1.56 cm away, inside the cube
    cube = rollout(ConstantPolicy(traj.q[0], 10), CHAIN, traj, off, RolloutConfig(success_rule="square"))
    ball = rollout(ConstantPolicy(traj.q[0], 10), CHAIN, traj, off, RolloutConfig())
    assert cube.success and cube.success_step == 1
    assert not ball.success


def test_orbit_counts_near_misses():
    traj, _ = demo()
    tip = forward_kinematics(CHAIN, traj.q[0])
    near = tip + np.array([0.015, 0.0, 0.0])
    res = rollout(ConstantPolicy(traj.q[0], 10), CHAIN, traj, near)
    assert res.orbit_steps == res.max_steps


@settings(max_examples=20, deadline=None)
@given(st.floats(0.0, 0.2), st.integers(0, 3))
def test_timeout_bound(offset, condition):
    traj, target = demo(condition)
    res = rollout(ConstantPolicy(traj.q[0] + offset, 10), CHAIN, traj, target)
    assert res.steps <= 2 * traj.n_frames + 50


# disturbance --------------------------------------------------------------

def test_zero_gain_is_identity():
    q = np.array([0.3, -0.2, 0.1, 0.7])
    np.testing.assert_array_equal(apply_disturbance(CHAIN, q, (0, 0, 0, 0)), q)


def test_full_extension_pitch_sag():
    q = np.array([math.pi / 2, 0.0, 0.0, 0.0])
    assert horizontal_extension(CHAIN, q) == pytest.approx(1.0)
    out = apply_disturbance(CHAIN, q, (0.1, 0, 0, 0))
    assert out[0] == pytest.approx(math.pi / 2 - 0.1)
    np.testing.assert_array_equal(out[1:], q[1:])


def test_zero_gain_rollout_matches_undisturbed():
    traj, target = demo(condition=3)
    a = rollout(ReplayPolicy(traj.q, 10, 10), CHAIN, traj, target, RolloutConfig(disturbance_gain=(0, 0, 0, 0)))
    b = rollout(ReplayPolicy(traj.q, 10, 10), CHAIN, traj, target)
    np.testing.assert_array_equal(a.trajectory.q, b.trajectory.q)
    assert a.success_step == b.success_step


def test_disturbance_sweep_monotone():
    rates = []
    for g in (0.0, 0.005, 0.02, 0.05, 0.1):
        ok = 0
        for c in range(4):
            traj, target = demo(condition=c)
            res = rollout(ReplayPolicy(traj.q, 10, 10), CHAIN, traj, target,
                          RolloutConfig(disturbance_gain=(g, 0, 0, 0)))
            ok += res.success
        rates.append(ok)
    assert rates[0] == 4
    assert all(b <= a for a, b in zip(rates, rates[1:]))
    assert rates[-1] < 4


def test_disturbance_not_fed_back():
    traj, target = demo()
    seen = []

    class Spy(ReplayPolicy):
        def predict(self, history, distance_m):
            seen.append(history[-1].copy())
            return super().predict(history, distance_m)

    rollout(Spy(traj.q, 10, 10), CHAIN, traj, target, RolloutConfig(disturbance_gain=(0.1, 0, 0, 0)))
    np.testing.assert_array_equal(seen[1], traj.q[10])


def test_bad_gain_length():
    with pytest.raises(InvalidArgumentError):
        RolloutConfig(disturbance_gain=(0.1, 0.2))


def test_rollout_dump_parses():
    traj, target = demo()
    res = rollout(ReplayPolicy(traj.q, 10, 10), CHAIN, traj, target)
    rec = parse_demo(rollout_to_demo(res, {"source": "policy"}).to_json())
    np.testing.assert_allclose(rec.positions, res.trajectory.q)
