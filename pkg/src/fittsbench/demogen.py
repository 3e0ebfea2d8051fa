"""Synthetic minimum-jerk reaching demonstrations with Fitts-law timing.

Each trial moves the arm along a straight line in joint space,
``start_q + phase(t / MT) * (q_end - start_q)``, where ``q_end`` is chosen so
the pencil tip travels exactly the condition's distance and ``MT`` follows
``a + b * log2(2D/W)`` plus Gaussian noise.
"""
from __future__ import annotations

import csv
import io
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidArgumentError, UnreachableDistanceError, UnwritableOutputError
from .kinematics import KinematicChain, default_chain, forward_kinematics
from .stats.fitts import index_of_difficulty
from .trajectory import PREFERRED_JOINTS, DemoRecord

MANIFEST_COLUMNS = (
    "file", "distance_m", "width_m", "commanded_mt_s", "seed",
    "target_x_m", "target_y_m", "target_z_m",
)
PAPER_DEMO_COUNT = 99
MIN_MT_S = 0.1


@dataclass
class GeneratorConfig:
    fitts_a_s: float = 0.2
    fitts_b_s_per_bit: float = 0.15
    mt_noise_sigma_s: float = 0.05
    distances_m: tuple[float, ...] = (0.20, 0.30, 0.40, 0.50)
    width_m: float = 0.02
    trials_per_condition: int = 25
    start_q: tuple[float, ...] = (0.54, 0.24, 0.28, 1.10)
    displacement_direction: tuple[float, ...] = (0.95, -0.54, 0.53, -0.84)
    seed: int = 0
    paper_replica: bool = False
    frame_noise_sigma_rad: float = 0.0
    pre_pad_s: float = 0.1
    pre_pad_jitter_s: float = 0.0  # extra pre-onset padding drawn per trial from U{0..jitter}
    start_jitter_rad: float = 0.0  # per-trial Gaussian perturbation of start_q
    post_pad_s: float = 0.3
    sample_rate_hz: float = 50.0

    def __post_init__(self):
        self.distances_m = tuple(float(d) for d in self.distances_m)
        self.start_q = tuple(float(v) for v in self.start_q)
        self.displacement_direction = tuple(float(v) for v in self.displacement_direction)
        self.validate()

    def validate(self):
        if self.fitts_a_s < 0:
            raise InvalidArgumentError("fitts_a_s must be >= 0")
        if self.fitts_b_s_per_bit <= 0:
            raise InvalidArgumentError("fitts_b_s_per_bit must be > 0")
        if self.mt_noise_sigma_s < 0 or self.frame_noise_sigma_rad < 0 or self.start_jitter_rad < 0:
            raise InvalidArgumentError("noise sigmas must be >= 0")
        if self.trials_per_condition < 3:
            raise InvalidArgumentError("trials_per_condition must be >= 3 for lack-of-fit replicates")
        if len(self.start_q) != 4 or len(self.displacement_direction) != 4:
            raise InvalidArgumentError("start_q and displacement_direction need 4 entries")
        if not any(self.displacement_direction):
            raise InvalidArgumentError("displacement_direction must be nonzero")
        if self.pre_pad_s < 0 or self.post_pad_s < 0 or self.pre_pad_jitter_s < 0:
            raise InvalidArgumentError("padding must be >= 0")
        if not self.distances_m or min(self.distances_m) <= 0 or self.width_m <= 0:
            raise InvalidArgumentError("distances and width must be positive")


def min_jerk_phase(tau):
    """10 tau^3 - 15 tau^4 + 6 tau^5 for tau in [0, 1]."""
    arr = np.asarray(tau, dtype=float)
    if np.any(~((arr >= 0.0) & (arr <= 1.0))):
        raise InvalidArgumentError("tau must lie in [0, 1]")
    out = arr ** 3 * (10.0 + arr * (-15.0 + 6.0 * arr))
    return float(out) if out.ndim == 0 else out


def min_jerk_speed_factor(tau):
    """d phase / d tau = 30 tau^2 (1 - tau)^2."""
    tau = np.asarray(tau, dtype=float)
    return 30.0 * tau ** 2 * (1.0 - tau) ** 2


def solve_end_config(
    chain: KinematicChain,
    start_q,
    direction,
    distance_m: float,
    tol: float = 1e-9,
    scan_step: float = 0.01,
) -> np.ndarray:
    """Smallest s >= 0 with ``task_distance(start, start + s*direction) == distance_m``.

    The line is scanned in joint-space steps of ``scan_step`` radians to
    bracket the first crossing, which is then refined by bisection.
    """
    start = np.asarray(start_q, dtype=float)
    d = np.asarray(direction, dtype=float)
    if distance_m < 0:
        raise InvalidArgumentError("distance must be non-negative")
    if distance_m == 0:
        return start.copy()
    # largest s keeping every joint inside its limits
    lo_lim, hi_lim = chain.joint_limits[:, 0], chain.joint_limits[:, 1]
    s_max = math.inf
    for qi, di, lo, hi in zip(start, d, lo_lim, hi_lim):
        if di > 0:
            s_max = min(s_max, (hi - qi) / di)
        elif di < 0:
            s_max = min(s_max, (lo - qi) / di)
    if s_max < 0:
        raise InvalidArgumentError("start_q lies outside the joint limits")

    start_tip = forward_kinematics(chain, start)

    def gap(s):
        return float(np.linalg.norm(forward_kinematics(chain, start + s * d) - start_tip)) - distance_m

    step = scan_step / float(np.linalg.norm(d))
    s_lo = 0.0
    while True:
        s_hi = min(s_lo + step, s_max)
        if gap(s_hi) >= 0:
            break
        if s_hi >= s_max:
            raise UnreachableDistanceError(
                f"distance {distance_m} m not reachable along the displacement direction"
            )
        s_lo = s_hi
    for _ in range(200):
        mid = 0.5 * (s_lo + s_hi)
        if gap(mid) >= 0:
            s_hi = mid
        else:
            s_lo = mid
        if s_hi - s_lo < 1e-15:
            break
    q_end = start + s_hi * d
    if abs(gap(s_hi)) > max(tol, 1e-6):
        raise UnreachableDistanceError(f"bisection did not converge for distance {distance_m} m")
    return q_end


def fitts_mt(cfg: GeneratorConfig, distance_m: float) -> float:
    return cfg.fitts_a_s + cfg.fitts_b_s_per_bit * index_of_difficulty(distance_m, cfg.width_m)


def trial_seed(seed: int, condition_index: int, trial_index: int) -> int:
    return int(np.random.SeedSequence([seed, condition_index, trial_index]).generate_state(1)[0])


def demo_filename(distance_m: float, trial_index: int) -> str:
    return f"demo_d{distance_m * 100:g}cm_t{trial_index:02d}.json"


def min_jerk_trajectory(start, end, mt_s: float, pre_pad_s: float, post_pad_s: float,
                        rate_hz: float) -> tuple[np.ndarray, np.ndarray]:
    """Timestamps and (T, J) samples, stationary before onset and after offset."""
    start = np.asarray(start, dtype=float)
    end = np.asarray(end, dtype=float)
    n_pre = int(round(pre_pad_s * rate_hz))
    n_post = int(round(post_pad_s * rate_hz))
    n_move = int(math.ceil(mt_s * rate_hz - 1e-9))
    n = n_pre + n_move + n_post + 1
    k = np.arange(n)
    t = k / rate_hz
    tau = np.clip((k - n_pre) / rate_hz / mt_s, 0.0, 1.0)
    q = start + min_jerk_phase(tau)[:, None] * (end - start)
    return t, q


@dataclass
class _ConditionCache:
    chain: KinematicChain
    cfg: GeneratorConfig
    ends: dict = field(default_factory=dict)

    def end(self, distance_m: float) -> np.ndarray:
        if distance_m not in self.ends:
            self.ends[distance_m] = solve_end_config(
                self.chain, self.cfg.start_q, self.cfg.displacement_direction, distance_m
            )
        return self.ends[distance_m]


def synth_demo(
    cfg: GeneratorConfig,
    condition_index: int,
    trial_index: int,
    chain: KinematicChain | None = None,
    _cache: _ConditionCache | None = None,
) -> DemoRecord:
    """One synthetic demonstration; deterministic in (seed, condition, trial).

    The commanded movement time, per-trial seed, and target tip position are
    stored in the record's extra metadata.
    """
    chain = chain or default_chain()
    cache = _cache or _ConditionCache(chain, cfg)
    distance = cfg.distances_m[condition_index]
    seed = trial_seed(cfg.seed, condition_index, trial_index)
    rng = np.random.default_rng(seed)
    mt = fitts_mt(cfg, distance)
    if cfg.mt_noise_sigma_s > 0:
        while True:
            candidate = mt + rng.normal(0.0, cfg.mt_noise_sigma_s)
            if candidate > MIN_MT_S:
                mt = candidate
                break
    elif mt <= MIN_MT_S:
        raise InvalidArgumentError(f"commanded MT {mt} s must exceed {MIN_MT_S} s")
    start = np.asarray(cfg.start_q, dtype=float)
    if cfg.start_jitter_rad > 0:
        start = start + rng.normal(0.0, cfg.start_jitter_rad, size=4)
        end = solve_end_config(chain, start, cfg.displacement_direction, distance)
    else:
        end = cache.end(distance)
    pre_pad = cfg.pre_pad_s
    if cfg.pre_pad_jitter_s > 0:
        pre_pad += int(rng.integers(0, int(round(cfg.pre_pad_jitter_s * cfg.sample_rate_hz)) + 1)) / cfg.sample_rate_hz
    t, q = min_jerk_trajectory(start, end, mt, pre_pad, cfg.post_pad_s, cfg.sample_rate_hz)
    if cfg.frame_noise_sigma_rad > 0:
        q = q + rng.normal(0.0, cfg.frame_noise_sigma_rad, size=q.shape)
    target = forward_kinematics(chain, end)
    extra = {
        "commanded_mt_s": float(mt),
        "trial_seed": seed,
        "condition_index": condition_index,
        "trial_index": trial_index,
        "target_m": [float(v) for v in target],
    }
    return DemoRecord(list(PREFERRED_JOINTS), distance, cfg.width_m, cfg.sample_rate_hz, t, q, extra)


def _atomic_write(path: Path, data: bytes) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=path.suffix)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except OSError as exc:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise UnwritableOutputError(f"cannot write {path}: {exc}") from exc


def generate_dataset(
    cfg: GeneratorConfig,
    chain: KinematicChain | None = None,
    out_dir=None,
    provenance: dict | None = None,
) -> tuple[list[DemoRecord], list[dict]]:
    """Synthesize the full (condition x trial) grid.

    In paper-replica mode surplus trials beyond 99 are dropped at random.
    When ``out_dir`` is given, one JSON per trial and ``manifest.csv`` are
    written there. ``provenance`` entries are added to every record's metadata.
    """
    chain = chain or default_chain()
    cache = _ConditionCache(chain, cfg)
    records, rows = [], []
    for ci, distance in enumerate(cfg.distances_m):
        for ti in range(cfg.trials_per_condition):
            rec = synth_demo(cfg, ci, ti, chain, cache)
            if provenance:
                rec.extra.update(provenance)
            records.append(rec)
            target = rec.extra["target_m"]
            rows.append({
                "file": demo_filename(distance, ti),
                "distance_m": distance,
                "width_m": cfg.width_m,
                "commanded_mt_s": rec.extra["commanded_mt_s"],
                "seed": rec.extra["trial_seed"],
                "target_x_m": target[0],
                "target_y_m": target[1],
                "target_z_m": target[2],
            })
    if cfg.paper_replica and len(records) > PAPER_DEMO_COUNT:
        rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 99]))
        drop = set(rng.choice(len(records), len(records) - PAPER_DEMO_COUNT, replace=False).tolist())
        records = [r for i, r in enumerate(records) if i not in drop]
        rows = [r for i, r in enumerate(rows) if i not in drop]
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for rec, row in zip(records, rows):
            _atomic_write(out / row["file"], rec.to_json())
        _atomic_write(out / "manifest.csv", manifest_csv(rows, provenance).encode())
    return records, rows


def manifest_csv(rows: list[dict], provenance: dict | None = None) -> str:
    buf = io.StringIO()
    if provenance:
        buf.write(f"# config_hash={provenance.get('config_hash')} seed={provenance.get('seed')}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(MANIFEST_COLUMNS)
    for r in rows:
        w.writerow([r["file"]] + [repr(float(r[c])) if c != "seed" else r[c] for c in MANIFEST_COLUMNS[1:]])
    return buf.getvalue()


def read_manifest(path) -> list[dict]:
    lines = [ln for ln in Path(path).read_text().splitlines() if not ln.startswith("#")]
    rows = []
    for r in csv.DictReader(lines):
        rows.append({
            "file": r["file"],
            "distance_m": float(r["distance_m"]),
            "width_m": float(r["width_m"]),
            "commanded_mt_s": float(r["commanded_mt_s"]),
            "seed": int(r["seed"]),
            "target": np.array([float(r["target_x_m"]), float(r["target_y_m"]), float(r["target_z_m"])]),
        })
    return rows
