"""Per-trial movement-time records and their CSV format."""
from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .errors import BenchError, InvalidArgumentError
from .stats.fitts import index_of_difficulty
from .trajectory import DemoRecord, extract_movement_time, select_joints

log = logging.getLogger(__name__)

METRIC_COLUMNS = ("trial_id", "source", "distance_m", "width_m", "id_bits", "mt_s", "success")
SOURCES = ("human", "policy")


@dataclass(frozen=True)
class TrialMetric:
    trial_id: str
    source: str
    distance_m: float
    width_m: float
    movement_time_s: float | None
    success: bool

    def __post_init__(self):
        if self.source not in SOURCES:
            raise InvalidArgumentError(f"source must be one of {SOURCES}, got {self.source!r}")
        if self.success and not (self.movement_time_s is not None and self.movement_time_s > 0):
            raise InvalidArgumentError(f"{self.trial_id}: successful trial needs MT > 0")

    @property
    def id_bits(self) -> float:
        return index_of_difficulty(self.distance_m, self.width_m)


def provenance_line(config_hash: str | None, seed: int | None) -> str:
    return f"# config_hash={config_hash} seed={seed}\n"


def write_metrics_csv(path, trials: Iterable[TrialMetric], config_hash=None, seed=None) -> None:
    buf = io.StringIO()
    if config_hash is not None:
        buf.write(provenance_line(config_hash, seed))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(METRIC_COLUMNS)
    for tr in trials:
        w.writerow([
            tr.trial_id,
            tr.source,
            repr(float(tr.distance_m)),
            repr(float(tr.width_m)),
            repr(tr.id_bits),
            "" if tr.movement_time_s is None else repr(float(tr.movement_time_s)),
            int(tr.success),
        ])
    Path(path).write_text(buf.getvalue())


def read_metrics_csv(path) -> list[TrialMetric]:
    lines = [ln for ln in Path(path).read_text().splitlines() if not ln.startswith("#")]
    reader = csv.DictReader(lines)
    if tuple(reader.fieldnames or ()) != METRIC_COLUMNS:
        raise BenchError(f"{path}: unexpected metric columns {reader.fieldnames}")
    out = []
    for row in reader:
        out.append(TrialMetric(
            trial_id=row["trial_id"],
            source=row["source"],
            distance_m=float(row["distance_m"]),
            width_m=float(row["width_m"]),
            movement_time_s=float(row["mt_s"]) if row["mt_s"] else None,
            success=row["success"] == "1",
        ))
    return out


def human_metric(
    record: DemoRecord,
    trial_id: str,
    threshold_rad_s: float = 0.05,
    norm: str = "l2",
    smooth: bool = False,
) -> tuple[TrialMetric | None, str | None]:
    """Movement time of one demonstration.

    Returns ``(metric, None)`` or ``(None, reason_code)`` for a discarded trial.
    """
    try:
        traj = select_joints(record)
        mt = extract_movement_time(traj, threshold_rad_s, norm=norm, smooth=smooth)
    except BenchError as exc:
        return None, exc.code
    if mt is None or mt <= 0:
        return None, "no-movement"
    return TrialMetric(trial_id, "human", record.distance_m, record.width_m, mt, True), None
