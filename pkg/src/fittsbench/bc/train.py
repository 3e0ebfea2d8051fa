"""Behavior-cloning training loop."""
from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import ContractError, EmptyDatasetError, InsufficientDataError
from .bundle import PolicyBundle
from .data import WeightedConditionSampler, build_windows, fit_norm
from .mlp import init_params, mse, mse_loss_and_grad
from .optim import AdamState, PlateauScheduler, adamw_step, clip_grad_norm

log = logging.getLogger(__name__)


@dataclass
class PolicyConfig:
    history_len: int = 10
    hidden_sizes: tuple[int, ...] = (256, 256)
    dropout: float = 0.0
    learning_rate: float = 1e-3
    weight_decay: float = 1e-6
    grad_clip_norm: float = 1.0
    batch_size: int = 256
    max_epochs: int = 100
    early_stop_patience: int = 10
    plateau_factor: float = 0.5
    plateau_patience: int = 5
    min_lr: float = 1e-6
    val_fraction: float = 0.2
    distance_scale: float = 1.0
    split: str = "window"
    seed: int = 0

    def __post_init__(self):
        self.hidden_sizes = tuple(int(h) for h in self.hidden_sizes)
        if self.history_len < 1:
            raise ContractError("history_len must be >= 1")
        if not 0.0 <= self.dropout < 1.0:
            raise ContractError("dropout must lie in [0, 1)")
        if not 0.0 < self.val_fraction < 1.0:
            raise ContractError("val_fraction must lie in (0, 1)")
        for name in ("learning_rate", "grad_clip_norm", "plateau_factor", "min_lr"):
            if getattr(self, name) <= 0:
                raise ContractError(f"{name} must be > 0")
        if self.weight_decay < 0:
            raise ContractError("weight_decay must be >= 0")
        if self.batch_size < 1 or self.max_epochs < 1:
            raise ContractError("batch_size and max_epochs must be >= 1")
        if self.split not in ("window", "demo"):
            raise ContractError("split must be 'window' or 'demo'")


@dataclass
class TrainingHistory:
    train_loss: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)
    lr: list[float] = field(default_factory=list)
    best_epoch: int = 0
    stopped_epoch: int = 0

    def to_csv(self, path=None, header_comment: str | None = None) -> str:
        buf = io.StringIO()
        if header_comment:
            buf.write(header_comment)
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["epoch", "train_loss", "val_loss", "lr"])
        for i, (tl, vl, lr) in enumerate(zip(self.train_loss, self.val_loss, self.lr)):
            w.writerow([i, repr(tl), repr(vl), repr(lr)])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text


@dataclass
class WindowDataset:
    X: np.ndarray
    Y: np.ndarray
    condition: np.ndarray  # distance of each window
    demo: np.ndarray  # source demo index of each window


def assemble_windows(demos, config: PolicyConfig) -> WindowDataset:
    """Concatenate windows from every usable demo; too-short demos are skipped."""
    Xs, Ys, cs, ds = [], [], [], []
    for i, traj in enumerate(demos):
        try:
            X, Y = build_windows(traj.q, config.history_len, traj.distance_m, config.distance_scale)
        except InsufficientDataError as exc:
            log.warning("skipping demo %d: %s", i, exc)
            continue
        Xs.append(X)
        Ys.append(Y)
        cs.append(np.full(len(X), traj.distance_m))
        ds.append(np.full(len(X), i))
    if not Xs:
        raise EmptyDatasetError("no demonstration long enough for the history window")
    return WindowDataset(np.vstack(Xs), np.vstack(Ys), np.concatenate(cs), np.concatenate(ds))


def split_indices(data: WindowDataset, config: PolicyConfig, rng: np.random.Generator):
    n = len(data.X)
    if config.split == "demo":
        demos = np.unique(data.demo)
        perm = rng.permutation(demos)
        n_val = max(1, int(round(config.val_fraction * len(demos))))
        if n_val >= len(demos):
            raise InsufficientDataError("demo-level split needs at least 2 demos")
        val_demos = perm[:n_val]
        is_val = np.isin(data.demo, val_demos)
        return np.flatnonzero(~is_val), np.flatnonzero(is_val)
    perm = rng.permutation(n)
    n_val = max(1, int(round(config.val_fraction * n)))
    if n_val >= n:
        raise InsufficientDataError("need at least 2 windows to split")
    return np.sort(perm[n_val:]), np.sort(perm[:n_val])


def train(demos, config: PolicyConfig | None = None) -> tuple[PolicyBundle, TrainingHistory]:
    """Fit a behavior-cloning MLP to windowed demonstrations.

    ``demos`` are :class:`~fittsbench.trajectory.JointTrajectory` objects; each
    carries its own ``distance_m`` used as the conditioning feature. The
    returned bundle holds the parameters from the epoch with the lowest
    validation loss.
    """
    config = config or PolicyConfig()
    data = assemble_windows(demos, config)
    ss = np.random.SeedSequence(config.seed)
    rng_split, rng_init, rng_sample, rng_drop = (np.random.default_rng(s) for s in ss.spawn(4))

    tr_idx, va_idx = split_indices(data, config, rng_split)
    norm = fit_norm(data.X[tr_idx], data.Y[tr_idx])
    Xn = norm.normalize_x(data.X)
    Yn = norm.normalize_y(data.Y)
    Xtr, Ytr = Xn[tr_idx], Yn[tr_idx]
    Xva, Yva = Xn[va_idx], Yn[va_idx]

    J = data.Y.shape[1]
    sizes = [data.X.shape[1], *config.hidden_sizes, J]
    params = init_params(sizes, rng_init)
    state = AdamState()
    sampler = WeightedConditionSampler(data.condition[tr_idx], rng=rng_sample)
    sched = PlateauScheduler(config.learning_rate, config.plateau_factor,
                             config.plateau_patience, config.min_lr)
    lr = config.learning_rate
    hist = TrainingHistory()
    best_val, best_params, since_best = np.inf, params, 0

    for epoch in range(config.max_epochs):
        order = sampler.draw(len(tr_idx))
        total = 0.0
        for start in range(0, len(order), config.batch_size):
            b = order[start:start + config.batch_size]
            loss, grads = mse_loss_and_grad(params, Xtr[b], Ytr[b], "train", config.dropout, rng_drop)
            grads = clip_grad_norm(grads, config.grad_clip_norm)
            params, state = adamw_step(params, grads, state, lr, config.weight_decay)
            total += loss * len(b)
        val = mse(params, Xva, Yva)
        if not np.isfinite(val):
            log.warning("validation loss diverged at epoch %d", epoch)
        hist.train_loss.append(total / len(order))
        hist.val_loss.append(val)
        hist.lr.append(lr)
        hist.stopped_epoch = epoch
        if val < best_val:
            best_val, best_params, since_best = val, params, 0
            hist.best_epoch = epoch
        else:
            since_best += 1
            if since_best >= config.early_stop_patience:
                log.info("early stop at epoch %d (best %d)", epoch, hist.best_epoch)
                break
        lr = sched.step(val)

    return PolicyBundle(best_params, norm, config, J), hist
