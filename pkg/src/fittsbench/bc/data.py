"""Windowed supervision pairs, z-score statistics and condition-balanced sampling."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ContractError, InsufficientDataError

NORM_EPS = 1e-8


def build_windows(q: np.ndarray, history_len: int, distance_m: float, scale: float = 1.0):
    """Stack (history, next-config) pairs from one (T, J) trajectory.

    Row t of ``X`` is ``[q[t-H], ..., q[t-1]]`` flattened time-major, then
    ``scale * distance_m``; row t of ``Y`` is ``q[t]``. Yields T - H rows.
    """
    q = np.asarray(q, dtype=float)
    T, J = q.shape
    H = int(history_len)
    if H < 1:
        raise ContractError("history_len must be >= 1")
    if T <= H:
        raise InsufficientDataError(f"trajectory of {T} frames too short for history {H}")
    idx = np.arange(H, T)[:, None] - H + np.arange(H)[None, :]
    X = q[idx].reshape(T - H, H * J)
    X = np.hstack([X, np.full((T - H, 1), scale * distance_m)])
    Y = q[H:].copy()
    return X, Y


@dataclass(frozen=True)
class NormStats:
    mu_x: np.ndarray
    sigma_x: np.ndarray
    mu_y: np.ndarray
    sigma_y: np.ndarray
    eps: float = NORM_EPS

    def normalize_x(self, x):
        return (np.asarray(x, dtype=float) - self.mu_x) / (self.sigma_x + self.eps)

    def normalize_y(self, y):
        return (np.asarray(y, dtype=float) - self.mu_y) / (self.sigma_y + self.eps)

    def denormalize_y(self, yn):
        # sigma + eps keeps this the exact inverse of normalize_y
        return np.asarray(yn, dtype=float) * (self.sigma_y + self.eps) + self.mu_y

    def to_dict(self) -> dict:
        return {
            "mu_x": self.mu_x.tolist(),
            "sigma_x": self.sigma_x.tolist(),
            "mu_y": self.mu_y.tolist(),
            "sigma_y": self.sigma_y.tolist(),
            "eps": self.eps,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NormStats":
        return cls(
            np.asarray(d["mu_x"], dtype=float),
            np.asarray(d["sigma_x"], dtype=float),
            np.asarray(d["mu_y"], dtype=float),
            np.asarray(d["sigma_y"], dtype=float),
            float(d.get("eps", NORM_EPS)),
        )


def fit_norm(X, Y) -> NormStats:
    """Per-dimension mean and population standard deviation."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if len(X) < 2 or len(Y) < 2:
        raise InsufficientDataError("need at least 2 pairs to fit normalization")
    return NormStats(X.mean(axis=0), X.std(axis=0), Y.mean(axis=0), Y.std(axis=0))


class WeightedConditionSampler:
    """Sampling with replacement, P(i) proportional to 1 / count(condition of i).

    Every condition therefore receives the same expected number of draws.
    """

    def __init__(self, conditions, seed=None, rng: np.random.Generator | None = None):
        conditions = np.asarray(conditions)
        if conditions.size == 0:
            raise ContractError("sampler needs at least one sample")
        _, inverse, counts = np.unique(conditions, return_inverse=True, return_counts=True)
        if np.any(counts == 0):
            raise ContractError("empty condition")
        w = 1.0 / counts[inverse]
        self.p = w / w.sum()
        self.rng = rng if rng is not None else np.random.default_rng(seed)

    def draw(self, n: int) -> np.ndarray:
        return self.rng.choice(len(self.p), size=n, replace=True, p=self.p)

    def __iter__(self):
        while True:
            yield from self.draw(1024).tolist()


def weighted_condition_sampler(conditions, seed=None):
    """Infinite stream of sample indices balanced across conditions."""
    return iter(WeightedConditionSampler(conditions, seed=seed))
