"""Gradient clipping, AdamW and a reduce-on-plateau learning-rate schedule."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ContractError


def global_norm(grads: dict[str, np.ndarray]) -> float:
    return float(np.sqrt(sum(float(np.sum(g * g)) for g in grads.values())))


def clip_grad_norm(grads: dict[str, np.ndarray], max_norm: float) -> dict[str, np.ndarray]:
    """Rescale all gradients together so their global L2 norm is at most ``max_norm``."""
    if max_norm <= 0:
        raise ContractError("max_norm must be positive")
    g = global_norm(grads)
    if g <= max_norm:
        return grads
    scale = max_norm / g
    return {k: v * scale for k, v in grads.items()}


@dataclass
class AdamState:
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)
    t: int = 0


def adamw_step(
    params: dict[str, np.ndarray],
    grads: dict[str, np.ndarray],
    state: AdamState,
    lr: float,
    weight_decay: float,
    betas: tuple[float, float] = (0.9, 0.999),
    eps: float = 1e-8,
) -> tuple[dict[str, np.ndarray], AdamState]:
    """One AdamW update with decoupled weight decay and bias-corrected moments.

    theta <- theta - lr * (m_hat / (sqrt(v_hat) + eps) + weight_decay * theta)
    """
    b1, b2 = betas
    t = state.t + 1
    c1 = 1.0 - b1 ** t
    c2 = 1.0 - b2 ** t
    new_params, m_new, v_new = {}, {}, {}
    for k, theta in params.items():
        g = grads[k]
        m = b1 * state.m.get(k, np.zeros_like(theta)) + (1.0 - b1) * g
        v = b2 * state.v.get(k, np.zeros_like(theta)) + (1.0 - b2) * g * g
        m_hat = m / c1
        v_hat = v / c2
        new_params[k] = theta - lr * (m_hat / (np.sqrt(v_hat) + eps) + weight_decay * theta)
        m_new[k], v_new[k] = m, v
    return new_params, AdamState(m_new, v_new, t)


class PlateauScheduler:
    """Multiply the learning rate by ``factor`` once validation loss has failed
    to improve by more than ``threshold`` for more than ``patience`` epochs.
    """

    def __init__(self, lr: float, factor: float = 0.5, patience: int = 5,
                 min_lr: float = 1e-6, threshold: float = 1e-8):
        if not 0.0 < factor < 1.0:
            raise ContractError("factor must lie in (0, 1)")
        if patience < 1:
            raise ContractError("patience must be >= 1")
        self.lr = lr
        self.factor = factor
        self.patience = patience
        self.min_lr = min_lr
        self.threshold = threshold
        self.best = np.inf
        self.num_bad = 0

    def step(self, val_loss: float) -> float:
        if val_loss < self.best - self.threshold:
            self.best = val_loss
            self.num_bad = 0
        else:
            self.num_bad += 1
        if self.num_bad > self.patience:
            self.lr = max(self.lr * self.factor, self.min_lr)
            self.num_bad = 0
        return self.lr
