"""Fully connected ReLU network with hand-written backpropagation.

Parameters are a dict ``{"W1", "b1", ..., "Wk", "bk"}``; ``W`` has shape
(out, in). ReLU (and optional inverted dropout) follows every layer but the
last, which is linear.
"""
from __future__ import annotations

import numpy as np

from ..errors import ContractError


def init_params(sizes, rng: np.random.Generator) -> dict[str, np.ndarray]:
    """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights and biases."""
    params = {}
    for i, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:]), start=1):
        bound = 1.0 / np.sqrt(fan_in)
        params[f"W{i}"] = rng.uniform(-bound, bound, size=(fan_out, fan_in))
        params[f"b{i}"] = rng.uniform(-bound, bound, size=fan_out)
    return params


def n_layers(params) -> int:
    return len(params) // 2


def layer_sizes(params) -> list[int]:
    k = n_layers(params)
    return [params["W1"].shape[1]] + [params[f"W{i}"].shape[0] for i in range(1, k + 1)]


def mlp_forward(params, x, mode: str = "eval", dropout: float = 0.0, rng=None, return_cache: bool = False):
    """Forward pass for a (B, in) batch or a single (in,) vector."""
    if mode not in ("train", "eval"):
        raise ContractError(f"mode must be 'train' or 'eval', got {mode!r}")
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    h = x[None, :] if single else x
    if h.shape[1] != params["W1"].shape[1]:
        raise ContractError(f"input width {h.shape[1]} != expected {params['W1'].shape[1]}")
    use_dropout = mode == "train" and dropout > 0.0
    if use_dropout and rng is None:
        raise ContractError("train-mode dropout needs an rng")
    k = n_layers(params)
    cache = {"a0": h}
    for i in range(1, k + 1):
        z = h @ params[f"W{i}"].T + params[f"b{i}"]
        if i == k:
            h = z
            break
        h = np.maximum(z, 0.0)
        cache[f"z{i}"] = z
        if use_dropout:
            mask = (rng.random(h.shape) >= dropout) / (1.0 - dropout)
            h = h * mask
            cache[f"m{i}"] = mask
        cache[f"a{i}"] = h
    out = h[0] if single else h
    return (out, cache) if return_cache else out


def mse_loss_and_grad(params, x, y, mode: str = "train", dropout: float = 0.0, rng=None):
    """Batch mean of squared L2 error and its gradient for every parameter."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    if len(x) == 0:
        raise ContractError("empty batch")
    pred, cache = mlp_forward(params, x, mode, dropout, rng, return_cache=True)
    B = len(x)
    err = pred - y
    loss = float(np.sum(err * err) / B)
    k = n_layers(params)
    grads = {}
    delta = 2.0 * err / B
    for i in range(k, 0, -1):
        a_prev = cache[f"a{i - 1}"]
        grads[f"W{i}"] = delta.T @ a_prev
        grads[f"b{i}"] = delta.sum(axis=0)
        if i > 1:
            delta = delta @ params[f"W{i}"]
            if f"m{i - 1}" in cache:
                delta = delta * cache[f"m{i - 1}"]
            delta = delta * (cache[f"z{i - 1}"] > 0)
    return loss, grads


def mse(params, x, y) -> float:
    pred = mlp_forward(params, x, "eval")
    err = pred - np.atleast_2d(y)
    return float(np.sum(err * err) / len(err))
