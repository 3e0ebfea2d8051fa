from .bundle import POLICY_SCHEMA, PolicyBundle
from .data import NormStats, WeightedConditionSampler, build_windows, fit_norm, weighted_condition_sampler
from .mlp import init_params, mlp_forward, mse_loss_and_grad
from .optim import AdamState, PlateauScheduler, adamw_step, clip_grad_norm
from .train import PolicyConfig, TrainingHistory, train

__all__ = [
    "POLICY_SCHEMA",
    "AdamState",
    "NormStats",
    "PlateauScheduler",
    "PolicyBundle",
    "PolicyConfig",
    "TrainingHistory",
    "WeightedConditionSampler",
    "adamw_step",
    "build_windows",
    "clip_grad_norm",
    "fit_norm",
    "init_params",
    "mlp_forward",
    "mse_loss_and_grad",
    "train",
    "weighted_condition_sampler",
]
