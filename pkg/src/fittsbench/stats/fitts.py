"""Fitts and ballistic movement-time models fitted to trial metrics.

Trials are any objects exposing ``distance_m``, ``width_m``,
``movement_time_s`` and ``success`` (see :class:`fittsbench.metrics.TrialMetric`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import ContractError, InvalidArgumentError
from .fdist import t_sf_two_sided
from .regression import AnovaResult, LackOfFitResult, anova_regression, lack_of_fit, ols_fit

MODELS = ("fitts", "ballistic")


def index_of_difficulty(distance_m: float, width_m: float) -> float:
    """log2(2D / W), in bits."""
    if not (distance_m > 0 and width_m > 0):
        raise InvalidArgumentError(f"need D > 0 and W > 0, got D={distance_m}, W={width_m}")
    return math.log2(2.0 * distance_m / width_m)


def regressor(model: str, distance_m: float, width_m: float) -> float:
    if model == "fitts":
        return index_of_difficulty(distance_m, width_m)
    if model == "ballistic":
        if distance_m < 0:
            raise InvalidArgumentError("distance must be non-negative")
        return math.sqrt(distance_m)
    raise InvalidArgumentError(f"unknown model {model!r}")


@dataclass(frozen=True)
class FittsFit:
    model: str
    a: float
    b: float
    r_squared: float
    se_a: float
    se_b: float
    n: int
    anova: AnovaResult
    lack_of_fit: LackOfFitResult | None
    x: np.ndarray
    y: np.ndarray


def fit_model(model: str, xs, ys) -> FittsFit:
    ols = ols_fit(xs, ys)
    return FittsFit(
        model=model,
        a=ols.intercept,
        b=ols.slope,
        r_squared=ols.r_squared,
        se_a=ols.se_intercept,
        se_b=ols.se_slope,
        n=ols.n,
        anova=anova_regression(ols),
        lack_of_fit=lack_of_fit(ols),
        x=ols.x,
        y=ols.y,
    )


def _successful(trials) -> list:
    return [tr for tr in trials if tr.success and tr.movement_time_s is not None]


def _fit_trials(model: str, trials) -> FittsFit:
    ok = _successful(trials)
    xs = [regressor(model, tr.distance_m, tr.width_m) for tr in ok]
    ys = [tr.movement_time_s for tr in ok]
    return fit_model(model, xs, ys)


def fitts_fit(trials) -> FittsFit:
    """MT = a + b * log2(2D/W) over the successful trials."""
    return _fit_trials("fitts", trials)


def ballistic_fit(trials) -> FittsFit:
    """MT = a + b * sqrt(D) over the successful trials."""
    return _fit_trials("ballistic", trials)


def remove_outliers(trials: Sequence, k: float = 1.5, min_group: int = 4) -> tuple[list, list]:
    """Tukey fences on MT within each (D, W) condition.

    Conditions with fewer than ``min_group`` successful trials pass through.
    Unsuccessful trials are left in ``kept`` untouched. Input order is preserved.
    """
    groups: dict[tuple[float, float], list[float]] = {}
    for tr in _successful(trials):
        groups.setdefault((tr.distance_m, tr.width_m), []).append(tr.movement_time_s)
    fences = {}
    for key, mts in groups.items():
        if len(mts) < min_group:
            continue
        q1, q3 = np.percentile(mts, [25.0, 75.0])
        iqr = q3 - q1
        fences[key] = (q1 - k * iqr, q3 + k * iqr)
    kept, removed = [], []
    for tr in trials:
        fence = fences.get((tr.distance_m, tr.width_m))
        if fence is not None and tr.success and tr.movement_time_s is not None:
            lo, hi = fence
            if not lo <= tr.movement_time_s <= hi:
                removed.append(tr)
                continue
        kept.append(tr)
    return kept, removed


@dataclass(frozen=True)
class FitComparison:
    model: str
    slope_diff: float
    slope_diff_se: float
    t: float
    df: int
    p_equal_slopes: float
    delta_r_squared: float


def compare_fits(human: FittsFit, policy: FittsFit) -> FitComparison:
    """Two-sided test of equal slopes plus the R^2 gap (human minus policy)."""
    if human.model != policy.model:
        raise ContractError(f"cannot compare {human.model} fit with {policy.model} fit")
    diff = human.b - policy.b
    se = math.hypot(human.se_b, policy.se_b)
    df = human.n + policy.n - 4
    if diff == 0.0:
        t, p = 0.0, 1.0
    elif se == 0.0:
        t, p = math.copysign(math.inf, diff), 0.0
    else:
        t = diff / se
        p = t_sf_two_sided(t, df)
    return FitComparison(human.model, diff, se, t, df, p, human.r_squared - policy.r_squared)
