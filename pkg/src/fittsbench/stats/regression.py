"""Simple linear regression with regression ANOVA and a lack-of-fit test."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import CollinearInputError, InsufficientDataError
from .fdist import f_sf


@dataclass(frozen=True)
class OLSResult:
    intercept: float
    slope: float
    r_squared: float
    se_intercept: float
    se_slope: float
    residuals: np.ndarray
    x: np.ndarray
    y: np.ndarray
    sse: float
    ssr: float
    sst: float

    @property
    def n(self) -> int:
        return len(self.x)


@dataclass(frozen=True)
class AnovaResult:
    F: float
    df1: int
    df2: int
    p: float


@dataclass(frozen=True)
class LackOfFitResult:
    F: float
    df_lof: int
    df_pe: int
    p: float
    ss_lof: float
    ss_pe: float


def ols_fit(xs, ys) -> OLSResult:
    """Least-squares line y = intercept + slope * x.

    R^2 is defined as 0 when the response is constant.
    """
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise InsufficientDataError("xs and ys must be 1-D and of equal length")
    n = len(x)
    if n < 3:
        raise InsufficientDataError(f"regression needs n >= 3, got {n}")
    xm, ym = x.mean(), y.mean()
    dx = x - xm
    sxx = float(dx @ dx)
    if sxx <= 1e-14 * max(1.0, float(x @ x)):
        raise CollinearInputError("regressor has (near) zero variance")
    slope = float(dx @ (y - ym)) / sxx
    intercept = float(ym - slope * xm)
    resid = y - (intercept + slope * x)
    sse = float(resid @ resid)
    dy = y - ym
    sst = float(dy @ dy)
    ssr = slope * slope * sxx
    r2 = 0.0 if sst == 0.0 else min(max(1.0 - sse / sst, 0.0), 1.0)
    sigma2 = sse / (n - 2)
    se_slope = math.sqrt(sigma2 / sxx)
    se_intercept = math.sqrt(sigma2 * (1.0 / n + xm * xm / sxx))
    return OLSResult(intercept, slope, r2, se_intercept, se_slope, resid, x, y, sse, ssr, sst)


def _sse_is_zero(fit: OLSResult) -> bool:
    scale = max(fit.sst, float(fit.y @ fit.y), 1e-300)
    return fit.sse <= 1e-26 * scale


def anova_regression(fit: OLSResult) -> AnovaResult:
    """F test of the slope: F = (SSR / 1) / (SSE / (n - 2))."""
    df2 = fit.n - 2
    if fit.ssr == 0.0:
        return AnovaResult(0.0, 1, df2, 1.0)
    if _sse_is_zero(fit):
        return AnovaResult(math.inf, 1, df2, 0.0)
    F = fit.ssr / (fit.sse / df2)
    return AnovaResult(F, 1, df2, f_sf(F, 1, df2))


def group_levels(x: np.ndarray, decimals: int = 12) -> tuple[np.ndarray, np.ndarray]:
    """Distinct regressor levels and the level index of every observation."""
    return np.unique(np.round(np.asarray(x, dtype=float), decimals), return_inverse=True)


def lack_of_fit(fit: OLSResult) -> LackOfFitResult | None:
    """Split SSE into pure error about the group means plus lack of fit.

    Returns ``None`` when there are fewer than 3 levels or no replicates.
    """
    levels, idx = group_levels(fit.x)
    c, n = len(levels), fit.n
    if c < 3 or n - c < 1:
        return None
    ss_pe = 0.0
    ss_lof = 0.0
    for k in range(c):
        mask = idx == k
        yk = fit.y[mask]
        mean_k = yk.mean()
        d = yk - mean_k
        ss_pe += float(d @ d)
        # fitted value is constant within a level
        gap = mean_k - (fit.intercept + fit.slope * fit.x[mask][0])
        ss_lof += len(yk) * gap * gap
    df_lof, df_pe = c - 2, n - c
    if ss_lof <= 1e-26 * max(fit.sst, float(fit.y @ fit.y), 1e-300):
        return LackOfFitResult(0.0, df_lof, df_pe, 1.0, ss_lof, ss_pe)
    if ss_pe == 0.0:
        return LackOfFitResult(math.inf, df_lof, df_pe, 0.0, ss_lof, ss_pe)
    F = (ss_lof / df_lof) / (ss_pe / df_pe)
    return LackOfFitResult(F, df_lof, df_pe, f_sf(F, df_lof, df_pe), ss_lof, ss_pe)
