from .fdist import betainc, f_cdf, f_sf, t_sf_two_sided
from .fitts import (
    FitComparison,
    FittsFit,
    ballistic_fit,
    compare_fits,
    fit_model,
    fitts_fit,
    index_of_difficulty,
    remove_outliers,
)
from .regression import AnovaResult, LackOfFitResult, OLSResult, anova_regression, lack_of_fit, ols_fit

__all__ = [
    "AnovaResult",
    "FitComparison",
    "FittsFit",
    "LackOfFitResult",
    "OLSResult",
    "anova_regression",
    "ballistic_fit",
    "betainc",
    "compare_fits",
    "f_cdf",
    "f_sf",
    "fit_model",
    "fitts_fit",
    "index_of_difficulty",
    "lack_of_fit",
    "ols_fit",
    "remove_outliers",
    "t_sf_two_sided",
]
