"""Synthetic (regressor, MT) samples for calibrating the regression tests."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fitts import fit_model, regressor


def simulate_mt(model: str, a: float, b: float, distances, width_m: float, reps: int,
                sigma: float, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Distances repeated ``reps`` times and MT = a + b * regressor(model) + N(0, sigma)."""
    d = np.repeat(np.asarray(distances, dtype=float), reps)
    x = np.array([regressor(model, di, width_m) for di in d])
    return d, a + b * x + rng.normal(0.0, sigma, size=len(d))


@dataclass(frozen=True)
class LackOfFitDesign:
    """Monte-Carlo design for the power and size of the lack-of-fit test.

    ``sigma`` was frozen from the sweep in ``scripts/calibrate_lack_of_fit.py``
    and must not be retuned against the acceptance seeds.
    """

    distances_m: tuple[float, ...] = (0.05, 0.1, 0.2, 0.3, 0.4, 0.5)
    width_m: float = 0.02
    reps: int = 25
    sigma: float = 0.01
    ballistic_ab: tuple[float, float] = (0.2, 0.5)
    fitts_ab: tuple[float, float] = (0.2, 0.15)
    alpha: float = 0.05


def lack_of_fit_rejections(truth: str, runs: int, design: LackOfFitDesign = LackOfFitDesign(),
                           seed0: int = 0) -> int:
    """How many of ``runs`` datasets drawn from ``truth`` reject the ID model at ``alpha``."""
    a, b = design.ballistic_ab if truth == "ballistic" else design.fitts_ab
    hits = 0
    for s in range(runs):
        rng = np.random.default_rng([seed0, s])
        d, mt = simulate_mt(truth, a, b, design.distances_m, design.width_m, design.reps, design.sigma, rng)
        x = [regressor("fitts", di, design.width_m) for di in d]
        hits += fit_model("fitts", x, mt).lack_of_fit.p < design.alpha
    return hits
