"""Scaling laws and ratios extracted from families of runs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class FitError(ValueError):
    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code


@dataclass
class PowerLawFit:
    """Least-squares fit of I = c * N^alpha in log-log space."""

    prefactor: float
    exponent: float
    residual: float  # RMS of log-space residuals
    points: list[tuple[float, float]]

    def predict(self, n: float) -> float:
        return self.prefactor * n ** self.exponent


def power_law_fit(points) -> PowerLawFit:
    """Ordinary least squares on (log N, log I)."""
    pts = [(float(n), float(i)) for n, i in points]
    if len(pts) < 3:
        raise FitError("TOO_FEW_POINTS", f"need >= 3 points, got {len(pts)}")
    for n, i in pts:
        if n <= 0 or i <= 0:
            raise FitError("NONPOSITIVE_POINT",
                           f"point ({n}, {i}) not strictly positive")
    log_n = np.log([p[0] for p in pts])
    log_i = np.log([p[1] for p in pts])
    alpha, log_c = np.polyfit(log_n, log_i, 1)
    resid = log_i - (alpha * log_n + log_c)
    return PowerLawFit(prefactor=float(np.exp(log_c)), exponent=float(alpha),
                       residual=float(np.sqrt(np.mean(resid**2))), points=pts)


def dicke_ratio(strength: float, strength_dicke: float) -> float:
    """Radiance strength relative to the matched uncontrolled run."""
    if strength_dicke <= 0:
        raise FitError("DIVISION_BY_ZERO",
                       f"reference strength {strength_dicke} must be > 0")
    return strength / strength_dicke


@dataclass
class SaturationResult:
    plateau: float
    saturated: bool
    points: list[tuple[float, float]]


def saturation_curve(values) -> SaturationResult:
    """Plateau of a quantity versus increasing ensemble size.

    The plateau is the mean over the top quartile of sizes; the curve
    counts as saturated when the last two points differ by < 5%.
    """
    pts = [(float(n), float(q)) for n, q in values]
    if len(pts) < 4:
        raise FitError("TOO_FEW_POINTS", f"need >= 4 points, got {len(pts)}")
    sizes = [p[0] for p in pts]
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise FitError("NOT_INCREASING", "sizes must be strictly increasing")
    top = max(1, len(pts) // 4)
    plateau = float(np.mean([q for _, q in pts[-top:]]))
    last, prev = pts[-1][1], pts[-2][1]
    scale = max(abs(last), abs(prev), 1e-300)
    saturated = abs(last - prev) / scale < 0.05
    return SaturationResult(plateau=plateau, saturated=saturated, points=pts)
