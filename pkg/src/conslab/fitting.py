"""Log-log power-law and linear least-squares fits with curvature diagnostics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError


@dataclass
class FitResult:
    exponent_or_slope: float
    intercept: float
    r2: float
    stderr: float
    loglog_curvature: float = 0.0

    def to_dict(self):
        return {
            "slope": self.exponent_or_slope,
            "intercept": self.intercept,
            "r2": self.r2,
            "stderr": self.stderr,
            "loglog_curvature": self.loglog_curvature,
        }


def _ols(xs: np.ndarray, ys: np.ndarray) -> FitResult:
    m = len(xs)
    sxx = float(np.sum((xs - xs.mean()) ** 2))
    if sxx == 0:
        raise InvalidInputError("x values are degenerate (zero variance)")
    slope, intercept = np.polyfit(xs, ys, 1)
    pred = slope * xs + intercept
    rss = float(np.sum((ys - pred) ** 2))
    tss = float(np.sum((ys - ys.mean()) ** 2))
    r2 = 1.0 if tss == 0 else 1.0 - rss / tss
    stderr = np.sqrt(rss / (m - 2) / sxx) if m > 2 else 0.0
    return FitResult(float(slope), float(intercept), float(r2), float(stderr))


def fit_linear(xs, ys) -> FitResult:
    """Ordinary least squares y = slope*x + intercept."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.ndim != 1 or ys.ndim != 1:
        raise InvalidInputError("fit inputs must be 1-D")
    if len(xs) < 2 or len(xs) != len(ys):
        raise InvalidInputError("need >= 2 matched points")
    return _ols(xs, ys)


def fit_power_law(xs, ys) -> FitResult:
    """OLS on (ln x, ln y); r2 is computed on the log scale.

    loglog_curvature is the quadratic coefficient of a second-order log-log
    fit: zero for exact power laws, growing with systematic bending.
    """
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.ndim != 1 or ys.ndim != 1:
        raise InvalidInputError("fit inputs must be 1-D")
    if len(xs) < 3 or len(xs) != len(ys):
        raise InvalidInputError("need >= 3 matched points")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise InvalidInputError("power-law fits need strictly positive values")
    lx, ly = np.log(xs), np.log(ys)
    fit = _ols(lx, ly)
    quad = np.polyfit(lx, ly, 2)
    fit.loglog_curvature = float(quad[0])
    return fit
