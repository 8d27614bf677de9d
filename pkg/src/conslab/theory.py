"""Closed-form spectral predictions and their empirical counterparts.

Holds the geometric crossover sum for the gradient imbalance, local drift
exponents derived from it, first-principles mode coefficients, the scalar
2-layer linear mode oracle, and the extraction of empirical mode
coefficients from training traces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .data import Dataset, DataSpectrum, data_cov_spectrum
from .errors import InvalidInputError, UnsupportedConfigError
from .model import Activation, MlpParams, forward
from .training import TrainTrace


@dataclass
class SpectralModel:
    lambdas: np.ndarray    # mode eigenvalues, > 0
    coeffs: np.ndarray     # mode coefficients, >= 0
    eta: float
    steps: int

    def __post_init__(self):
        self.lambdas = np.asarray(self.lambdas, dtype=np.float64)
        self.coeffs = np.asarray(self.coeffs, dtype=np.float64)
        if self.lambdas.shape != self.coeffs.shape:
            raise InvalidInputError("lambdas and coeffs must have equal length")
        if self.eta <= 0 or self.steps < 1:
            raise InvalidInputError("need eta > 0 and steps >= 1")


@dataclass
class ModePrediction:
    contribution: float
    eta_star: float       # crossover learning rate 1/(lambda_k * T)
    regime: str           # "converged" | "unconverged" | "mixed"
    unstable: bool        # eta * lambda_k >= 2


def _geometric_sum(x: float, steps: int) -> float:
    """sum_{t=0}^{T-1} (1-x)^(2t), evaluated stably for x near 0, 1, and 2."""
    rho2 = (1.0 - x) ** 2
    denom = x * (2.0 - x)            # equals 1 - rho^2
    if abs(denom) < 1e-14:
        return float(steps)
    if rho2 == 0.0:
        num = 1.0
    else:
        log_rho2 = 2.0 * (math.log1p(-x) if x < 1.0 else math.log(x - 1.0))
        num = -math.expm1(steps * log_rho2)
    return num / denom


def crossover_sum(m: SpectralModel):
    """Total gradient imbalance and per-mode breakdown.

    Modes with eta*lambda >= 2 are flagged unstable (the geometric factor
    grows with T); they still contribute to the returned total.
    """
    total = 0.0
    per_mode = []
    for lam, c in zip(m.lambdas, m.coeffs):
        if lam <= 0:
            raise InvalidInputError("mode eigenvalues must be positive")
        x = m.eta * lam
        contrib = c * _geometric_sum(x, m.steps)
        eta_star = 1.0 / (lam * m.steps)
        if m.eta > 3.0 * eta_star:
            regime = "converged"
        elif m.eta < eta_star / 3.0:
            regime = "unconverged"
        else:
            regime = "mixed"
        per_mode.append(ModePrediction(
            contribution=float(contrib), eta_star=eta_star, regime=regime,
            unstable=x >= 2.0,
        ))
        total += contrib
    return float(total), per_mode


def predict_imbalance(m: SpectralModel) -> float:
    """Crossover-sum total restricted to contracting modes (eta*lambda < 2)."""
    total, per_mode = crossover_sum(m)
    stable = sum(p.contribution for p in per_mode if not p.unstable)
    return float(stable)


def local_exponent(m: SpectralModel, eta_grid) -> np.ndarray:
    """Local drift exponent beta(eta) = 2 + d ln G / d ln eta on a log grid."""
    eta_grid = np.asarray(eta_grid, dtype=np.float64)
    if len(eta_grid) < 3:
        raise InvalidInputError("need >= 3 grid points")
    g = np.array([
        crossover_sum(SpectralModel(m.lambdas, m.coeffs, eta, m.steps))[0]
        for eta in eta_grid
    ])
    ln_eta = np.log(eta_grid)
    ln_g = np.log(g)
    slope = np.gradient(ln_g, ln_eta)
    return 2.0 + slope


def predict_ck(e0, lambda_x) -> np.ndarray:
    """First-principles mode coefficients c_k = e_k(0)^2 * lambda_x,k^2, unit-sum."""
    e0 = np.asarray(e0, dtype=np.float64)
    lambda_x = np.asarray(lambda_x, dtype=np.float64)
    if e0.shape != lambda_x.shape:
        raise InvalidInputError("e0 and lambda_x must have equal length")
    c = e0 ** 2 * lambda_x ** 2
    s = float(c.sum())
    if s == 0:
        raise InvalidInputError("degenerate input: all mode coefficients vanish")
    return c / s


def linear_mode_oracle(sigma0: float, sigma_star: float, lambda_x: float,
                       eta: float, steps: int) -> np.ndarray:
    """Geometric error trajectory e(t) = e(0) rho^t for one scalar mode.

    e(0) = sigma0^2 - sigma_star and rho = 1 - eta * (2 * lambda_x * sigma0^2);
    expansion (|rho| > 1) is allowed and simply grows.
    """
    e0 = sigma0 ** 2 - sigma_star
    rho = 1.0 - eta * (2.0 * lambda_x * sigma0 ** 2)
    return e0 * rho ** np.arange(steps + 1, dtype=np.float64)


def mode_spectrum(p0: MlpParams, spectrum: DataSpectrum) -> np.ndarray:
    """Per-data-mode effective eigenvalues of a 2-layer net at initialization.

    lambda_k = lambda_x,k * (||W1 u_k||^2 + ||W2||_F^2 / C), the two-layer
    contraction rate of mode k linearized at the initial weights.  Closed
    form for linear nets; for nonlinear activations use
    calibrated_mode_spectrum, which rescales against a measured top
    Gauss-Newton eigenvalue.
    """
    if p0.depth != 2:
        raise UnsupportedConfigError("mode spectrum is defined for 2-layer nets")
    w1, w2 = p0.weights
    sigma1_sq = np.sum((w1 @ spectrum.basis) ** 2, axis=0)
    sigma2_sq = float(np.sum(w2 * w2)) / w2.shape[0]
    return spectrum.eigenvalues * (sigma1_sq + sigma2_sq)


def calibrated_mode_spectrum(p0: MlpParams, ds: Dataset, act: Activation,
                             spectrum: Optional[DataSpectrum] = None) -> np.ndarray:
    """Mode-paired eigenvalues, rescaled for nonlinear activations.

    The linear closed form fixes the per-mode shape; for nonlinear nets a
    single matrix-free top-eigenvalue measurement at init fixes the overall
    scale the activation pattern induces.
    """
    if spectrum is None:
        spectrum = data_cov_spectrum(ds)
    lam = mode_spectrum(p0, spectrum)
    if not act.is_linear:
        from .spectral import lambda_max_hvp
        from .training import MSE as _MSE
        top = lambda_max_hvp(p0, ds, act, _MSE)
        peak = float(lam.max())
        if peak > 0:
            lam = lam * (top / peak)
    return lam


def effective_spectrum(p0: MlpParams, ds: Dataset, act: Activation, loss: str) -> np.ndarray:
    """Mode eigenvalues at initialization.

    2-layer nets use the mode-paired closed form (in data-mode order,
    calibrated for nonlinear activations); everything else falls back to the
    top-d eigenvalues of the dense Gauss-Newton matrix, descending.
    """
    if p0.depth == 2:
        return calibrated_mode_spectrum(p0, ds, act)
    from .spectral import gauss_newton
    from .numerics import sym_eig
    h = gauss_newton(p0, ds, act, loss)
    return sym_eig(h).eigenvalues[: ds.d]


def initial_mode_errors(p0: MlpParams, ds: Dataset, act: Activation,
                        spectrum: Optional[DataSpectrum] = None) -> np.ndarray:
    """Per-mode initial prediction error e_k(0).

    Computed from the regression residual in the data eigenbasis:
    e_k(0) = ||(1/n)(F - Y)^T X u_k|| / lambda_x,k, which reduces to the
    scalar mode error exactly for linear nets.
    """
    if spectrum is None:
        spectrum = data_cov_spectrum(ds)
    logits = forward(p0, ds.x, act).logits
    resid = (logits - ds.onehot).T @ ds.x / ds.n   # (C, d)
    v = resid @ spectrum.basis                      # (C, d) per-mode residual
    norms = np.linalg.norm(v, axis=0)
    lam = spectrum.eigenvalues
    e0 = np.where(lam > 1e-12, norms / np.maximum(lam, 1e-12), 0.0)
    return e0


def empirical_ck(trace: TrainTrace, spectrum: DataSpectrum, ds: Dataset,
                 normalize: bool = True) -> np.ndarray:
    """Empirical mode coefficients extracted from a recorded 2-layer run.

    The per-step gradient imbalance is allocated across data modes by the
    layer-1 gradient's mode energies (recorded at train time); the time sum
    per mode is then rescaled by that mode's geometric normalization
    (1 - rho^2T) / (1 - rho^2).  Output is unit-sum normalized.
    """
    if len(trace.config.widths) != 3:
        raise UnsupportedConfigError("empirical c_k extraction needs a 2-layer net")
    if trace.mode_imbalance is None:
        raise InvalidInputError("trace was not recorded with a mode basis")
    T = trace.steps_run
    s_k = trace.mode_imbalance[:T].sum(axis=0)
    lam = calibrated_mode_spectrum(trace.params0, ds, trace.config.activation, spectrum)
    eta = trace.eta
    geom = np.array([_geometric_sum(eta * lk, T) if lk > 0 else float(T) for lk in lam])
    c = np.abs(s_k) / np.maximum(geom, 1e-300)
    tot = float(c.sum())
    if tot == 0:
        raise InvalidInputError("trace carries no imbalance signal")
    return c / tot if normalize else c


def pearson_r(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.std() == 0 or b.std() == 0:
        return 0.0
    return float(np.corrcoef(a, b)[0, 1])


def ck_table_csv(path, lambdas, predicted, empirical, contributions=None) -> None:
    """Prediction-vs-measurement table (mode, lambda, c_k pred, c_k emp, G share)."""
    with open(path, "w") as fh:
        fh.write("mode,lambda,c_pred,c_emp,g_contribution\n")
        for k in range(len(lambdas)):
            g = contributions[k] if contributions is not None else float("nan")
            fh.write(f"{k},{lambdas[k]:.17g},{predicted[k]:.17g},{empirical[k]:.17g},{g:.17g}\n")
