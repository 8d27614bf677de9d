"""Conservation quantities, the exact per-step drift identity, and the
gradient imbalance sum."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .model import LayerGrads, MlpParams
from .training import TrainTrace, _stable_delta_norm_sq

RESIDUAL_FLOOR = 1e-30


def conservation_quantities(p: MlpParams) -> np.ndarray:
    """C_l = ||W_{l+1}||_F^2 - ||W_l||_F^2 for l = 1..L-1."""
    if p.depth < 2:
        raise InvalidInputError("need at least 2 layers")
    norms = np.array([float(np.sum(w * w)) for w in p.weights])
    return norms[1:] - norms[:-1]


def step_drift_check(before: MlpParams, after: MlpParams, g: LayerGrads, eta: float):
    """Measured vs predicted per-step drift for a GD step after = before - eta*g.

    The measured side is computed from elementwise (a-b)(a+b) sums, which
    sidesteps the cancellation in differencing large squared norms.  Agreement
    certifies that the O(eta) trace term cancels.
    """
    if len(after.weights) != len(before.weights):
        raise InvalidInputError("parameter depths differ")
    for wb, wa in zip(before.weights, after.weights):
        if wb.shape != wa.shape:
            raise InvalidInputError("parameter shapes differ")
    dn = _stable_delta_norm_sq(after.weights, before.weights)
    measured = dn[1:] - dn[:-1]
    gsq = np.array([float(np.sum(gw * gw)) for gw in g.weights])
    predicted = eta * eta * (gsq[1:] - gsq[:-1])
    return measured, predicted


def imbalance_sum(trace: TrainTrace) -> np.ndarray:
    """G_l = sum_t delta_l(t) over the recorded steps."""
    if trace.imbalance is None or trace.steps_run == 0:
        raise InvalidInputError("trace has no recorded gradient norms")
    return trace.imbalance[: trace.steps_run].sum(axis=0)


@dataclass
class DriftReport:
    total_drift: np.ndarray       # per pair |C_l(T) - C_l(0)|
    imbalance: np.ndarray         # per pair G_l
    identity_residual: np.ndarray  # per pair max_t of the scaled identity error
    identity_applicable: bool     # GD without biases only

    def to_dict(self):
        return {
            "total_drift": self.total_drift.tolist(),
            "imbalance_sum": self.imbalance.tolist(),
            "identity_residual": (
                self.identity_residual.tolist() if self.identity_applicable else None
            ),
            "identity_applicable": self.identity_applicable,
        }


def drift_report(trace: TrainTrace) -> DriftReport:
    """Endpoint drift, imbalance sums, and the per-step identity residual.

    The residual normalizes |dC - eta^2 delta| by the step's natural scale,
    |dC| + eta^2 (||g_{l+1}||^2 + ||g_l||^2): the drift itself crosses zero
    along a run, and a denominator of |dC| alone would report rounding noise
    as an identity violation at those steps.
    """
    T = trace.steps_run
    if T == 0:
        raise InvalidInputError("empty trace")
    total = np.abs(trace.cons[T] - trace.cons[0])
    g_sum = imbalance_sum(trace)
    applicable = trace.config.opt.kind == "gd" and not trace.config.bias
    eta = trace.eta
    resid = np.abs(trace.delta_c[:T] - eta * eta * trace.imbalance[:T])
    scale = eta * eta * (trace.grad_sq[:T, 1:] + trace.grad_sq[:T, :-1])
    resid = resid / (np.abs(trace.delta_c[:T]) + scale + RESIDUAL_FLOOR)
    return DriftReport(
        total_drift=total,
        imbalance=g_sum,
        identity_residual=resid.max(axis=0),
        identity_applicable=applicable,
    )
