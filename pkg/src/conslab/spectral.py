"""Gauss-Newton Hessians, softmax curvature, spectral compression tracking,
and activation switch-rate statistics.

Only the Gauss-Newton form is ever assembled (J^T S J / n with S identity for
MSE and block-diagonal softmax curvature for CE); second derivatives through
the activation are deliberately excluded.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .data import Dataset
from .errors import InvalidInputError, SizeLimitError
from .fitting import fit_linear
from .model import Activation, MlpParams, backward, forward
from .numerics import make_rng, power_iteration, sym_eig
from .training import (CE, MSE, TrainConfig, TrainTrace, softmax_probs, train)

DENSE_ENTRY_LIMIT = 5e7
DENSE_PARAM_LIMIT = 2000


@dataclass
class SoftmaxBlock:
    s: np.ndarray
    lambda_max: float


def softmax_block(p: np.ndarray) -> SoftmaxBlock:
    """Per-sample CE curvature in logit space, S = diag(p) - p p^T."""
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1 or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-10:
        raise InvalidInputError("expected a probability vector summing to 1")
    s = np.diag(p) - np.outer(p, p)
    lam = float(sym_eig(s).eigenvalues[0])
    return SoftmaxBlock(s=s, lambda_max=lam)


def _softmax_block_lambda_max(probs: np.ndarray) -> float:
    """max_i lambda_max(S_i) for a batch of probability rows."""
    best = 0.0
    for row in probs:
        s = np.diag(row) - np.outer(row, row)
        lam = float(np.linalg.eigvalsh(s)[-1])
        best = max(best, lam)
    return best


def _flatten(mats):
    return np.concatenate([m.ravel() for m in mats])


def _unflatten(v, templates):
    out = []
    off = 0
    for w in templates:
        out.append(v[off:off + w.size].reshape(w.shape))
        off += w.size
    return out


def logit_jacobian(p: MlpParams, ds: Dataset, act: Activation) -> np.ndarray:
    """Exact (nC x P) Jacobian of logits; row (i, c) is sample-major."""
    if p.biases is not None:
        raise InvalidInputError("logit_jacobian is defined for bias-free nets")
    P = sum(w.size for w in p.weights)
    n, C = ds.n, ds.c
    if n * C * P > DENSE_ENTRY_LIMIT:
        raise SizeLimitError(
            f"dense Jacobian would hold {n * C * P:.0f} entries; "
            "use the matrix-free path (lambda_max_hvp)"
        )
    cache = forward(p, ds.x, act)
    L = p.depth
    J = np.zeros((n * C, P))
    offsets = np.cumsum([0] + [w.size for w in p.weights])
    for c in range(C):
        # per-sample backward pass that never sums over the batch axis
        d = np.zeros((n, C))
        d[:, c] = 1.0
        cur = d
        for l in range(L - 1, -1, -1):
            block = np.einsum("ni,nj->nij", cur, cache.acts[l])
            J[c::C, offsets[l]:offsets[l + 1]] = block.reshape(n, -1)
            if l > 0:
                cur = (cur @ p.weights[l]) * act.deriv(cache.preacts[l - 1])
    return J


def gauss_newton(p: MlpParams, ds: Dataset, act: Activation, loss: str) -> np.ndarray:
    """Dense (P x P) Gauss-Newton matrix J^T S J / n."""
    J = logit_jacobian(p, ds, act)
    n, C = ds.n, ds.c
    if loss == MSE:
        H = J.T @ J / n
    elif loss == CE:
        probs = softmax_probs(forward(p, ds.x, act).logits)
        Jr = J.reshape(n, C, -1)
        inner = np.einsum("nc,ncp->np", probs, Jr)
        SJ = probs[:, :, None] * Jr - probs[:, :, None] * inner[:, None, :]
        H = np.einsum("ncp,ncq->pq", Jr, SJ) / n
    else:
        raise InvalidInputError(f"unknown loss kind: {loss!r}")
    return 0.5 * (H + H.T)


def _gn_matvec_factory(p: MlpParams, ds: Dataset, act: Activation, loss: str):
    """Matrix-free v -> (1/n) J^T S (J v) via a JVP/VJP pair on one cache."""
    cache = forward(p, ds.x, act)
    probs = softmax_probs(cache.logits) if loss == CE else None
    n = ds.n
    L = p.depth

    def apply(v):
        dW = _unflatten(v, p.weights)
        # forward-mode pass: directional derivative of the logits
        da = np.zeros_like(ds.x)
        h = ds.x
        for l in range(L - 1):
            dz = h @ dW[l].T + da @ p.weights[l].T
            deriv = act.deriv(cache.preacts[l])
            da = deriv * dz
            h = cache.acts[l + 1]
        w = cache.acts[L - 1] @ dW[L - 1].T + da @ p.weights[L - 1].T  # (n, C)
        if loss == CE:
            u = probs * w - probs * np.sum(probs * w, axis=1, keepdims=True)
        else:
            u = w
        g = backward(p, cache, u / n, act)
        return _flatten(g.weights)

    return apply


def lambda_max_hvp(p: MlpParams, ds: Dataset, act: Activation, loss: str,
                   rng=None, tol=1e-6, max_iter=2000) -> float:
    """Top Gauss-Newton eigenvalue without materializing the Jacobian."""
    if rng is None:
        rng = make_rng(0, 1)
    apply = _gn_matvec_factory(p, ds, act, loss)
    dim = sum(w.size for w in p.weights)
    return power_iteration(apply, dim, tol=tol, max_iter=max_iter, rng=rng)


def compression_bound(p: MlpParams, ds: Dataset, act: Activation):
    """(lhs, rhs) of lambda_max(H_CE) <= lambda_max(J^T J / n) * max_i lambda_max(S_i)."""
    P = sum(w.size for w in p.weights)
    probs = softmax_probs(forward(p, ds.x, act).logits)
    q_margin = _softmax_block_lambda_max(probs)
    if P <= DENSE_PARAM_LIMIT:
        lhs = float(sym_eig(gauss_newton(p, ds, act, CE)).eigenvalues[0])
        rhs_jtj = float(sym_eig(gauss_newton(p, ds, act, MSE)).eigenvalues[0])
    else:
        lhs = lambda_max_hvp(p, ds, act, CE)
        rhs_jtj = lambda_max_hvp(p, ds, act, MSE)
    return lhs, rhs_jtj * q_margin


@dataclass
class HessianSnapshot:
    step: int
    lambda_max: float           # top eigenvalue of the loss Gauss-Newton matrix
    jtj_lambda_max: float       # top eigenvalue of J^T J / n
    q_margin: float             # max_i lambda_max(S_i); 1.0 placeholder for MSE
    spectrum: Optional[np.ndarray] = None


def _lambda_max_tracking(p, ds, act, loss, rng):
    # tracking snapshots tolerate a looser estimate than the dense cross-checks
    from .errors import NumericalFailureError
    try:
        return lambda_max_hvp(p, ds, act, loss, rng=rng, tol=1e-4, max_iter=300)
    except NumericalFailureError as exc:
        # near-degenerate top pair: the Rayleigh quotient is already accurate
        return float(exc.estimate)


def hessian_snapshot(p: MlpParams, ds: Dataset, act: Activation, loss: str,
                     step: int = 0) -> HessianSnapshot:
    rng = make_rng(0, 7)
    jtj = _lambda_max_tracking(p, ds, act, MSE, rng)
    if loss == CE:
        lam = _lambda_max_tracking(p, ds, act, CE, rng)
        probs = softmax_probs(forward(p, ds.x, act).logits)
        q_margin = _softmax_block_lambda_max(probs)
    else:
        lam = jtj
        q_margin = 1.0
    return HessianSnapshot(step=step, lambda_max=lam, jtj_lambda_max=jtj, q_margin=q_margin)


@dataclass
class CompressionProfile:
    snapshots: list
    tau: Optional[float] = None
    fit_r2: Optional[float] = None
    trace: Optional[TrainTrace] = None

    def series(self):
        steps = np.array([s.step for s in self.snapshots], dtype=float)
        lams = np.array([s.lambda_max for s in self.snapshots])
        return steps, lams


def track_compression(cfg: TrainConfig, ds: Dataset, stride: int) -> CompressionProfile:
    """Train under CE while sampling lambda_max, q-margins, and bound sides."""
    if cfg.loss != CE:
        raise InvalidInputError("compression tracking is defined for CE loss")
    run_cfg = TrainConfig(
        widths=cfg.widths, activation=cfg.activation, loss=cfg.loss, opt=cfg.opt,
        steps=cfg.steps, seed=cfg.seed, bias=cfg.bias,
        record_q=True, lambda_stride=stride,
    )
    trace = train(run_cfg, ds)
    profile = CompressionProfile(snapshots=trace.snapshots, trace=trace)
    if len(profile.snapshots) >= 5:
        tau, r2 = estimate_tau(profile)
        profile.tau = tau
        profile.fit_r2 = r2
    return profile


def estimate_tau(profile: CompressionProfile):
    """Exponential-decay timescale of lambda_max(t), in steps.

    The fit window opens where lambda_max first falls below 90% of its running
    maximum and closes where it falls below 5% of that reference (or at the
    series end).  Returns (tau, r2); tau is None when the series does not
    decay.
    """
    steps, lams = profile.series()
    if len(lams) < 5:
        raise InvalidInputError("need at least 5 snapshots")
    run_max = np.maximum.accumulate(lams)
    below = np.nonzero(lams < 0.9 * run_max)[0]
    if len(below) == 0:
        return None, None
    start = int(below[0])
    ref = run_max[start]
    end = len(lams) - 1
    tail = np.nonzero(lams[start:] < 0.05 * ref)[0]
    if len(tail) > 0:
        end = start + int(tail[0])
    window = slice(max(start - 1, 0), end + 1)
    xs = steps[window]
    ys = lams[window]
    pos = ys > 0
    if pos.sum() < 3:
        return None, None
    fit = fit_linear(xs[pos], np.log(ys[pos]))
    if fit.exponent_or_slope >= 0:
        return None, None
    return -1.0 / fit.exponent_or_slope, fit.r2


def switch_rate(trace: TrainTrace, start: int = 0):
    """(per-neuron rate, total rate) of pre-activation sign flips.

    The per-neuron rate is the fraction of (step, sample, hidden-neuron)
    triples whose sign differs from the previous recorded step, counted from
    `start` onward (use a nonzero start to skip the initial transient).
    Defined as 0 for linear activation, where sign flips are irrelevant to
    the function.
    """
    if trace.switch_counts is None:
        raise InvalidInputError("trace did not record activation patterns")
    if trace.config.activation.is_linear:
        return 0.0, 0.0
    T = trace.steps_run
    hidden = trace.hidden_units
    # comparisons start at step 1, so there are T-1 of them
    lo = max(start, 1)
    total_flips = float(trace.switch_counts[lo:T].sum())
    denom = max(T - lo, 1) * trace.n_samples * hidden
    per_neuron = total_flips / denom if denom else 0.0
    return per_neuron, per_neuron * hidden


def unit_switch_fraction(trace: TrainTrace, start: int = 0) -> float:
    """Mean fraction of hidden units that flip on at least one sample per step.

    Coarser than switch_rate: a unit counts once per step no matter how many
    samples crossed zero, so this measures how widely the step's activation
    boundary motion spreads across units.
    """
    if trace.neuron_switch_counts is None:
        raise InvalidInputError("trace did not record activation patterns")
    if trace.config.activation.is_linear:
        return 0.0
    T = trace.steps_run
    lo = max(start, 1)
    flips = float(trace.neuron_switch_counts[lo:T].sum())
    denom = max(T - lo, 1) * trace.hidden_units
    return flips / denom if denom else 0.0


def eos_dwell_fraction(snapshots, eta: float, band: float = 0.25) -> float:
    """Fraction of sampled steps with |lambda_max * eta - 2| < band."""
    if not snapshots:
        return 0.0
    lams = np.array([s.lambda_max for s in snapshots])
    return float(np.mean(np.abs(lams * eta - 2.0) < band))


def is_at_eos(snapshots, eta: float, band: float = 0.25, dwell: float = 0.2) -> bool:
    return eos_dwell_fraction(snapshots, eta, band) >= dwell


def profile_to_csv(profile: CompressionProfile, path) -> None:
    with open(path, "w") as fh:
        fh.write("step,lambda_max,q_margin,jtj_lambda_max\n")
        for s in profile.snapshots:
            fh.write(f"{s.step},{s.lambda_max:.17g},{s.q_margin:.17g},{s.jtj_lambda_max:.17g}\n")
