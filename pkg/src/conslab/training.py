"""Losses, optimizers, the full-batch training loop, and gradient-flow RK4.

The trainer records everything the downstream analyses need: per-layer
gradient norms, conservation quantities, the stably-computed per-step drift,
activation switch counts, correct-class probabilities, optional data-mode
projections of the gradient imbalance, and sampled Hessian snapshots.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .data import Dataset
from .errors import InvalidInputError
from .model import (Activation, LayerGrads, MlpParams, backward, forward,
                    init_kaiming_balanced)

MSE = "mse"
CE = "ce"

DIVERGENCE_THRESHOLD = 1e12


def loss_and_dlogits(logits: np.ndarray, ds: Dataset, kind: str):
    """Loss value and exact logit gradient.

    MSE is the half-scaled squared error averaged over samples, so
    dlogits = (logits - Y) / n; CE is mean softmax cross-entropy with
    dlogits = (p - Y) / n.
    """
    n = ds.n
    if logits.shape != (n, ds.c):
        raise InvalidInputError(f"logits shape {logits.shape}, expected {(n, ds.c)}")
    if kind == MSE:
        r = logits - ds.onehot
        return 0.5 * float(np.sum(r * r)) / n, r / n
    if kind == CE:
        z = logits - logits.max(axis=1, keepdims=True)
        ez = np.exp(z)
        p = ez / ez.sum(axis=1, keepdims=True)
        logp = z - np.log(ez.sum(axis=1, keepdims=True))
        loss = -float(np.mean(logp[np.arange(n), ds.labels]))
        return loss, (p - ds.onehot) / n
    raise InvalidInputError(f"unknown loss kind: {kind!r}")


def softmax_probs(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    ez = np.exp(z)
    return ez / ez.sum(axis=1, keepdims=True)


@dataclass
class OptimizerKind:
    kind: str = "gd"            # "gd" | "adam"
    eta: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if self.eta <= 0:
            raise InvalidInputError("learning rate must be positive")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise InvalidInputError("Adam betas must lie in [0, 1)")


@dataclass
class AdamState:
    m: list
    v: list
    mb: Optional[list]
    vb: Optional[list]
    t: int = 0


def init_opt_state(p: MlpParams, opt: OptimizerKind):
    if opt.kind != "adam":
        return None
    return AdamState(
        m=[np.zeros_like(w) for w in p.weights],
        v=[np.zeros_like(w) for w in p.weights],
        mb=None if p.biases is None else [np.zeros_like(b) for b in p.biases],
        vb=None if p.biases is None else [np.zeros_like(b) for b in p.biases],
    )


def step(p: MlpParams, g: LayerGrads, opt: OptimizerKind, state=None):
    """One optimizer step; returns (new params, new state)."""
    if opt.kind == "gd":
        weights = [w - opt.eta * gw for w, gw in zip(p.weights, g.weights)]
        biases = None
        if p.biases is not None:
            biases = [b - opt.eta * gb for b, gb in zip(p.biases, g.biases)]
        return MlpParams(weights=weights, biases=biases), None
    if opt.kind != "adam":
        raise InvalidInputError(f"unknown optimizer: {opt.kind!r}")
    if state is None:
        state = init_opt_state(p, opt)
    state.t += 1
    bc1 = 1.0 - opt.beta1 ** state.t
    bc2 = 1.0 - opt.beta2 ** state.t

    def adam_update(w, gw, m, v):
        m *= opt.beta1
        m += (1 - opt.beta1) * gw
        v *= opt.beta2
        v += (1 - opt.beta2) * gw * gw
        return w - opt.eta * (m / bc1) / (np.sqrt(v / bc2) + opt.eps)

    weights = [adam_update(w, gw, m, v)
               for w, gw, m, v in zip(p.weights, g.weights, state.m, state.v)]
    biases = None
    if p.biases is not None:
        biases = [adam_update(b, gb, mb, vb)
                  for b, gb, mb, vb in zip(p.biases, g.biases, state.mb, state.vb)]
    return MlpParams(weights=weights, biases=biases), state


@dataclass
class TrainConfig:
    widths: list
    activation: Activation
    loss: str = MSE
    opt: OptimizerKind = field(default_factory=OptimizerKind)
    steps: int = 1000
    seed: int = 42
    bias: bool = False
    record_patterns: bool = False
    record_q: bool = False
    lambda_stride: int = 0      # 0 disables Hessian snapshots
    mode_basis: Optional[np.ndarray] = None  # (d, d) basis for imbalance projection

    def __post_init__(self):
        if self.steps < 1:
            raise InvalidInputError("steps must be >= 1")
        if self.lambda_stride < 0:
            raise InvalidInputError("lambda_stride must be >= 0")


@dataclass
class TrainTrace:
    config: TrainConfig
    loss: np.ndarray            # (T,)
    grad_sq: np.ndarray         # (T, L) squared Frobenius norms per layer
    cons: np.ndarray            # (T+1, L-1) conservation quantities, row 0 = init
    delta_c: np.ndarray         # (T, L-1) measured per-step change (stable form)
    imbalance: np.ndarray       # (T, L-1) delta_l(t) = grad_sq[l+1] - grad_sq[l]
    switch_counts: Optional[np.ndarray] = None  # (T,) sign flips vs previous step
    neuron_switch_counts: Optional[np.ndarray] = None  # (T,) units flipped on >= 1 sample
    hidden_units: int = 0
    n_samples: int = 0
    q: Optional[np.ndarray] = None              # (T, n) correct-class probabilities
    mode_imbalance: Optional[np.ndarray] = None  # (T, d) per-mode share of delta_1
    snapshots: list = field(default_factory=list)
    params0: Optional[MlpParams] = None
    params_final: Optional[MlpParams] = None
    status: str = "ok"
    steps_run: int = 0

    @property
    def eta(self):
        return self.config.opt.eta


def _norm_sq_per_layer(weights):
    return np.array([float(np.sum(w * w)) for w in weights])


def _stable_delta_norm_sq(after, before):
    # sum((a-b)(a+b)) avoids the catastrophic cancellation of ||a||^2 - ||b||^2
    return np.array([
        float(np.sum((a - b) * (a + b))) for a, b in zip(after, before)
    ])


def _count_switches(prev_patterns, patterns):
    """(entry flips, units with >= 1 flipped sample) between two pattern lists."""
    entries = 0
    units = 0
    for prev, cur in zip(prev_patterns, patterns):
        diff = prev != cur
        entries += int(np.count_nonzero(diff))
        units += int(np.count_nonzero(diff.any(axis=0)))
    return entries, units


def train(cfg: TrainConfig, ds: Dataset) -> TrainTrace:
    """Run T full-batch steps, recording the enabled diagnostics.

    Divergence (non-finite or loss above 1e12) truncates the trace and marks
    status="diverged"; such runs are first-class results for EoS sweeps.
    """
    if cfg.widths[0] != ds.d or cfg.widths[-1] != ds.c:
        raise InvalidInputError(
            f"widths {cfg.widths} do not match dataset (d={ds.d}, C={ds.c})"
        )
    act = cfg.activation
    p = init_kaiming_balanced(cfg.widths, cfg.seed, bias=cfg.bias)
    params0 = p.copy()
    state = init_opt_state(p, cfg.opt)
    L = p.depth
    T = cfg.steps

    loss_hist = np.full(T, np.nan)
    grad_sq = np.full((T, L), np.nan)
    cons = np.full((T + 1, L - 1), np.nan)
    delta_c = np.full((T, L - 1), np.nan)
    imbalance = np.full((T, L - 1), np.nan)
    hidden = int(sum(cfg.widths[1:-1]))
    switch_counts = np.zeros(T) if cfg.record_patterns else None
    neuron_switch_counts = np.zeros(T) if cfg.record_patterns else None
    q_hist = np.full((T, ds.n), np.nan) if (cfg.record_q and cfg.loss == CE) else None
    mode_imb = None
    xu = None
    if cfg.mode_basis is not None:
        if L != 2:
            raise InvalidInputError("mode projection is defined for 2-layer nets only")
        xu = ds.x @ cfg.mode_basis  # (n, d) data expressed per mode
        mode_imb = np.full((T, cfg.mode_basis.shape[1]), np.nan)

    norms = _norm_sq_per_layer(p.weights)
    cons[0] = norms[1:] - norms[:-1]
    prev_pattern = None
    status = "ok"
    steps_run = 0
    snapshots = []

    for t in range(T):
        cache = forward(p, ds.x, act)
        if not np.all(np.isfinite(cache.logits)):
            status = "diverged"
            break
        loss, dlogits = loss_and_dlogits(cache.logits, ds, cfg.loss)
        if not np.isfinite(loss) or loss > DIVERGENCE_THRESHOLD:
            status = "diverged"
            break
        g = backward(p, cache, dlogits, act)

        loss_hist[t] = loss
        gsq = np.array([float(np.sum(gw * gw)) for gw in g.weights])
        grad_sq[t] = gsq
        imbalance[t] = gsq[1:] - gsq[:-1]
        if q_hist is not None:
            probs = softmax_probs(cache.logits)
            q_hist[t] = probs[np.arange(ds.n), ds.labels]
        if switch_counts is not None and not act.is_linear:
            pattern = [z >= 0 for z in cache.preacts]
            if prev_pattern is not None:
                switch_counts[t], neuron_switch_counts[t] = _count_switches(
                    prev_pattern, pattern)
            prev_pattern = pattern
        if mode_imb is not None:
            g1u = g.weights[0] @ cfg.mode_basis   # (h, d): layer-1 grad per mode
            a_k = np.sum(g1u * g1u, axis=0)
            tot = float(a_k.sum())
            if tot > 0:
                mode_imb[t] = a_k * (imbalance[t, 0] / tot)
            else:
                mode_imb[t] = 0.0
        if cfg.lambda_stride and t % cfg.lambda_stride == 0:
            from .spectral import hessian_snapshot  # local import: spectral uses train()
            snapshots.append(hessian_snapshot(p, ds, act, cfg.loss, step=t))

        p_new, state = step(p, g, cfg.opt, state)
        delta_c_layers = _stable_delta_norm_sq(p_new.weights, p.weights)
        delta_c[t] = delta_c_layers[1:] - delta_c_layers[:-1]
        p = p_new
        norms = _norm_sq_per_layer(p.weights)
        cons[t + 1] = norms[1:] - norms[:-1]
        steps_run = t + 1
        if not np.all(np.isfinite(norms)):
            status = "diverged"
            break

    return TrainTrace(
        config=cfg,
        loss=loss_hist,
        grad_sq=grad_sq,
        cons=cons,
        delta_c=delta_c,
        imbalance=imbalance,
        switch_counts=switch_counts,
        neuron_switch_counts=neuron_switch_counts,
        hidden_units=hidden,
        n_samples=ds.n,
        q=q_hist,
        mode_imbalance=mode_imb,
        snapshots=snapshots,
        params0=params0,
        params_final=p.copy(),
        status=status,
        steps_run=steps_run,
    )


@dataclass
class FlowTrace:
    cons: np.ndarray    # (N+1, L-1) conservation quantities along the flow
    times: np.ndarray   # (N+1,)
    loss: np.ndarray    # (N+1,)
    params_final: MlpParams
    status: str = "ok"


def _flow_grad(weights, biases, ds, act, loss_kind):
    p = MlpParams(weights=list(weights), biases=biases)
    cache = forward(p, ds.x, act)
    _, dlogits = loss_and_dlogits(cache.logits, ds, loss_kind)
    g = backward(p, cache, dlogits, act)
    return g.weights


def integrate_flow(p: MlpParams, ds: Dataset, act: Activation, loss_kind: str,
                   duration: float, step_size: float = 1e-4) -> FlowTrace:
    """Classical RK4 integration of d theta/dt = -grad L.

    The O(step^4) global error makes conservation drift attributable to the
    dynamics rather than the integrator.
    """
    if duration < 0 or step_size <= 0:
        raise InvalidInputError("need duration >= 0 and step_size > 0")
    n_steps = int(round(duration / step_size)) if duration > 0 else 0
    w = [wl.copy() for wl in p.weights]
    biases = p.biases
    cons = np.full((n_steps + 1, p.depth - 1), np.nan)
    times = np.arange(n_steps + 1) * step_size
    loss_hist = np.full(n_steps + 1, np.nan)
    status = "ok"

    def record(i):
        norms = _norm_sq_per_layer(w)
        cons[i] = norms[1:] - norms[:-1]
        cache = forward(MlpParams(weights=w, biases=biases), ds.x, act)
        loss, _ = loss_and_dlogits(cache.logits, ds, loss_kind)
        loss_hist[i] = loss
        return loss

    loss0 = record(0)
    h = step_size
    for i in range(n_steps):
        k1 = _flow_grad(w, biases, ds, act, loss_kind)
        k2 = _flow_grad([wl - 0.5 * h * g for wl, g in zip(w, k1)], biases, ds, act, loss_kind)
        k3 = _flow_grad([wl - 0.5 * h * g for wl, g in zip(w, k2)], biases, ds, act, loss_kind)
        k4 = _flow_grad([wl - h * g for wl, g in zip(w, k3)], biases, ds, act, loss_kind)
        for wl, g1, g2, g3, g4 in zip(w, k1, k2, k3, k4):
            wl -= (h / 6.0) * (g1 + 2 * g2 + 2 * g3 + g4)
        loss = record(i + 1)
        if not np.isfinite(loss) or loss > DIVERGENCE_THRESHOLD:
            status = "diverged"
            cons = cons[: i + 2]
            times = times[: i + 2]
            loss_hist = loss_hist[: i + 2]
            break

    return FlowTrace(cons=cons, times=times, loss=loss_hist,
                     params_final=MlpParams(weights=w, biases=biases), status=status)


def trace_to_csv(trace: TrainTrace, path) -> None:
    """One row per step; columns documented in the header."""
    L = trace.grad_sq.shape[1]
    npairs = trace.cons.shape[1]
    cols = ["step", "loss"]
    cols += [f"grad_sq_l{l + 1}" for l in range(L)]
    cols += [f"cons_{l + 1}" for l in range(npairs)]
    cols += [f"delta_c_{l + 1}" for l in range(npairs)]
    cols += [f"imbalance_{l + 1}" for l in range(npairs)]
    if trace.switch_counts is not None:
        cols.append("switch_count")
    with open(path, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for t in range(trace.steps_run):
            row = [str(t), f"{trace.loss[t]:.17g}"]
            row += [f"{v:.17g}" for v in trace.grad_sq[t]]
            row += [f"{v:.17g}" for v in trace.cons[t + 1]]
            row += [f"{v:.17g}" for v in trace.delta_c[t]]
            row += [f"{v:.17g}" for v in trace.imbalance[t]]
            if trace.switch_counts is not None:
                row.append(str(int(trace.switch_counts[t])))
            fh.write(",".join(row) + "\n")


def trace_summary(trace: TrainTrace) -> dict:
    T = trace.steps_run
    summary = {
        "status": trace.status,
        "steps_run": T,
        "final_loss": float(trace.loss[T - 1]) if T else None,
        "cons_init": trace.cons[0].tolist(),
        "cons_final": trace.cons[T].tolist() if T else None,
        "total_drift": np.abs(trace.cons[T] - trace.cons[0]).tolist() if T else None,
    }
    if trace.q is not None and T:
        summary["q_min_final"] = float(np.min(trace.q[T - 1]))
        summary["q_mean_final"] = float(np.mean(trace.q[T - 1]))
    return summary


def save_trace_summary(trace: TrainTrace, path) -> None:
    with open(path, "w") as fh:
        json.dump(trace_summary(trace), fh, indent=2, sort_keys=True)
