"""Bias-free MLPs: initialization, cached forward pass, exact backward pass.

Layout convention: samples are rows, so a layer maps ``a @ W.T`` with W of
shape (fan_out, fan_in).  The hand-derived backward pass below is the object
under test throughout the package, so it is validated against finite
differences rather than any autodiff framework.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidInputError
from .numerics import make_rng


@dataclass(frozen=True)
class Activation:
    """Leaky-ReLU family sigma_a(z) = z for z >= 0, a*z otherwise.

    a=1 is the identity, a=0 is ReLU; the family stays positively
    1-homogeneous for every a in [0, 1].  The derivative at exactly 0 is a
    (so 0 for ReLU), the subgradient convention used everywhere here.
    """

    slope: float

    def __post_init__(self):
        if not 0.0 <= self.slope <= 1.0:
            raise InvalidInputError(f"activation slope must be in [0, 1], got {self.slope}")

    @property
    def is_linear(self) -> bool:
        return self.slope == 1.0

    def apply(self, z: np.ndarray) -> np.ndarray:
        if self.is_linear:
            return z
        return np.where(z >= 0, z, self.slope * z)

    def deriv(self, z: np.ndarray) -> np.ndarray:
        if self.is_linear:
            return np.ones_like(z)
        return np.where(z > 0, 1.0, self.slope)


LINEAR = Activation(1.0)
RELU = Activation(0.0)


def leaky(a: float) -> Activation:
    return Activation(a)


@dataclass
class MlpParams:
    weights: list          # weights[l] has shape (h_{l+1}, h_l)
    biases: Optional[list] = None  # per-layer (h_{l+1},) vectors when enabled

    @property
    def widths(self):
        return [self.weights[0].shape[1]] + [w.shape[0] for w in self.weights]

    @property
    def depth(self):
        return len(self.weights)

    @property
    def num_params(self):
        p = sum(w.size for w in self.weights)
        if self.biases is not None:
            p += sum(b.size for b in self.biases)
        return p

    def copy(self) -> "MlpParams":
        return MlpParams(
            weights=[w.copy() for w in self.weights],
            biases=None if self.biases is None else [b.copy() for b in self.biases],
        )


@dataclass
class ForwardCache:
    preacts: list   # hidden pre-activations z_l, each (n, h_l)
    acts: list      # [input, post-activations...], len L, acts[l] feeds layer l
    logits: np.ndarray  # (n, C)


@dataclass
class LayerGrads:
    weights: list
    biases: Optional[list] = None


def init_kaiming_balanced(widths, seed, bias=False) -> MlpParams:
    """Layer l entries ~ N(0, 2/fan_in); biases (when enabled) start at zero."""
    if len(widths) < 3 or any(w <= 0 for w in widths):
        raise InvalidInputError(f"widths must be >= 3 positive entries, got {widths}")
    rng = make_rng(seed)
    weights = []
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        std = np.sqrt(2.0 / fan_in)
        weights.append(std * rng.standard_normal((fan_out, fan_in)))
    biases = [np.zeros(w) for w in widths[1:]] if bias else None
    return MlpParams(weights=weights, biases=biases)


def forward(p: MlpParams, x: np.ndarray, act: Activation) -> ForwardCache:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != p.widths[0]:
        raise InvalidInputError(
            f"input has shape {x.shape}, expected (n, {p.widths[0]})"
        )
    acts = [x]
    preacts = []
    h = x
    for l, w in enumerate(p.weights[:-1]):
        z = h @ w.T
        if p.biases is not None:
            z = z + p.biases[l]
        preacts.append(z)
        h = act.apply(z)
        acts.append(h)
    logits = h @ p.weights[-1].T
    if p.biases is not None:
        logits = logits + p.biases[-1]
    return ForwardCache(preacts=preacts, acts=acts, logits=logits)


def backward(p: MlpParams, cache: ForwardCache, dlogits: np.ndarray, act: Activation) -> LayerGrads:
    """Exact reverse-mode gradients of the scalar loss whose logit gradient is dlogits."""
    n, c = cache.logits.shape
    dlogits = np.asarray(dlogits, dtype=np.float64)
    if dlogits.shape != (n, c):
        raise InvalidInputError(
            f"dlogits has shape {dlogits.shape}, expected {(n, c)}"
        )
    L = p.depth
    gw = [None] * L
    gb = [None] * L if p.biases is not None else None
    d = dlogits
    gw[L - 1] = d.T @ cache.acts[L - 1]
    if gb is not None:
        gb[L - 1] = d.sum(axis=0)
    for l in range(L - 2, -1, -1):
        d = (d @ p.weights[l + 1]) * act.deriv(cache.preacts[l])
        gw[l] = d.T @ cache.acts[l]
        if gb is not None:
            gb[l] = d.sum(axis=0)
    return LayerGrads(weights=gw, biases=gb)


def trace_pairing(p: MlpParams, g: LayerGrads):
    """Per-layer tr(W_l^T g_l); equal across layers at bias-free points."""
    if len(g.weights) != p.depth:
        raise InvalidInputError("gradient depth does not match parameters")
    return np.array([float(np.sum(w * gw)) for w, gw in zip(p.weights, g.weights)])


CHECKPOINT_VERSION = 1


def save_checkpoint(p: MlpParams, path) -> None:
    payload = {
        "version": CHECKPOINT_VERSION,
        "widths": p.widths,
        "bias": p.biases is not None,
        "weights": [w.tolist() for w in p.weights],
    }
    if p.biases is not None:
        payload["biases"] = [b.tolist() for b in p.biases]
    with open(path, "w") as fh:
        json.dump(payload, fh)


def load_checkpoint(path) -> MlpParams:
    with open(path) as fh:
        payload = json.load(fh)
    if payload.get("version") != CHECKPOINT_VERSION:
        raise InvalidInputError(f"unsupported checkpoint version: {payload.get('version')}")
    weights = [np.asarray(w, dtype=np.float64) for w in payload["weights"]]
    biases = None
    if payload.get("bias"):
        biases = [np.asarray(b, dtype=np.float64) for b in payload["biases"]]
    return MlpParams(weights=weights, biases=biases)
