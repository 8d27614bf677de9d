"""Gaussian-mixture classification datasets and their covariance spectrum.

Sampling convention (documented, since alternatives exist): class means are
drawn i.i.d. standard normal and rescaled so the mean pairwise distance
between class means equals separation * sqrt(2); per-sample noise is unit
variance isotropic; samples are assigned round-robin to classes and then
shuffled with the dataset seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .numerics import make_rng, sym_eig


@dataclass
class Dataset:
    x: np.ndarray          # (n, d)
    labels: np.ndarray     # (n,) ints in [0, c)
    onehot: np.ndarray     # (n, c)
    n: int
    d: int
    c: int
    separation: float
    seed: int


@dataclass
class DataSpectrum:
    """Eigendecomposition of the uncentered second moment X^T X / n."""

    eigenvalues: np.ndarray  # (d,) descending
    basis: np.ndarray        # (d, d), columns are eigenvectors


def gen_gaussian_mixture(n, d, c, separation, seed) -> Dataset:
    if c < 2 or n < c:
        raise InvalidInputError(f"need n >= c >= 2, got n={n}, c={c}")
    if d < 1:
        raise InvalidInputError("need d >= 1")
    if separation < 0:
        raise InvalidInputError("separation must be >= 0")
    rng = make_rng(seed)
    means = rng.standard_normal((c, d))
    dists = [
        np.linalg.norm(means[i] - means[j]) for i in range(c) for j in range(i + 1, c)
    ]
    mean_dist = float(np.mean(dists))
    if separation == 0 or mean_dist == 0:
        means = np.zeros((c, d))
    else:
        means *= separation * math.sqrt(2.0) / mean_dist
    labels = np.arange(n) % c
    labels = labels[rng.permutation(n)]
    x = means[labels] + rng.standard_normal((n, d))
    onehot = np.zeros((n, c))
    onehot[np.arange(n), labels] = 1.0
    return Dataset(x=x, labels=labels, onehot=onehot, n=n, d=d, c=c,
                   separation=float(separation), seed=int(seed))


def data_cov_spectrum(ds: Dataset) -> DataSpectrum:
    """Spectrum of X^T X / n (uncentered, matching the mode analysis)."""
    if ds.n < 2:
        raise InvalidInputError("need at least 2 samples")
    cov = ds.x.T @ ds.x / ds.n
    cov = 0.5 * (cov + cov.T)
    dec = sym_eig(cov)
    return DataSpectrum(eigenvalues=dec.eigenvalues, basis=dec.eigenvectors)


def save_csv(ds: Dataset, path) -> None:
    """Write one row per sample: features (17 significant digits) then label."""
    header = ",".join([f"f{j}" for j in range(ds.d)] + ["label"])
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for i in range(ds.n):
            feats = ",".join(f"{v:.17g}" for v in ds.x[i])
            fh.write(f"{feats},{int(ds.labels[i])}\n")
