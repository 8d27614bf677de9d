"""Dense symmetric eigensolvers, power iteration, and seeded randomness.

Everything downstream (data generation, training, Hessian analysis) goes
through the helpers here so that determinism and tolerances are enforced in
one place.  All arithmetic is float64.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, NumericalFailureError

SYM_TOL = 1e-10


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Deterministic 64-bit generator.

    Parallel work derives independent streams by varying ``stream`` while
    keeping the experiment seed fixed.
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, stream])))


@dataclass
class EigenDecomposition:
    """Real spectrum sorted descending; eigenvector columns match the order."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def sym_eig(a: np.ndarray) -> EigenDecomposition:
    """Full eigendecomposition of a symmetric matrix, eigenvalues descending.

    Raises InvalidInputError for non-square or asymmetric input and
    NumericalFailureError if the underlying solver does not converge.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidInputError(f"sym_eig expects a square matrix, got shape {a.shape}")
    scale = np.linalg.norm(a)
    asym = np.linalg.norm(a - a.T)
    if asym > SYM_TOL * max(scale, 1.0):
        raise InvalidInputError(
            f"matrix is not symmetric: ||A - A^T|| = {asym:.3e} (scale {scale:.3e})"
        )
    try:
        evals, evecs = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - eigh rarely fails
        raise NumericalFailureError(f"eigendecomposition failed: {exc}") from exc
    order = np.argsort(evals)[::-1]
    return EigenDecomposition(evals[order], evecs[:, order])


def power_iteration(apply, dim, tol=1e-6, max_iter=1000, rng=None):
    """Largest eigenvalue of a symmetric PSD operator given only matvecs.

    Converges when the Rayleigh quotient stabilizes to within a fraction of
    ``tol``; raises NumericalFailureError (carrying the last estimate) if the
    iteration cap is hit first.
    """
    if dim < 1:
        raise InvalidInputError("power_iteration needs dim >= 1")
    if rng is None:
        rng = make_rng(0)
    v = rng.standard_normal(dim)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        w = apply(v)
        lam_new = float(np.dot(v, w))
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
        if abs(lam_new - lam) <= 0.1 * tol * max(abs(lam_new), 1e-30):
            return lam_new
        lam = lam_new
    raise NumericalFailureError(
        f"power iteration did not converge in {max_iter} iterations", estimate=lam
    )


def gaussian_matrix(rng: np.random.Generator, rows: int, cols: int, std: float) -> np.ndarray:
    """I.i.d. normal matrix with the given standard deviation."""
    if std <= 0:
        raise InvalidInputError("gaussian_matrix requires std > 0")
    return std * rng.standard_normal((rows, cols))
