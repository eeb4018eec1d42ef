"""Truncated SVD with a singular-value-mass threshold, plus entropy diagnostics.

The rank is cut at the smallest Delta whose retained singular values carry at
least a fraction ``epsilon`` of the total mass. By default the mass is the
plain sum of singular values; ``mass="squared"`` switches to the energy
(sum-of-squares) reading.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError

__all__ = ["TruncatedSvd", "SvdDiagnostics", "truncated_svd", "svd_diagnostics"]


@dataclass(frozen=True)
class TruncatedSvd:
    """Rank-``delta`` factorization ``u @ diag(s) @ v`` of a matrix.

    ``spectrum`` holds all numerically nonzero singular values (length
    ``full_rank``); ``s`` is its leading ``delta`` entries and
    ``discarded_mass`` the plain sum of the rest.
    """

    u: np.ndarray
    s: np.ndarray
    v: np.ndarray
    delta: int
    full_rank: int
    discarded_mass: float
    spectrum: np.ndarray

    @property
    def discarded_energy(self):
        """Sum of squares of the dropped singular values."""
        return float(np.sum(self.spectrum[self.delta:] ** 2))

    def reconstruct(self):
        return (self.u * self.s) @ self.v


@dataclass(frozen=True)
class SvdDiagnostics:
    """Entropy of the singular-value distribution and the share lost to truncation."""

    entropy: float
    truncation_loss: float


def _fix_signs(u, v):
    """Make the largest-magnitude entry of each u column nonnegative, in place."""
    for j in range(u.shape[1]):
        i = int(np.argmax(np.abs(u[:, j])))
        if u[i, j] < 0:
            u[:, j] = -u[:, j]
            v[j, :] = -v[j, :]


def truncated_svd(w, epsilon, mass="sum"):
    """Truncate the SVD of ``w`` at the smallest rank retaining mass >= epsilon.

    The retained fraction is measured against all numerically nonzero
    singular values (those above ``max(m, n) * eps * s_1``). A boundary hit
    (retained fraction exactly ``epsilon``) keeps that rank.
    """
    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 2:
        raise ValueError(f"expected a matrix, got an order-{w.ndim} array")
    if not 0.0 < epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in (0, 1], got {epsilon}")
    if mass not in ("sum", "squared"):
        raise ValueError(f"mass must be 'sum' or 'squared', got {mass!r}")
    if not np.any(w):
        raise DegenerateInputError("cannot truncate an all-zero matrix")

    u, s, v = np.linalg.svd(w, full_matrices=False)
    tol = max(w.shape) * np.finfo(np.float64).eps * s[0]
    rank = int(np.count_nonzero(s >= tol))
    u, s, v = u[:, :rank].copy(), s[:rank].copy(), v[:rank].copy()
    _fix_signs(u, v)

    weights = s if mass == "sum" else s**2
    cum = np.cumsum(weights)
    delta = int(np.searchsorted(cum / cum[-1], epsilon, side="left")) + 1
    delta = min(delta, rank)

    return TruncatedSvd(
        u=u[:, :delta],
        s=s[:delta],
        v=v[:delta],
        delta=delta,
        full_rank=rank,
        discarded_mass=float(np.sum(s[delta:])),
        spectrum=s,
    )


def svd_diagnostics(svd):
    """Entropy (bits) of the normalized spectrum and the entropy mass discarded."""
    p = svd.spectrum / np.sum(svd.spectrum)
    terms = -p * np.log2(p)
    return SvdDiagnostics(
        entropy=float(np.sum(terms)),
        truncation_loss=float(np.sum(terms[svd.delta:])),
    )
