"""Shared test oracles.

The chain rebuild here is intentionally independent of the library's own
reconstruction path: it walks the factor blocks with tensordot only.
"""

import numpy as np

from mpskit.tensor import frobenius_norm, permute_modes


def contract_chain(model):
    """Rebuild the full tensor (chain layout) from the factor blocks."""
    g = np.stack(model.cores, axis=1)
    blocks = list(model.left_factors) + [g] + list(model.right_factors)
    acc = np.ones((1, 1))
    for b in blocks:
        acc = np.tensordot(acc, b, axes=([-1], [0]))
    return acc[0, ..., 0]


def rebuild_sample_mode_last(model):
    """Chain rebuild mapped back to the sample-mode-last layout."""
    return permute_modes(contract_chain(model), model.plan.inverse())


def rel_err(approx, exact):
    return frobenius_norm(approx - exact) / frobenius_norm(exact)
