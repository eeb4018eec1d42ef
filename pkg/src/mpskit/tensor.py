"""Dense tensor primitives: matricization, mode products, mode permutation.

Tensors are plain float64 ``numpy.ndarray`` values. The linearization
convention throughout the package is column-major ("first index varies
fastest"), so mode-1 and leading-prefix unfoldings are pure reinterpretations
of the underlying buffer. Mode indices in the public API are 1-based.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "as_tensor",
    "matricize",
    "refold",
    "matricize_prefix",
    "mode_n_product",
    "frobenius_norm",
    "PermutationPlan",
    "permute_modes",
]


def as_tensor(values, shape=None):
    """Coerce ``values`` to a float64 tensor, optionally unflattening a buffer.

    When ``shape`` is given, ``values`` must be a flat buffer of matching
    length; it is folded with the first index varying fastest, inverting
    ``t.ravel(order="F")``.
    """
    arr = np.asarray(values, dtype=np.float64)
    if shape is not None:
        shape = tuple(int(s) for s in shape)
        expected = int(np.prod(shape, dtype=np.int64))
        if arr.size != expected:
            raise ValueError(
                f"buffer of {arr.size} values cannot fill shape {shape}"
            )
        arr = arr.reshape(shape, order="F")
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if min(arr.shape) < 1:
        raise ValueError(f"tensor extents must all be >= 1, got {arr.shape}")
    return np.asfortranarray(arr)


def _check_mode(t, mode):
    if not 1 <= mode <= t.ndim:
        raise ValueError(f"mode {mode} out of range for order-{t.ndim} tensor")


def matricize(t, mode):
    """Unfold ``t`` along ``mode`` (1-based) into an I_mode x (prod of rest) matrix.

    Columns enumerate the remaining modes with the earliest one fastest.
    """
    t = np.asarray(t)
    _check_mode(t, mode)
    return np.moveaxis(t, mode - 1, 0).reshape(t.shape[mode - 1], -1, order="F")


def refold(m, mode, shape):
    """Inverse of :func:`matricize`: fold matrix ``m`` back into ``shape``."""
    shape = tuple(int(s) for s in shape)
    if not 1 <= mode <= len(shape):
        raise ValueError(f"mode {mode} out of range for shape {shape}")
    m = np.asarray(m)
    rest = shape[: mode - 1] + shape[mode:]
    folded = m.reshape((shape[mode - 1],) + rest, order="F")
    return np.moveaxis(folded, 0, mode - 1)


def matricize_prefix(t, j):
    """Unfold ``t`` by grouping modes 1..j into rows and the rest into columns.

    Both groups are linearized with their earliest mode fastest; ``j=1``
    coincides with ``matricize(t, 1)``.
    """
    t = np.asarray(t)
    if not 1 <= j <= t.ndim - 1:
        raise ValueError(
            f"prefix length {j} out of range for order-{t.ndim} tensor"
        )
    rows = int(np.prod(t.shape[:j], dtype=np.int64))
    return t.reshape(rows, -1, order="F")


def mode_n_product(t, a, mode):
    """Contract matrix ``a`` (J x I_mode) against mode ``mode`` of ``t``."""
    t = np.asarray(t, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64)
    _check_mode(t, mode)
    if a.ndim != 2 or a.shape[1] != t.shape[mode - 1]:
        raise ValueError(
            f"matrix of shape {a.shape} cannot contract mode {mode} "
            f"of extent {t.shape[mode - 1]}"
        )
    new_shape = t.shape[: mode - 1] + (a.shape[0],) + t.shape[mode:]
    return refold(a @ matricize(t, mode), mode, new_shape)


def frobenius_norm(t):
    """Square root of the sum of squared entries."""
    return float(np.linalg.norm(np.asarray(t, dtype=np.float64).ravel()))


@dataclass(frozen=True)
class PermutationPlan:
    """A mode reordering plus the position the sample mode occupies after it.

    ``perm`` is 1-based: output mode ``k`` carries input mode ``perm[k-1]``.
    """

    perm: tuple
    core_position: int = 1

    def __post_init__(self):
        perm = tuple(int(p) for p in self.perm)
        object.__setattr__(self, "perm", perm)
        if sorted(perm) != list(range(1, len(perm) + 1)):
            raise ValueError(f"{perm} is not a permutation of 1..{len(perm)}")
        if not 1 <= self.core_position <= len(perm):
            raise ValueError(
                f"core position {self.core_position} out of range 1..{len(perm)}"
            )

    def inverse(self):
        """Plan that undoes this one."""
        inv = [0] * len(self.perm)
        for k, p in enumerate(self.perm):
            inv[p - 1] = k + 1
        return PermutationPlan(tuple(inv), self.perm[self.core_position - 1])


def permute_modes(t, plan):
    """Reorder the modes of ``t`` according to ``plan``."""
    t = np.asarray(t)
    if len(plan.perm) != t.ndim:
        raise ValueError(
            f"plan over {len(plan.perm)} modes cannot permute an "
            f"order-{t.ndim} tensor"
        )
    return np.transpose(t, axes=[p - 1 for p in plan.perm])
