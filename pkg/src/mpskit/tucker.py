"""Orthogonal Tucker baseline: HOSVD-initialized alternating least squares.

A stack of K samples (sample mode last) is approximated by a smaller core
tensor contracted with one orthogonal factor matrix per sample mode. The
factors are shared across samples; slices of the core along the sample mode
are the per-sample compressed features, and unseen samples are projected
through the transposed factors.
"""

from dataclasses import dataclass, replace

import numpy as np

from . import _binio
from .errors import DegenerateInputError, FormatError
from .linalg import truncated_svd
from .tensor import frobenius_norm, matricize, mode_n_product

__all__ = [
    "TuckerModel",
    "hooi_train",
    "tucker_compress_train",
    "tucker_compress_test",
    "truncate_tucker",
    "save_tucker_model",
    "load_tucker_model",
]

TUCKER_MAGIC = b"TUK1"
TUCKER_VERSION = 1

_CONVERGENCE_RTOL = 1e-6


@dataclass(frozen=True)
class TuckerModel:
    """Shared orthogonal factors plus the stacked per-sample core tensor.

    ``factors[j]`` has shape (I_{j+1}, ranks[j]); ``core`` has the ranks as
    leading extents and the sample count last. ``fit_history`` lists the
    squared-error objective after initialization and after each sweep;
    ``residual_bounds`` carries per-mode lower bounds on that objective in
    two readings (see :func:`residual_lower_bounds`).
    """

    factors: list
    core: np.ndarray
    ranks: tuple
    fit_residual: float
    iterations_run: int
    fit_history: list
    epsilon: "float | None"
    residual_bounds: list

    @property
    def n_features(self):
        return int(np.prod(self.ranks, dtype=np.int64))

    @property
    def sample_shape(self):
        return tuple(f.shape[0] for f in self.factors)

    @property
    def n_samples(self):
        return self.core.shape[-1]

    def reconstruct(self):
        """Contract core and factors back into a full tensor, sample mode last."""
        t = self.core
        for j, u in enumerate(self.factors, start=1):
            t = mode_n_product(t, u, j)
        return t


def _leading_vectors(mat, count):
    """First ``count`` left singular vectors, orthonormally completed if the
    unfolding is too narrow, with deterministic column signs."""
    u, s, _ = np.linalg.svd(mat, full_matrices=count > min(mat.shape))
    u = u[:, :count].copy()
    for j in range(u.shape[1]):
        i = int(np.argmax(np.abs(u[:, j])))
        if u[i, j] < 0:
            u[:, j] = -u[:, j]
    return u, s


def residual_lower_bounds(s_by_mode, ranks):
    """Per-mode lower bounds on the squared fit error of a rank-constrained fit.

    For each mode the bound is the tail sum of the squared singular values of
    that unfolding. Returned as (short, full) pairs: ``short`` drops one more
    term than ``full`` (the two off-by-one readings of the tail length);
    ``full`` counts all ``rank - Delta`` discarded values and is the actual
    bound.
    """
    bounds = []
    for s, delta in zip(s_by_mode, ranks):
        energy = s**2
        full = float(np.sum(energy[delta:]))
        short = float(np.sum(energy[delta + 1:]))
        bounds.append((short, full))
    return bounds


def hooi_train(x, ranks=None, max_iters=10, epsilon=None):
    """Fit the orthogonal factors and core by HOSVD init plus ALS sweeps.

    Exactly one of ``ranks`` (per-mode target dims) and ``epsilon`` must be
    given; with ``epsilon`` each mode's rank is chosen once at initialization
    by the singular-value-mass rule applied to that mode's unfolding. Sweeps
    stop at ``max_iters`` or when the relative objective improvement drops
    below 1e-6.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim < 2:
        raise ValueError("input must have at least one sample mode plus the sample axis")
    if (ranks is None) == (epsilon is None):
        raise ValueError("give exactly one of ranks and epsilon")
    if max_iters < 1:
        raise ValueError(f"max_iters must be >= 1, got {max_iters}")
    if not np.any(x):
        raise DegenerateInputError("cannot compress an all-zero tensor")
    n_modes = x.ndim - 1

    factors = []
    spectra = []
    picked = []
    if epsilon is not None:
        for j in range(1, n_modes + 1):
            f = truncated_svd(matricize(x, j), epsilon)
            factors.append(f.u.copy())
            spectra.append(f.spectrum)
            picked.append(f.delta)
    else:
        ranks = tuple(int(r) for r in ranks)
        if len(ranks) != n_modes:
            raise ValueError(
                f"need {n_modes} ranks for {n_modes} sample modes, got {len(ranks)}"
            )
        for j, r in enumerate(ranks, start=1):
            if not 1 <= r <= x.shape[j - 1]:
                raise ValueError(
                    f"rank {r} exceeds extent {x.shape[j - 1]} of mode {j}"
                )
            u, s = _leading_vectors(matricize(x, j), r)
            factors.append(u)
            spectra.append(s)
            picked.append(r)
    ranks = tuple(picked)

    norm_sq = frobenius_norm(x) ** 2

    def objective():
        core = x
        for j, u in enumerate(factors, start=1):
            core = mode_n_product(core, u.T, j)
        # Factors are orthonormal, so the residual splits off the core energy.
        return core, max(norm_sq - frobenius_norm(core) ** 2, 0.0)

    core, phi = objective()
    history = [phi]
    iterations = 0
    for _ in range(max_iters):
        for j in range(1, n_modes + 1):
            partial = x
            for m, u in enumerate(factors, start=1):
                if m != j:
                    partial = mode_n_product(partial, u.T, m)
            factors[j - 1], _ = _leading_vectors(matricize(partial, j), ranks[j - 1])
        core, phi = objective()
        iterations += 1
        prev = history[-1]
        history.append(phi)
        if phi <= np.finfo(np.float64).eps ** 2 * norm_sq:
            break
        if prev - phi <= _CONVERGENCE_RTOL * prev:
            break

    return TuckerModel(
        factors=factors,
        core=core,
        ranks=ranks,
        fit_residual=phi,
        iterations_run=iterations,
        fit_history=history,
        epsilon=epsilon,
        residual_bounds=residual_lower_bounds(spectra, ranks),
    )


def tucker_compress_train(model):
    """Per-sample compressed cores: slices of the core along the sample mode."""
    return [model.core[..., k] for k in range(model.n_samples)]


def tucker_compress_test(model, y):
    """Project one unseen sample through the transposed factors."""
    y = np.asarray(y, dtype=np.float64)
    if y.shape != model.sample_shape:
        raise ValueError(
            f"sample of shape {y.shape} does not match training extents "
            f"{model.sample_shape}"
        )
    for j, u in enumerate(model.factors, start=1):
        y = mode_n_product(y, u.T, j)
    return y


def truncate_tucker(model, dims):
    """Crop the core (and factor columns) to the leading dims of each mode.

    ``dims`` may be shorter than the mode count; unspecified modes keep their
    full rank.
    """
    dims = tuple(int(d) for d in dims)
    if len(dims) > len(model.ranks):
        raise ValueError(
            f"{len(dims)} truncation dims for {len(model.ranks)} modes"
        )
    dims = dims + model.ranks[len(dims):]
    for d, r in zip(dims, model.ranks):
        if not 1 <= d <= r:
            raise ValueError(f"truncation dims {dims} must lie within {model.ranks}")

    index = tuple(slice(0, d) for d in dims) + (slice(None),)
    return replace(
        model,
        factors=[u[:, :d] for u, d in zip(model.factors, dims)],
        core=model.core[index],
        ranks=dims,
    )


def save_tucker_model(model, path):
    """Write the model to a self-describing little-endian binary container."""
    n_modes = len(model.factors)
    with open(path, "wb") as fh:
        fh.write(TUCKER_MAGIC)
        _binio.write_u8(fh, TUCKER_VERSION)
        _binio.write_u8(fh, 1 if model.epsilon is not None else 0)
        _binio.write_f64(fh, model.epsilon if model.epsilon is not None else 0.0)
        _binio.write_u8(fh, n_modes)
        _binio.write_u64(fh, *model.sample_shape, model.n_samples)
        _binio.write_u64(fh, *model.ranks)
        _binio.write_f64(fh, model.fit_residual)
        _binio.write_u64(fh, model.iterations_run)
        for u in model.factors:
            _binio.write_array(fh, u)
        _binio.write_array(fh, model.core)


def load_tucker_model(path):
    """Read a model written by :func:`save_tucker_model`."""
    with open(path, "rb") as fh:
        r = _binio.ByteReader(fh)
        r.magic(TUCKER_MAGIC)
        version = r.u8()
        if version != TUCKER_VERSION:
            raise FormatError(f"unsupported version {version}", offset=4)
        has_eps = r.u8()
        epsilon = r.f64()
        n_modes = r.u8()
        extents = r.u64(n_modes + 1)
        ranks = r.u64(n_modes) if n_modes > 1 else (r.u64(),)
        fit_residual = r.f64()
        iterations = r.u64()
        factors = [
            r.array((extents[j], ranks[j])) for j in range(n_modes)
        ]
        core = r.array(tuple(ranks) + (extents[-1],))

    return TuckerModel(
        factors=factors,
        core=core,
        ranks=tuple(int(d) for d in ranks),
        fit_residual=fit_residual,
        iterations_run=int(iterations),
        fit_history=[],
        epsilon=epsilon if has_eps else None,
        residual_bounds=[],
    )
