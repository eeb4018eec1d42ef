"""Two-sweep tensor-train compression with a mixed-canonical chain.

A stack of K samples (an order N+1 tensor with a dedicated sample mode) is
factored into shared orthogonal chain blocks plus one small core matrix per
sample. A left-to-right sweep of truncated SVDs produces left-orthogonal
blocks up to the core position, a right-to-left sweep produces
right-orthogonal blocks down to it, and the remaining mass lands in the
per-sample cores. Unseen samples are projected through the transposed chain.

Rank control at every bond uses the singular-value-mass threshold from
:mod:`mpskit.linalg`; the chain layout (which modes sit left/right of the
sample mode) comes from :func:`plan_permutation`.
"""

import dataclasses
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from . import _binio
from .errors import DegenerateInputError, FormatError
from .linalg import svd_diagnostics, truncated_svd
from .tensor import PermutationPlan, permute_modes

__all__ = [
    "CompressionConfig",
    "BondRecord",
    "MpsModel",
    "plan_permutation",
    "mps_train",
    "mps_compress_test",
    "truncate_cores",
    "save_mps_model",
    "load_mps_model",
]

MPS_MAGIC = b"MPS1"
MPS_VERSION = 1


@dataclass(frozen=True)
class CompressionConfig:
    """Knobs for :func:`mps_train`.

    ``permute`` is ``"auto"`` (derive a layout from the extents), ``"none"``
    (take the input layout as-is; requires an integer ``core_position``
    saying where the sample mode already sits), or an explicit
    :class:`PermutationPlan` over the sample-mode-last layout.
    ``further_truncation``, when set, crops every core to its leading
    (rows, cols) block after training.
    """

    epsilon: float = 0.75
    core_position: "int | str" = "auto"
    permute: "str | PermutationPlan" = "auto"
    further_truncation: "tuple | None" = None


@dataclass(frozen=True)
class BondRecord:
    """Per-bond truncation bookkeeping collected during training."""

    bond: int
    delta: int
    full_rank: int
    discarded_mass: float
    discarded_energy: float
    entropy: float
    truncation_loss: float


@dataclass(frozen=True)
class MpsModel:
    """Trained chain: shared orthogonal blocks plus per-sample core matrices.

    ``left_factors[j]`` has shape (bond_dims[j], extent, bond_dims[j+1]) for
    chain positions 1..n-1; ``right_factors`` covers positions n+1..N+1 in
    chain order. ``cores[k]`` is the (bond_dims[n-1], bond_dims[n]) matrix for
    sample k. ``plan`` maps the sample-mode-last layout to the chain layout;
    ``sample_shape`` is the per-sample extent tuple in original mode order.
    """

    left_factors: list
    right_factors: list
    cores: list
    bond_dims: tuple
    plan: PermutationPlan
    epsilon: float
    sample_shape: tuple
    n_samples: int
    bond_records: list

    @property
    def core_position(self):
        return self.plan.core_position

    @property
    def n_features(self):
        n = self.core_position
        return self.bond_dims[n - 1] * self.bond_dims[n]

    @property
    def error_bound(self):
        """Frobenius bound on the training reconstruction error."""
        return float(np.sqrt(sum(r.discarded_energy for r in self.bond_records)))

    def left_canonical_defects(self):
        """Spectral-norm deviation of each left block from column orthonormality."""
        return [
            float(np.linalg.norm(
                np.einsum("aib,aic->bc", b, b) - np.eye(b.shape[2]), 2))
            for b in self.left_factors
        ]

    def right_canonical_defects(self):
        """Spectral-norm deviation of each right block from row orthonormality."""
        return [
            float(np.linalg.norm(
                np.einsum("aib,cib->ac", c, c) - np.eye(c.shape[0]), 2))
            for c in self.right_factors
        ]

    def reconstruct(self):
        """Contract the chain back into a full tensor, sample mode last."""
        g = np.stack(self.cores, axis=1)
        blocks = list(self.left_factors) + [g] + list(self.right_factors)
        acc = blocks[0][0]
        for b in blocks[1:]:
            acc = np.tensordot(acc, b, axes=([-1], [0]))
        return permute_modes(acc[..., 0], self.plan.inverse())


def plan_permutation(shape, k_samples, core_position=None):
    """Choose a chain layout for per-sample extents ``shape`` and K samples.

    Every way of assigning modes to the left or right of the sample mode is
    scored by the balance ratio min(prod_left, prod_right) / max(...); the
    left group is ordered by decreasing extent, the right group by increasing
    extent, and the sample mode sits between them. Ties prefer the smaller
    left product, then fewer left modes, then the lexicographically smallest
    permutation. ``core_position``, when given, pins the number of left modes
    to ``core_position - 1``.
    """
    shape = tuple(int(s) for s in shape)
    n_modes = len(shape)
    if n_modes < 1 or min(shape) < 1:
        raise ValueError(f"invalid sample shape {shape}")
    if k_samples < 1:
        raise ValueError(f"need at least one sample, got {k_samples}")
    if core_position is not None and not 1 <= core_position <= n_modes + 1:
        raise ValueError(
            f"core position {core_position} out of range 1..{n_modes + 1}"
        )

    modes = range(1, n_modes + 1)
    best = None
    for size in range(n_modes + 1):
        if core_position is not None and size != core_position - 1:
            continue
        for prefix_set in combinations(modes, size):
            suffix_set = [m for m in modes if m not in prefix_set]
            prefix = sorted(prefix_set, key=lambda m: (-shape[m - 1], m))
            suffix = sorted(suffix_set, key=lambda m: (shape[m - 1], m))
            pp = int(np.prod([shape[m - 1] for m in prefix], dtype=np.int64))
            sp = int(np.prod([shape[m - 1] for m in suffix], dtype=np.int64))
            perm = tuple(prefix) + (n_modes + 1,) + tuple(suffix)
            key = (-min(pp, sp) / max(pp, sp), min(pp, sp) != pp, len(prefix), perm)
            if best is None or key < best[0]:
                best = (key, perm, len(prefix) + 1)

    return PermutationPlan(best[1], best[2])


def _resolve_layout(x, cfg):
    """Return (plan, tensor already permuted to the chain layout)."""
    order = x.ndim
    if isinstance(cfg.permute, PermutationPlan):
        plan = cfg.permute
        if len(plan.perm) != order:
            raise ValueError(
                f"plan over {len(plan.perm)} modes does not match "
                f"order-{order} input"
            )
        if plan.perm[plan.core_position - 1] != order:
            raise ValueError(
                "plan's core position must hold the sample mode (last input mode)"
            )
        return plan, permute_modes(x, plan)
    if cfg.permute == "none":
        if not isinstance(cfg.core_position, int):
            raise ValueError(
                "permute='none' requires an integer core_position marking "
                "the sample mode"
            )
        n = cfg.core_position
        if not 1 <= n <= order:
            raise ValueError(f"core position {n} out of range 1..{order}")
        # Equivalent plan from the canonical sample-mode-last layout.
        perm = tuple(range(1, n)) + (order,) + tuple(range(n, order))
        return PermutationPlan(perm, n), x
    if cfg.permute == "auto":
        k = x.shape[-1]
        pos = cfg.core_position if isinstance(cfg.core_position, int) else None
        plan = plan_permutation(x.shape[:-1], k, core_position=pos)
        return plan, permute_modes(x, plan)
    raise ValueError(f"permute must be 'auto', 'none' or a plan, got {cfg.permute!r}")


def _bond_record(bond, f):
    diag = svd_diagnostics(f)
    return BondRecord(
        bond=bond,
        delta=f.delta,
        full_rank=f.full_rank,
        discarded_mass=f.discarded_mass,
        discarded_energy=f.discarded_energy,
        entropy=diag.entropy,
        truncation_loss=diag.truncation_loss,
    )


def mps_train(x, cfg):
    """Decompose a sample stack into a mixed-canonical chain.

    ``x`` carries the samples along one mode: the last one for
    ``cfg.permute`` in ``("auto", plan)``, or the mode named by
    ``cfg.core_position`` for ``permute="none"``. Returns an
    :class:`MpsModel` whose chain contraction approximates ``x`` with
    Frobenius error bounded by the accumulated discarded singular mass.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim < 2:
        raise ValueError("input must have at least one sample mode plus the sample axis")
    if not 0.0 < cfg.epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in (0, 1], got {cfg.epsilon}")
    if not np.any(x):
        raise DegenerateInputError("cannot compress an all-zero tensor")

    plan, xp = _resolve_layout(x, cfg)
    xp = np.asfortranarray(xp)
    shape = xp.shape
    order = xp.ndim
    n = plan.core_position
    k = shape[n - 1]

    left = []
    records = []
    bonds = [1]

    # Left-to-right sweep: peel orthonormal column blocks off the front,
    # carrying the singular mass rightward.
    rest = xp.reshape(1, -1, order="F")
    for j in range(1, n):
        w = rest.reshape(bonds[-1] * shape[j - 1], -1, order="F")
        f = truncated_svd(w, cfg.epsilon)
        left.append(f.u.reshape(bonds[-1], shape[j - 1], f.delta, order="F"))
        records.append(_bond_record(j, f))
        bonds.append(f.delta)
        rest = f.v * f.s[:, None]

    # Right-to-left sweep: peel orthonormal row blocks off the back,
    # carrying the mass leftward until it lands in the cores.
    carry = rest.reshape(-1, shape[-1], order="F") if n < order else rest
    right = []
    right_bonds = [1]
    for p in range(order, n, -1):
        w = carry.reshape(-1, shape[p - 1] * right_bonds[-1], order="F")
        f = truncated_svd(w, cfg.epsilon)
        right.append(f.v.reshape(f.delta, shape[p - 1], right_bonds[-1], order="F"))
        records.append(_bond_record(p - 1, f))
        right_bonds.append(f.delta)
        carry = f.u * f.s

    right.reverse()
    right_bonds.reverse()
    bond_dims = tuple(bonds + right_bonds)

    core = carry.reshape(bonds[-1], k, right_bonds[0], order="F")
    cores = [np.ascontiguousarray(core[:, i, :]) for i in range(k)]

    sample_shape = tuple(s for m, s in zip(plan.perm, shape) if m != order)
    sample_shape = tuple(
        sample_shape[i] for i in np.argsort([m for m in plan.perm if m != order])
    )
    records.sort(key=lambda r: r.bond)

    model = MpsModel(
        left_factors=left,
        right_factors=right,
        cores=cores,
        bond_dims=bond_dims,
        plan=plan,
        epsilon=cfg.epsilon,
        sample_shape=sample_shape,
        n_samples=k,
        bond_records=records,
    )
    if cfg.further_truncation is not None:
        model = truncate_cores(model, cfg.further_truncation)
    return model


def mps_compress_test(model, y):
    """Project one unseen sample through the transposed chain blocks.

    Returns the core matrix of shape (bond_dims[n-1], bond_dims[n]). The
    contraction runs mode by mode and never expands the full index sum.
    """
    y = np.asarray(y, dtype=np.float64)
    if y.shape != model.sample_shape:
        raise ValueError(
            f"sample of shape {y.shape} does not match training extents "
            f"{model.sample_shape}"
        )
    order = len(model.plan.perm)
    axes = [m - 1 for m in model.plan.perm if m != order]
    z = np.transpose(y, axes)[None, ...]
    for b in model.left_factors:
        z = np.tensordot(b, z, axes=([0, 1], [0, 1]))
    z = z[..., None]
    for c in reversed(model.right_factors):
        z = np.tensordot(z, c, axes=([-2, -1], [1, 2]))
    return z


def truncate_cores(model, dims):
    """Crop every core to its leading (rows, cols) block.

    The chain blocks adjacent to the core are sliced on the shared bond so
    later projections land directly in the cropped feature space; orthogonality
    of the blocks is preserved by the slicing.
    """
    d1, d2 = (int(d) for d in dims)
    n = model.core_position
    cur1, cur2 = model.bond_dims[n - 1], model.bond_dims[n]
    if not (1 <= d1 <= cur1 and 1 <= d2 <= cur2):
        raise ValueError(
            f"truncation dims {(d1, d2)} must lie in 1..{cur1} x 1..{cur2}"
        )

    left = list(model.left_factors)
    right = list(model.right_factors)
    if left:
        left[-1] = left[-1][:, :, :d1]
    if right:
        right[0] = right[0][:d2, :, :]
    bond_dims = list(model.bond_dims)
    bond_dims[n - 1], bond_dims[n] = d1, d2

    return dataclasses.replace(
        model,
        left_factors=left,
        right_factors=right,
        cores=[c[:d1, :d2] for c in model.cores],
        bond_dims=tuple(bond_dims),
    )


def save_mps_model(model, path):
    """Write the model to a self-describing little-endian binary container."""
    order = len(model.plan.perm)
    extents = model.sample_shape + (model.n_samples,)
    with open(path, "wb") as fh:
        fh.write(MPS_MAGIC)
        _binio.write_u8(fh, MPS_VERSION)
        _binio.write_f64(fh, model.epsilon)
        _binio.write_u8(fh, order)
        _binio.write_u64(fh, *model.plan.perm)
        _binio.write_u64(fh, model.plan.core_position)
        _binio.write_u64(fh, *extents)
        _binio.write_u64(fh, *model.bond_dims)
        for b in model.left_factors:
            _binio.write_array(fh, b)
        _binio.write_array(fh, np.stack(model.cores, axis=1))
        for c in model.right_factors:
            _binio.write_array(fh, c)


def load_mps_model(path):
    """Read a model written by :func:`save_mps_model`."""
    with open(path, "rb") as fh:
        r = _binio.ByteReader(fh)
        r.magic(MPS_MAGIC)
        version = r.u8()
        if version != MPS_VERSION:
            raise FormatError(f"unsupported version {version}", offset=4)
        epsilon = r.f64()
        order = r.u8()
        perm = r.u64(order) if order > 1 else (r.u64(),)
        core_position = r.u64()
        extents = r.u64(order) if order > 1 else (r.u64(),)
        bond_dims = r.u64(order + 1)
        plan = PermutationPlan(perm, core_position)

        chain_extents = [extents[p - 1] for p in perm]
        n = core_position
        left = [
            r.array((bond_dims[j - 1], chain_extents[j - 1], bond_dims[j]))
            for j in range(1, n)
        ]
        k = extents[-1]
        core = r.array((bond_dims[n - 1], k, bond_dims[n]))
        right = [
            r.array((bond_dims[p - 1], chain_extents[p - 1], bond_dims[p]))
            for p in range(n + 1, order + 1)
        ]

    return MpsModel(
        left_factors=left,
        right_factors=right,
        cores=[np.ascontiguousarray(core[:, i, :]) for i in range(k)],
        bond_dims=tuple(int(d) for d in bond_dims),
        plan=plan,
        epsilon=epsilon,
        sample_shape=tuple(int(e) for e in extents[:-1]),
        n_samples=int(k),
        bond_records=[],
    )
