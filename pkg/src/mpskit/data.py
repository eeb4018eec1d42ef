"""Dataset container, binary file format, synthetic data, and holdout splits.

Datasets hold equal-shaped sample tensors with integer class labels. The
on-disk format ("TDS1") is little-endian and self-describing: magic, order,
extents, sample count, labels, then raw float64 buffers with the first index
fastest. Synthetic datasets place each class on a random rank-1 template plus
Gaussian noise; splitting partitions each class at a target test/train ratio.
"""

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _binio
from .errors import FormatError

__all__ = [
    "Dataset",
    "save_dataset",
    "load_dataset",
    "synth_dataset",
    "holdout_split",
    "stack_samples",
]

DATASET_MAGIC = b"TDS1"


@dataclass
class Dataset:
    """Equal-shaped sample tensors with aligned integer labels."""

    samples: list
    labels: np.ndarray
    name: str = ""

    def __post_init__(self):
        if len(self.samples) == 0:
            raise ValueError("a dataset needs at least one sample")
        self.samples = [np.asarray(s, dtype=np.float64) for s in self.samples]
        shapes = {s.shape for s in self.samples}
        if len(shapes) != 1:
            raise ValueError(f"samples have mixed shapes {sorted(shapes)}")
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.labels.shape != (len(self.samples),):
            raise ValueError(
                f"{self.labels.size} labels do not align with "
                f"{len(self.samples)} samples"
            )

    @property
    def sample_shape(self):
        return self.samples[0].shape

    def __len__(self):
        return len(self.samples)


def stack_samples(dataset):
    """Concatenate the samples along a new trailing sample mode."""
    return np.stack(dataset.samples, axis=-1)


def save_dataset(dataset, path):
    """Write a dataset in the TDS1 container format."""
    shape = dataset.sample_shape
    with open(path, "wb") as fh:
        fh.write(DATASET_MAGIC)
        _binio.write_u8(fh, len(shape))
        _binio.write_u64(fh, *shape)
        _binio.write_u64(fh, len(dataset))
        _binio.write_u32(fh, *(int(l) for l in dataset.labels))
        for s in dataset.samples:
            _binio.write_array(fh, s)


def load_dataset(path):
    """Read a TDS1 file; the dataset name is the file stem."""
    with open(path, "rb") as fh:
        r = _binio.ByteReader(fh)
        r.magic(DATASET_MAGIC)
        order = r.u8()
        if order < 1:
            raise FormatError("sample order must be >= 1", offset=4)
        shape = r.u64(order) if order > 1 else (r.u64(),)
        count = r.u64()
        if count < 1:
            raise FormatError("sample count must be >= 1", offset=r.offset - 8)
        labels = np.array(r.u32(count) if count > 1 else [r.u32()], dtype=np.int64)
        samples = [r.array(shape) for _ in range(count)]
        trailing = fh.read(1)
        if trailing:
            raise FormatError("trailing bytes after last sample", offset=r.offset)
    return Dataset(samples=samples, labels=labels, name=Path(path).stem)


def synth_dataset(classes, per_class, shape, noise_sigma, seed, name=None):
    """Random rank-1 class templates of unit norm plus i.i.d. Gaussian noise.

    Deterministic in ``seed``: templates are drawn first (one per class, one
    factor vector per mode), then per-sample noise in sample order.
    """
    if classes < 2:
        raise ValueError(f"need at least two classes, got {classes}")
    if per_class < 1:
        raise ValueError(f"need at least one sample per class, got {per_class}")
    shape = tuple(int(s) for s in shape)
    if len(shape) < 1 or min(shape) < 1:
        raise ValueError(f"invalid sample shape {shape}")

    rng = np.random.default_rng(seed)
    templates = []
    for _ in range(classes):
        t = np.ones(())
        for extent in shape:
            t = np.multiply.outer(t, rng.standard_normal(extent))
        templates.append(t / np.linalg.norm(t.ravel()))

    samples = []
    labels = []
    for c, template in enumerate(templates):
        for _ in range(per_class):
            noise = noise_sigma * rng.standard_normal(shape) if noise_sigma else 0.0
            samples.append(template + noise)
            labels.append(c)

    if name is None:
        dims = "x".join(str(s) for s in shape)
        name = f"synth-c{classes}-m{per_class}-{dims}-s{noise_sigma}-seed{seed}"
    return Dataset(samples=samples, labels=np.array(labels), name=name)


def holdout_split(dataset, ratio, seed):
    """Partition each class at test/train count ratio ``ratio``; deterministic in seed.

    Every class keeps at least one sample on each side. Returns
    (train, test).
    """
    if not 0.0 < ratio < 1.0:
        raise ValueError(f"holdout ratio must lie in (0, 1), got {ratio}")
    rng = np.random.default_rng(seed)
    train_idx = []
    test_idx = []
    for label in np.unique(dataset.labels):
        idx = np.flatnonzero(dataset.labels == label)
        m = len(idx)
        if m < 2:
            raise ValueError(
                f"class {label} has {m} sample(s); splitting needs at least 2"
            )
        n_train = int(round(m / (1.0 + ratio)))
        n_train = min(max(n_train, 1), m - 1)
        shuffled = idx[rng.permutation(m)]
        train_idx.extend(shuffled[:n_train])
        test_idx.extend(shuffled[n_train:])

    def subset(indices, suffix):
        return Dataset(
            samples=[dataset.samples[i] for i in indices],
            labels=dataset.labels[list(indices)],
            name=f"{dataset.name}-{suffix}" if dataset.name else suffix,
        )

    return subset(train_idx, "train"), subset(test_idx, "test")
