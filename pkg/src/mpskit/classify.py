"""Feature post-processing and classifiers for compressed cores.

Cores are vectorized into fixed-length feature rows; optional PCA reduces
them further. Classification is nearest-neighbor (single neighbor,
Euclidean) or Fisher discriminant projection with nearest projected class
mean. The success rate is the fraction of exact label matches.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh
from scipy.spatial.distance import cdist

__all__ = [
    "FeatureMatrix",
    "vectorize_cores",
    "center_data",
    "PcaTransform",
    "pca_fit_transform",
    "knn1_classify",
    "LdaModel",
    "lda_fit",
    "lda_classify",
    "csr",
]

_LDA_RIDGE = 1e-6


@dataclass(frozen=True)
class FeatureMatrix:
    """One feature row per sample plus the aligned class labels."""

    rows: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.float64)
        labels = np.asarray(self.labels)
        if rows.ndim != 2:
            raise ValueError(f"rows must be 2-D, got shape {rows.shape}")
        if labels.ndim != 1 or len(labels) != rows.shape[0]:
            raise ValueError(
                f"{len(labels)} labels do not align with {rows.shape[0]} rows"
            )
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "labels", labels)

    @property
    def n_features(self):
        return self.rows.shape[1]

    def __len__(self):
        return self.rows.shape[0]


def vectorize_cores(cores, labels):
    """Flatten equal-shaped cores into feature rows (first index fastest)."""
    if len(cores) == 0:
        raise ValueError("no cores to vectorize")
    shapes = {np.asarray(c).shape for c in cores}
    if len(shapes) != 1:
        raise ValueError(f"cores have mixed shapes {sorted(shapes)}")
    rows = np.stack(
        [np.asarray(c, dtype=np.float64).ravel(order="F") for c in cores]
    )
    return FeatureMatrix(rows, labels)


def center_data(train):
    """Subtract the mean tensor from every sample; returns (centered, mean)."""
    if len(train) == 0:
        raise ValueError("cannot center an empty sample set")
    shapes = {np.asarray(t).shape for t in train}
    if len(shapes) != 1:
        raise ValueError(f"samples have mixed shapes {sorted(shapes)}")
    stack = np.stack([np.asarray(t, dtype=np.float64) for t in train])
    mean = stack.mean(axis=0)
    return [t - mean for t in stack], mean


@dataclass(frozen=True)
class PcaTransform:
    """Fitted principal axes: mean row plus component rows (p x n_features)."""

    mean: np.ndarray
    components: np.ndarray

    def transform(self, features):
        if features.n_features != self.mean.shape[0]:
            raise ValueError(
                f"{features.n_features} features do not match the fitted "
                f"{self.mean.shape[0]}"
            )
        return FeatureMatrix(
            (features.rows - self.mean) @ self.components.T, features.labels
        )


def pca_fit_transform(features, p):
    """Project onto the top ``p`` principal axes of the feature covariance.

    Returns (projected training features, reusable transform). Features are
    centered by their mean before the axes are extracted.
    """
    n, nf = features.rows.shape
    if not 1 <= p <= min(n, nf):
        raise ValueError(f"p must lie in 1..{min(n, nf)}, got {p}")
    mean = features.rows.mean(axis=0)
    centered = features.rows - mean
    _, _, v = np.linalg.svd(centered, full_matrices=False)
    components = v[:p].copy()
    for j in range(components.shape[0]):
        i = int(np.argmax(np.abs(components[j])))
        if components[j, i] < 0:
            components[j] = -components[j]
    transform = PcaTransform(mean=mean, components=components)
    return transform.transform(features), transform


def knn1_classify(train, test):
    """Label each test row by its Euclidean-nearest training row.

    Distance ties resolve to the lowest training index.
    """
    if train.n_features != test.n_features:
        raise ValueError(
            f"train has {train.n_features} features, test has {test.n_features}"
        )
    distances = cdist(test.rows, train.rows)
    return train.labels[np.argmin(distances, axis=1)]


@dataclass(frozen=True)
class LdaModel:
    """Discriminant projection plus projected class centroids."""

    projection: np.ndarray
    class_means: np.ndarray
    classes: np.ndarray


def lda_fit(train):
    """Fit a Fisher discriminant: maximize between- over within-class scatter.

    The within-class scatter is ridge-regularized (scaled to its trace), so
    feature counts above the sample count never crash. Needs >= 2 classes
    with >= 2 samples each.
    """
    classes, counts = np.unique(train.labels, return_counts=True)
    if len(classes) < 2:
        raise ValueError("discriminant fitting needs at least two classes")
    if counts.min() < 2:
        raise ValueError("every class needs at least two samples")

    nf = train.n_features
    overall = train.rows.mean(axis=0)
    within = np.zeros((nf, nf))
    between = np.zeros((nf, nf))
    means = []
    for label, count in zip(classes, counts):
        block = train.rows[train.labels == label]
        mean = block.mean(axis=0)
        means.append(mean)
        centered = block - mean
        within += centered.T @ centered
        gap = (mean - overall)[:, None]
        between += count * (gap @ gap.T)

    lam = _LDA_RIDGE * np.trace(within) / nf
    if lam <= 0.0:
        lam = np.finfo(np.float64).tiny
    within[np.diag_indices_from(within)] += lam

    n_dirs = len(classes) - 1
    _, vectors = eigh(between, within)
    projection = vectors[:, ::-1][:, :n_dirs].copy()
    for j in range(projection.shape[1]):
        i = int(np.argmax(np.abs(projection[:, j])))
        if projection[i, j] < 0:
            projection[:, j] = -projection[:, j]

    return LdaModel(
        projection=projection,
        class_means=np.stack(means) @ projection,
        classes=classes,
    )


def lda_classify(model, test):
    """Label each test row by the nearest projected class centroid."""
    if test.n_features != model.projection.shape[0]:
        raise ValueError(
            f"test has {test.n_features} features, model expects "
            f"{model.projection.shape[0]}"
        )
    projected = test.rows @ model.projection
    distances = cdist(projected, model.class_means)
    return model.classes[np.argmin(distances, axis=1)]


def csr(predicted, truth):
    """Classification success rate: fraction of exact label matches."""
    predicted = np.asarray(predicted)
    truth = np.asarray(truth)
    if predicted.shape != truth.shape:
        raise ValueError(
            f"{predicted.shape} predictions vs {truth.shape} truth labels"
        )
    return float(np.mean(predicted == truth))
