"""End-to-end benchmark pipeline: split, compress, project, classify, report.

One run repeats the same experiment over seeded random holdout splits and
aggregates the classification success rate. Three methods are wired up:

* ``mps``   - center the training tensors, train the chain compressor,
              project test samples through the shared blocks;
* ``ttpca`` - the same compressor on raw (uncentered) tensors, optionally
              followed by PCA on the vectorized cores;
* ``hooi``  - the orthogonal Tucker baseline.

Split seeding is documented and portable: iteration ``i`` uses numpy's PCG64
generator seeded with ``SeedSequence([seed, i])``.
"""

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .classify import (
    center_data,
    csr,
    knn1_classify,
    lda_classify,
    lda_fit,
    pca_fit_transform,
    vectorize_cores,
)
from .data import holdout_split, stack_samples
from .mps import CompressionConfig, mps_compress_test, mps_train, truncate_cores
from .tucker import (
    hooi_train,
    truncate_tucker,
    tucker_compress_test,
    tucker_compress_train,
)

__all__ = ["RunReport", "run_pipeline", "report_to_json", "CSV_FIELDS", "csv_row"]

METHODS = ("mps", "ttpca", "hooi")
CLASSIFIERS = ("knn1", "lda")

TIMING_FIELDS = ("time_train", "time_project", "time_classify", "time_total")

CSV_FIELDS = (
    "dataset",
    "method",
    "classifier",
    "epsilon",
    "ranks",
    "truncate",
    "pca_components",
    "holdout",
    "iterations",
    "seed",
    "csr_mean",
    "csr_std",
    "n_features",
) + TIMING_FIELDS


@dataclass
class RunReport:
    """Aggregated outcome of one pipeline configuration."""

    dataset: str
    method: str
    classifier: str
    epsilon: "float | None"
    ranks: "tuple | None"
    truncate: "tuple | None"
    pca_components: "int | None"
    holdout: float
    iterations: int
    seed: int
    csr_per_iteration: list
    csr_mean: float
    csr_std: float
    n_features: float
    n_features_per_iteration: list
    time_train: float
    time_project: float
    time_classify: float
    time_total: float

    def to_dict(self):
        d = asdict(self)
        d["ranks"] = list(self.ranks) if self.ranks is not None else None
        d["truncate"] = list(self.truncate) if self.truncate is not None else None
        return d


def report_to_json(report, strip_timings=False):
    """Stable JSON rendering; ``strip_timings`` drops the wall-clock fields."""
    d = report.to_dict() if isinstance(report, RunReport) else dict(report)
    if strip_timings:
        for key in TIMING_FIELDS:
            d.pop(key, None)
    return json.dumps(d, sort_keys=True, indent=2)


def csv_row(report):
    d = report.to_dict()
    row = {}
    for key in CSV_FIELDS:
        value = d[key]
        if isinstance(value, (list, tuple)):
            value = "x".join(str(v) for v in value)
        row[key] = "" if value is None else value
    return row


def _compress_iteration(train, method, epsilon, ranks, core_position,
                        permute, truncate):
    """Train the compressor; returns (model, train cores, projection closure)."""
    if method in ("mps", "ttpca"):
        mean = None
        tensors = train.samples
        if method == "mps":
            tensors, mean = center_data(train.samples)
        cfg = CompressionConfig(
            epsilon=epsilon if epsilon is not None else 0.75,
            core_position=core_position,
            permute=permute,
        )
        model = mps_train(np.stack(tensors, axis=-1), cfg)
        if truncate is not None:
            if len(truncate) != 2:
                raise ValueError(
                    f"chain truncation takes (rows, cols), got {truncate}"
                )
            model = truncate_cores(model, truncate)
        train_cores = model.cores
        project = mps_compress_test
    else:
        if ranks is not None:
            model = hooi_train(stack_samples(train), ranks=ranks)
        else:
            model = hooi_train(
                stack_samples(train),
                epsilon=epsilon if epsilon is not None else 0.75,
            )
        if truncate is not None:
            model = truncate_tucker(model, truncate)
        mean = None
        train_cores = tucker_compress_train(model)
        project = tucker_compress_test

    def project_all(samples):
        if mean is None:
            return [project(model, y) for y in samples]
        return [project(model, y - mean) for y in samples]

    return model, train_cores, project_all


def _run_iteration(dataset, iteration, *, method, classifier, epsilon, ranks,
                   core_position, permute, truncate, pca_components, holdout,
                   seed):
    train, test = holdout_split(dataset, holdout, seed=[seed, iteration])

    t0 = time.perf_counter()
    model, train_cores, project_all = _compress_iteration(
        train, method, epsilon, ranks, core_position, permute, truncate
    )
    train_features = vectorize_cores(train_cores, train.labels)
    transform = None
    if pca_components is not None:
        train_features, transform = pca_fit_transform(
            train_features, pca_components
        )
    t1 = time.perf_counter()

    test_features = vectorize_cores(project_all(test.samples), test.labels)
    if transform is not None:
        test_features = transform.transform(test_features)
    t2 = time.perf_counter()

    if classifier == "knn1":
        predicted = knn1_classify(train_features, test_features)
    else:
        predicted = lda_classify(lda_fit(train_features), test_features)
    rate = csr(predicted, test.labels)
    t3 = time.perf_counter()

    return {
        "csr": rate,
        "n_features": model.n_features,
        "time_train": t1 - t0,
        "time_project": t2 - t1,
        "time_classify": t3 - t2,
    }


def run_pipeline(dataset, method, *, classifier="knn1", epsilon=None,
                 ranks=None, core_position="auto", permute="auto",
                 truncate=None, pca_components=None, holdout=0.5,
                 iterations=10, seed=0, parallel=False):
    """Run ``iterations`` seeded split/compress/classify rounds and aggregate.

    Results are deterministic in (dataset, configuration, seed); only the
    wall-clock fields vary between runs. ``parallel`` fans the iterations out
    over threads; keep the default (serial) when the timings matter.
    """
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")
    if classifier not in CLASSIFIERS:
        raise ValueError(
            f"classifier must be one of {CLASSIFIERS}, got {classifier!r}"
        )
    if iterations < 1:
        raise ValueError(f"iterations must be >= 1, got {iterations}")
    if ranks is not None and method != "hooi":
        raise ValueError("ranks only apply to the hooi method")

    kwargs = dict(
        method=method, classifier=classifier, epsilon=epsilon, ranks=ranks,
        core_position=core_position, permute=permute, truncate=truncate,
        pca_components=pca_components, holdout=holdout, seed=seed,
    )
    if parallel:
        with ThreadPoolExecutor() as pool:
            outcomes = list(
                pool.map(
                    lambda it: _run_iteration(dataset, it, **kwargs),
                    range(iterations),
                )
            )
    else:
        outcomes = [
            _run_iteration(dataset, it, **kwargs) for it in range(iterations)
        ]

    rates = [o["csr"] for o in outcomes]
    feature_counts = [int(o["n_features"]) for o in outcomes]
    return RunReport(
        dataset=dataset.name,
        method=method,
        classifier=classifier,
        epsilon=epsilon,
        ranks=tuple(ranks) if ranks is not None else None,
        truncate=tuple(truncate) if truncate is not None else None,
        pca_components=pca_components,
        holdout=holdout,
        iterations=iterations,
        seed=seed,
        csr_per_iteration=rates,
        csr_mean=float(np.mean(rates)),
        csr_std=float(np.std(rates, ddof=1)) if len(rates) > 1 else 0.0,
        n_features=float(np.mean(feature_counts)),
        n_features_per_iteration=feature_counts,
        time_train=sum(o["time_train"] for o in outcomes),
        time_project=sum(o["time_project"] for o in outcomes),
        time_classify=sum(o["time_classify"] for o in outcomes),
        time_total=sum(
            o["time_train"] + o["time_project"] + o["time_classify"]
            for o in outcomes
        ),
    )
