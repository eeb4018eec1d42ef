"""Command-line interface.

Subcommands: ``synth`` (generate a synthetic dataset), ``convert`` (import an
``.npz`` archive), ``compress`` (train a model on a dataset), ``project``
(push a dataset through a trained model), ``classify`` (score projected
cores), ``bench`` (full split/compress/classify protocol with reports and
figures).

Exit codes: 0 success, 2 invalid arguments, 3 data or format error,
4 numerical failure.
"""

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .classify import (
    csr,
    knn1_classify,
    lda_classify,
    lda_fit,
    pca_fit_transform,
    vectorize_cores,
)
from .data import Dataset, load_dataset, save_dataset, stack_samples, synth_dataset
from .errors import DegenerateInputError, FormatError
from .mps import (
    MPS_MAGIC,
    CompressionConfig,
    load_mps_model,
    mps_compress_test,
    mps_train,
    save_mps_model,
    truncate_cores,
)
from .pipeline import CSV_FIELDS, csv_row, report_to_json, run_pipeline
from .tensor import PermutationPlan
from .tucker import (
    TUCKER_MAGIC,
    hooi_train,
    load_tucker_model,
    save_tucker_model,
    truncate_tucker,
    tucker_compress_test,
)

__all__ = ["main", "entrypoint"]


def _int_tuple(text):
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_tuple(text):
    try:
        return tuple(float(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _core_pos(text):
    if text == "auto":
        return "auto"
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'auto' or an integer, got {text!r}")


def _permute(text):
    if text in ("auto", "none"):
        return text
    perm = _int_tuple(text)
    return PermutationPlan(perm, perm.index(len(perm)) + 1)


def _emit(document, out):
    text = json.dumps(document, sort_keys=True, indent=2)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _shared_compression_flags(p):
    p.add_argument("--epsilon", type=_float_tuple, default=None,
                   help="singular-value mass threshold in (0, 1]; bench accepts a comma list")
    p.add_argument("--ranks", type=_int_tuple, default=None,
                   help="per-mode target ranks (hooi only)")
    p.add_argument("--core-pos", type=_core_pos, default="auto",
                   help="chain position of the sample mode, or 'auto'")
    p.add_argument("--permute", type=_permute, default="auto",
                   help="'auto', 'none', or an explicit comma permutation of "
                        "the sample-mode-last layout")


def _single_epsilon(args):
    if args.epsilon is None:
        return None
    if len(args.epsilon) != 1:
        raise ValueError("this command takes a single --epsilon value")
    return args.epsilon[0]


def cmd_synth(args):
    ds = synth_dataset(
        classes=args.classes,
        per_class=args.per_class,
        shape=args.shape,
        noise_sigma=args.sigma,
        seed=args.seed,
    )
    save_dataset(ds, args.out)
    _emit(
        {
            "dataset": ds.name,
            "classes": args.classes,
            "per_class": args.per_class,
            "shape": list(args.shape),
            "sigma": args.sigma,
            "seed": args.seed,
            "path": str(args.out),
        },
        None,
    )
    return 0


def cmd_convert(args):
    try:
        archive = np.load(args.input)
    except (OSError, ValueError) as exc:
        raise FormatError(f"cannot read {args.input}: {exc}") from exc
    if args.samples_key not in archive or args.labels_key not in archive:
        raise FormatError(
            f"archive must contain arrays {args.samples_key!r} and {args.labels_key!r}"
        )
    samples = np.asarray(archive[args.samples_key], dtype=np.float64)
    labels = np.asarray(archive[args.labels_key])
    if samples.ndim < 2:
        raise FormatError("samples array must be at least 2-D (sample axis first)")
    ds = Dataset(
        samples=[samples[i] for i in range(samples.shape[0])],
        labels=labels,
        name=Path(args.out).stem,
    )
    save_dataset(ds, args.out)
    _emit({"samples": len(ds), "shape": list(ds.sample_shape), "path": str(args.out)}, None)
    return 0


def cmd_compress(args):
    ds = load_dataset(args.dataset)
    epsilon = _single_epsilon(args)
    if args.method in ("mps", "ttpca"):
        cfg = CompressionConfig(
            epsilon=epsilon if epsilon is not None else 0.75,
            core_position=args.core_pos,
            permute=args.permute,
        )
        model = mps_train(stack_samples(ds), cfg)
        save_mps_model(model, args.out)
        summary = {
            "method": args.method,
            "epsilon": model.epsilon,
            "n_features": model.n_features,
            "bond_dims": list(model.bond_dims),
            "plan": {
                "perm": list(model.plan.perm),
                "core_position": model.plan.core_position,
            },
            "bonds": [
                {
                    "bond": r.bond,
                    "delta": r.delta,
                    "full_rank": r.full_rank,
                    "discarded_mass": r.discarded_mass,
                    "entropy": r.entropy,
                    "truncation_loss": r.truncation_loss,
                }
                for r in model.bond_records
            ],
            "path": str(args.out),
        }
    elif args.method == "hooi":
        if args.ranks is not None:
            model = hooi_train(stack_samples(ds), ranks=args.ranks)
        else:
            model = hooi_train(
                stack_samples(ds),
                epsilon=epsilon if epsilon is not None else 0.75,
            )
        save_tucker_model(model, args.out)
        summary = {
            "method": "hooi",
            "epsilon": model.epsilon,
            "ranks": list(model.ranks),
            "n_features": model.n_features,
            "fit_residual": model.fit_residual,
            "iterations_run": model.iterations_run,
            "residual_bounds": [list(b) for b in model.residual_bounds],
            "path": str(args.out),
        }
    else:
        raise ValueError(f"unknown method {args.method!r}")
    _emit(summary, None)
    return 0


def _load_model(path):
    with open(path, "rb") as fh:
        magic = fh.read(4)
    if magic == MPS_MAGIC:
        return load_mps_model(path), "mps"
    if magic == TUCKER_MAGIC:
        return load_tucker_model(path), "hooi"
    raise FormatError(f"unrecognized model magic {magic!r}", offset=0)


def cmd_project(args):
    model, kind = _load_model(args.model)
    ds = load_dataset(args.dataset)
    if args.truncate is not None:
        if kind == "mps":
            model = truncate_cores(model, args.truncate)
        else:
            model = truncate_tucker(model, args.truncate)
    project = mps_compress_test if kind == "mps" else tucker_compress_test
    cores = [project(model, y) for y in ds.samples]
    save_dataset(Dataset(cores, ds.labels, name=ds.name), args.out)
    _emit(
        {
            "model": str(args.model),
            "kind": kind,
            "samples": len(cores),
            "core_shape": list(np.asarray(cores[0]).shape),
            "path": str(args.out),
        },
        None,
    )
    return 0


def cmd_classify(args):
    train = load_dataset(args.train)
    test = load_dataset(args.test)
    train_features = vectorize_cores(train.samples, train.labels)
    test_features = vectorize_cores(test.samples, test.labels)
    if args.pca is not None:
        train_features, transform = pca_fit_transform(train_features, args.pca)
        test_features = transform.transform(test_features)
    if args.classifier == "knn1":
        predicted = knn1_classify(train_features, test_features)
    else:
        predicted = lda_classify(lda_fit(train_features), test_features)
    report = {
        "schema": "mpskit-classify/1",
        "classifier": args.classifier,
        "pca_components": args.pca,
        "n_train": len(train),
        "n_test": len(test),
        "n_features": train_features.n_features,
        "csr": csr(predicted, test.labels),
    }
    _emit(report, args.out)
    if args.out and args.format == "csv":
        path = Path(args.out).with_suffix(".csv")
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=sorted(report))
            writer.writeheader()
            writer.writerow(report)
    return 0


def _aggregate(reports):
    """Two groupings per method: across split iterations and across runs."""
    by_method = {}
    for r in reports:
        by_method.setdefault(r.method, []).append(r)
    out = {}
    for method, runs in sorted(by_method.items()):
        pooled = [c for r in runs for c in r.csr_per_iteration]
        means = [r.csr_mean for r in runs]
        out[method] = {
            "over_splits": {
                "mean": float(np.mean(pooled)),
                "std": float(np.std(pooled, ddof=1)) if len(pooled) > 1 else 0.0,
                "count": len(pooled),
            },
            "over_runs": {
                "mean": float(np.mean(means)),
                "std": float(np.std(means, ddof=1)) if len(means) > 1 else 0.0,
                "count": len(means),
            },
        }
    return out


def cmd_bench(args):
    ds = load_dataset(args.dataset)
    methods = ("mps", "ttpca", "hooi") if args.method == "all" else tuple(
        args.method.split(",")
    )
    epsilons = args.epsilon if args.epsilon is not None else (None,)
    holdouts = args.holdout

    reports = []
    for method in methods:
        for eps in epsilons:
            for ho in holdouts:
                reports.append(
                    run_pipeline(
                        ds,
                        method,
                        classifier=args.classifier,
                        epsilon=eps,
                        ranks=args.ranks if method == "hooi" else None,
                        core_position=args.core_pos,
                        permute=args.permute,
                        truncate=args.truncate,
                        pca_components=args.pca,
                        holdout=ho,
                        iterations=args.iters,
                        seed=args.seed,
                        parallel=args.parallel,
                    )
                )

    if len(reports) == 1:
        document = reports[0].to_dict()
    else:
        document = {
            "schema": "mpskit-bench/1",
            "runs": [r.to_dict() for r in reports],
            "aggregate": _aggregate(reports),
        }
    _emit(document, args.out)

    if args.out:
        out = Path(args.out)
        if args.format == "csv":
            with open(out.with_suffix(".csv"), "w", newline="") as fh:
                writer = csv.DictWriter(fh, fieldnames=CSV_FIELDS)
                writer.writeheader()
                for r in reports:
                    writer.writerow(csv_row(r))
        if not args.no_figures:
            from . import plots

            plots.save_csr_figure(reports, out.with_suffix(".csr.png"))
            plots.save_timing_figure(reports, out.with_suffix(".timing.png"))
    return 0


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="mpskit",
        description="Tensor compression to core matrices, with a Tucker "
                    "baseline and a classification benchmark harness.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("--classes", type=int, required=True)
    p.add_argument("--per-class", type=int, required=True)
    p.add_argument("--shape", type=_int_tuple, required=True,
                   help="per-sample extents, e.g. 8,8,3")
    p.add_argument("--sigma", type=float, default=0.1, help="noise level")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("convert", help="import an .npz archive as a dataset")
    p.add_argument("input", help=".npz with a samples array (sample axis first) and labels")
    p.add_argument("--samples-key", default="samples")
    p.add_argument("--labels-key", default="labels")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("compress", help="train a compression model on a dataset")
    p.add_argument("dataset")
    p.add_argument("--method", choices=("mps", "ttpca", "hooi"), default="mps")
    _shared_compression_flags(p)
    p.add_argument("--out", required=True, help="model file to write")
    p.set_defaults(func=cmd_compress)

    p = sub.add_parser("project", help="project a dataset through a trained model")
    p.add_argument("dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--truncate", type=_int_tuple, default=None,
                   help="crop cores to leading dims, e.g. 6,6")
    p.add_argument("--out", required=True, help="core dataset to write")
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("classify", help="classify projected cores")
    p.add_argument("--train", required=True, help="training core dataset")
    p.add_argument("--test", required=True, help="test core dataset")
    p.add_argument("--classifier", choices=("knn1", "lda"), default="knn1")
    p.add_argument("--pca", type=int, default=None,
                   help="project features onto this many principal axes")
    p.add_argument("--out", default=None, help="report path (stdout if omitted)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("bench", help="holdout benchmark with reports and figures")
    p.add_argument("dataset")
    p.add_argument("--method", default="mps",
                   help="comma list from mps,ttpca,hooi or 'all'")
    _shared_compression_flags(p)
    p.add_argument("--truncate", type=_int_tuple, default=None,
                   help="crop cores to leading dims before classification")
    p.add_argument("--classifier", choices=("knn1", "lda"), default="knn1")
    p.add_argument("--pca", type=int, default=None)
    p.add_argument("--holdout", type=_float_tuple, default=(0.5,),
                   help="test/train count ratio; accepts a comma list")
    p.add_argument("--iters", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="report path (stdout if omitted)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--no-figures", action="store_true",
                   help="skip rendering figures next to the report")
    p.add_argument("--parallel", action="store_true",
                   help="run iterations in threads (timings become unreliable)")
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except DegenerateInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except np.linalg.LinAlgError as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return 4
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entrypoint():
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
